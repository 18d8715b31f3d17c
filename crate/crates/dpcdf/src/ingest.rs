//! Sample files: one number per line, or a single-column CSV with an
//! optional header row.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use dpcdf_core::tree::{Dataset, DomainInterval};

use crate::error::{io_error, HarnessError, Result};

/// How values outside `[a, b)` are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Reject,
    /// Values below `a` become `a`; values at or above `b` become the largest
    /// float below `b`.
    Clamp,
}

/// Reads one real per row. A first row that does not parse is taken as a
/// header; any later unparseable row is an error naming the row.
pub fn read_values<R: Read>(reader: R) -> Result<Vec<(u64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    let mut first = true;
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let header = std::mem::replace(&mut first, false);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 1 {
            return Err(HarnessError::Columns {
                row,
                columns: record.len(),
            });
        }
        match record[0].parse::<f64>() {
            Ok(v) if v.is_finite() => out.push((row, v)),
            _ if header => continue,
            _ => {
                return Err(HarnessError::Parse {
                    row,
                    value: record[0].to_string(),
                })
            }
        }
    }
    Ok(out)
}

pub fn dataset_from_reader<R: Read>(reader: R, domain: DomainInterval, boundary: Boundary) -> Result<Dataset> {
    let mut samples = Vec::new();
    for (row, v) in read_values(reader)? {
        let v = match boundary {
            Boundary::Clamp if v < domain.lo() => domain.lo(),
            Boundary::Clamp if v >= domain.hi() => domain.hi().next_down(),
            _ if !domain.contains(v) => {
                return Err(HarnessError::OutOfDomain {
                    row,
                    value: v,
                    lo: domain.lo(),
                    hi: domain.hi(),
                })
            }
            _ => v,
        };
        samples.push(v);
    }
    Ok(Dataset::new(samples, domain)?)
}

/// Loads a sample file into a [`Dataset`] over `domain`.
pub fn ingest_dataset(path: &Path, domain: DomainInterval, boundary: Boundary) -> Result<Dataset> {
    let file = File::open(path).map_err(io_error(path))?;
    let d = dataset_from_reader(file, domain, boundary)?;
    if d.is_empty() {
        return Err(HarnessError::EmptyInput(path.to_path_buf()));
    }
    Ok(d)
}

/// Reads a plain vector of reals (noisy CDF values or counts).
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(io_error(path))?;
    let v: Vec<f64> = read_values(file)?.into_iter().map(|(_, v)| v).collect();
    if v.is_empty() {
        return Err(HarnessError::EmptyInput(path.to_path_buf()));
    }
    Ok(v)
}
