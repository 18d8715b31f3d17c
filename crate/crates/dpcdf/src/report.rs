use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiment::ErrorReport;

/// One point of an error curve, the CSV row format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub mechanism: String,
    pub e2_closed_form: Option<f64>,
    pub e2_empirical: Option<f64>,
    pub stderr: Option<f64>,
}

impl From<&ErrorReport> for Vec<CurvePoint> {
    fn from(r: &ErrorReport) -> Self {
        r.rows
            .iter()
            .map(|row| CurvePoint {
                epsilon: row.epsilon,
                mechanism: row.mechanism.clone(),
                e2_closed_form: row.e2_closed_form,
                e2_empirical: Some(row.e2_empirical),
                stderr: Some(row.e2_stderr),
            })
            .collect()
    }
}

/// Writes `epsilon,mechanism,e2_closed_form,e2_empirical,stderr` rows;
/// missing values are left empty.
pub fn write_curve_csv<W: Write>(points: &[CurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").map_err(|e| crate::error::HarnessError::Json(serde_json::Error::io(e)))?;
    Ok(())
}
