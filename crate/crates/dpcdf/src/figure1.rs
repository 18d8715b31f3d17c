//! Error curves over a budget grid at 256 bins: range queries, histogram,
//! binary tree, 16-ary tree and the refined 16-ary tree. Errors are
//! multiplied by `N^2`.

use dpcdf_core::error_model::{e2_hist, e2_ind, e2_refined, e2_tree};
use dpcdf_core::mechanisms::TreeSpec;
use dpcdf_core::tree::TreeShape;

use crate::config::{ExperimentConfig, MechanismKind};
use crate::error::Result;
use crate::experiment::run_experiment;
use crate::report::CurvePoint;

pub const BINS: usize = 256;

pub fn default_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 * 0.1).collect()
}

/// `(label, mechanism, branching, refine)` for every curve.
fn curves() -> [(&'static str, MechanismKind, Option<Vec<usize>>, bool); 5] {
    [
        ("ind", MechanismKind::Ind, None, false),
        ("hist", MechanismKind::Hist, None, false),
        ("tree-binary", MechanismKind::Tree, Some(vec![2; 8]), false),
        ("tree-16ary", MechanismKind::Tree, Some(vec![16, 16]), false),
        ("tree-16ary-refined", MechanismKind::Tree, Some(vec![16, 16]), true),
    ]
}

fn closed_form(label: &str, epsilon: f64) -> Result<f64> {
    let k = BINS as u64;
    Ok(match label {
        "ind" => e2_ind(k, 1, epsilon)?,
        "hist" => e2_hist(k, 1, epsilon)?,
        "tree-binary" => e2_tree(&TreeSpec::equal(TreeShape::new(&[2; 8])?, epsilon)?, 1)?,
        "tree-16ary" => e2_tree(&TreeSpec::equal(TreeShape::new(&[16, 16])?, epsilon)?, 1)?,
        "tree-16ary-refined" => e2_refined(16, 3, epsilon / 2.0, k, 1)?,
        _ => unreachable!("unknown curve {label}"),
    })
}

/// Closed-form curves; with `trials`, also Monte Carlo estimates from
/// `samples` uniform samples per trial (rescaled by `N^2`).
pub fn figure1(grid: &[f64], trials: Option<u64>, samples: usize, seed: u64) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    for (label, mech, branching, refine) in curves() {
        let empirical = match trials {
            Some(t) => {
                let mut c = ExperimentConfig::new(mech, BINS, grid.to_vec());
                c.branching = branching;
                c.refine = refine;
                c.trials = t;
                c.samples = samples;
                c.seed = seed;
                let r = run_experiment(&c)?;
                let row_label = if refine { "tree+refined" } else { mech.label() };
                let n2 = (samples * samples) as f64;
                grid.iter()
                    .map(|&e| {
                        let row = r.row(e, row_label).expect("row per grid point");
                        Some((row.e2_empirical * n2, row.e2_stderr * n2))
                    })
                    .collect()
            }
            None => vec![None; grid.len()],
        };
        for (&epsilon, emp) in grid.iter().zip(empirical) {
            out.push(CurvePoint {
                epsilon,
                mechanism: label.to_string(),
                e2_closed_form: Some(closed_form(label, epsilon)?),
                e2_empirical: emp.map(|x| x.0),
                stderr: emp.map(|x| x.1),
            });
        }
    }
    Ok(out)
}
