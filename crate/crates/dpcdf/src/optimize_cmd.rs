use dpcdf_core::error_model::{e2_opt_beta, e2_tree};
use dpcdf_core::optimizer::{
    exhaustive_search, opt_beta_int, opt_beta_real, opt_height, prime_power, prime_power_tree,
    smallest_prime_power_at_least,
};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Prime-power allocation, rounding the bin count up to a prime power when needed.
    #[default]
    Auto,
    /// Search over every factorization of the bin count itself.
    Exhaustive,
    /// Real-relaxed optimum with a common branching factor.
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub strategy: Strategy,
    pub requested_bins: u64,
    /// Bin count the tree is built for.
    pub bins: u64,
    pub rounded: bool,
    pub branching: Vec<f64>,
    pub budgets: Vec<f64>,
    pub height: usize,
    pub samples: u64,
    pub predicted_e2: f64,
    /// Root-based height bounds (prime-power path).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height_bounds: Option<(u32, u32)>,
    /// Factorizations evaluated (exhaustive path).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<usize>,
    /// Real and integer optimal common branching factors (real path).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_star: Option<(f64, u64)>,
}

pub fn optimize_cmd(bins: u64, epsilon: f64, samples: u64, strategy: Strategy, refine_budgets: bool) -> Result<OptimizeReport> {
    let report = match strategy {
        Strategy::Auto => {
            let (kbar, rounded) = match prime_power(bins) {
                Some(_) => (bins, false),
                None => (smallest_prime_power_at_least(bins)?.2, true),
            };
            let spec = prime_power_tree(kbar, epsilon)?;
            let bounds = opt_height(kbar)?;
            OptimizeReport {
                strategy,
                requested_bins: bins,
                bins: kbar,
                rounded,
                branching: spec.shape().branching().iter().map(|&n| n as f64).collect(),
                budgets: spec.budgets().to_vec(),
                height: spec.shape().height(),
                samples,
                predicted_e2: e2_tree(&spec, samples)?,
                height_bounds: Some((bounds.lower, bounds.upper)),
                candidates: None,
                beta_star: None,
            }
        }
        Strategy::Exhaustive => {
            let r = exhaustive_search(bins, epsilon, refine_budgets)?;
            OptimizeReport {
                strategy,
                requested_bins: bins,
                bins,
                rounded: false,
                branching: r.spec.shape().branching().iter().map(|&n| n as f64).collect(),
                budgets: r.spec.budgets().to_vec(),
                height: r.spec.shape().height(),
                samples,
                predicted_e2: e2_tree(&r.spec, samples)?,
                height_bounds: None,
                candidates: Some(r.candidates),
                beta_star: None,
            }
        }
        Strategy::Real => {
            let beta = opt_beta_real();
            let k = bins as f64;
            // real height log_β K, rounded to the nearest level count
            let height = ((k.ln() / beta.ln()).round() as usize).max(1);
            let b = k.powf(1.0 / height as f64);
            OptimizeReport {
                strategy,
                requested_bins: bins,
                bins,
                rounded: false,
                branching: vec![b; height],
                budgets: vec![epsilon / height as f64; height],
                height,
                samples,
                predicted_e2: e2_opt_beta(bins, b, samples, epsilon)?,
                height_bounds: None,
                candidates: None,
                beta_star: Some((beta, opt_beta_int())),
            }
        }
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_gives_flat_tree() {
        let r = optimize_cmd(997, 0.1, 900, Strategy::Auto, false).unwrap();
        assert_eq!(r.branching, vec![997.0]);
        assert_eq!(r.height, 1);
        assert!(!r.rounded);
    }

    #[test]
    fn large_power_of_two() {
        let r = optimize_cmd(1 << 20, 1.0, 1, Strategy::Auto, false).unwrap();
        assert!(r.height == 4 || r.height == 5);
        assert_eq!(r.height_bounds, Some((4, 5)));
    }

    #[test]
    fn rounding_reported() {
        let r = optimize_cmd(1000, 1.0, 1, Strategy::Auto, false).unwrap();
        assert!(r.rounded);
        assert_eq!(r.bins, 1009);
        let r = optimize_cmd(1000, 1.0, 1, Strategy::Exhaustive, false).unwrap();
        assert_eq!(r.bins, 1000);
        assert_eq!(r.branching.iter().product::<f64>(), 1000.0);
    }

    #[test]
    fn real_relaxation() {
        let r = optimize_cmd(17u64.pow(3), 1.0, 1, Strategy::Real, false).unwrap();
        assert_eq!(r.height, 3);
        assert!((r.branching.iter().product::<f64>() / 4913.0 - 1.0).abs() < 1e-9);
    }
}
