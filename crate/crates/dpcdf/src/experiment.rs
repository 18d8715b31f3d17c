//! Seeded Monte Carlo runs of a mechanism and its post-processed variants.
//!
//! Trial `t` at grid point `e` draws its noise from stream `(e << 40) | t` of
//! the configured seed, and its synthetic data from stream `t` of a derived
//! seed, so every trial is independent of scheduling. Trials run in parallel
//! and are reduced in trial order, which keeps reports byte-identical.

use dpcdf_core::consistency::consistent_cdf;
use dpcdf_core::error_model::{e2_hist, e2_ind, e2_refined, e2_tree};
use dpcdf_core::mechanisms::{mech_histogram, mech_range_query, mech_tree, CdfEstimate, RngSeed, TreeSpec};
use dpcdf_core::refinement::{refine_bottom_up, refined_cdf};
use dpcdf_core::tree::{Dataset, DomainInterval};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, FitMetric, MechanismKind};
use crate::error::Result;
use crate::ingest::{ingest_dataset, Boundary};

const DATA_SEED_SALT: u64 = 0x5851_f42d_4c95_7f2d;

/// Aggregates for one (budget, estimator) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub epsilon: f64,
    pub mechanism: String,
    /// Predicted `E_2`, where a closed form exists.
    pub e2_closed_form: Option<f64>,
    /// Mean of `||F - F̂||_2^2`.
    pub e2_empirical: f64,
    pub e2_stderr: f64,
    pub l1_mean: f64,
    pub l1_stderr: f64,
    pub l2_mean: f64,
    pub l2_stderr: f64,
    /// Trials where this estimator beat the raw one in l1 / l2 (post-processed rows only).
    pub wins_l1: Option<u64>,
    pub wins_l2: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub bins: usize,
    pub samples: usize,
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
}

impl ErrorReport {
    pub fn row(&self, epsilon: f64, mechanism: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.epsilon == epsilon && r.mechanism == mechanism)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Errors {
    l1: f64,
    l2: f64,
    sq: f64,
}

fn errors(truth: &[f64], est: &[f64]) -> Errors {
    let mut e = Errors::default();
    for (f, g) in truth.iter().zip(est) {
        let d = f - g;
        e.l1 += d.abs();
        e.sq += d * d;
    }
    e.l2 = e.sq.sqrt();
    e
}

#[derive(Default)]
struct Moments {
    n: f64,
    sum: f64,
    sum2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sum2 += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n
    }

    /// Standard error of the mean (sample variance with `n - 1`).
    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        let m = self.mean();
        let var = ((self.sum2 - self.n * m * m) / (self.n - 1.0)).max(0.0);
        (var / self.n).sqrt()
    }
}

/// Estimator labels in report order.
pub fn variant_labels(config: &ExperimentConfig) -> Vec<String> {
    let base = config.mechanism.label();
    let mut out = vec![base.to_string()];
    if config.refine {
        out.push(format!("{base}+refined"));
    }
    let post = if config.refine { format!("{base}+refined") } else { base.to_string() };
    for m in &config.consist {
        out.push(format!("{post}+consistent-{}", m.label()));
    }
    out
}

/// Uniform samples on `domain`, as in the synthetic setting of the experiment.
pub fn synthetic_dataset(domain: DomainInterval, samples: usize, seed: u64, stream: u64) -> Result<Dataset> {
    let mut rng = RngSeed::new(seed ^ DATA_SEED_SALT, stream).rng();
    let xs = (0..samples).map(|_| rng.random_range(domain.lo()..domain.hi())).collect();
    Ok(Dataset::new(xs, domain)?)
}

fn release(config: &ExperimentConfig, spec: Option<&TreeSpec>, data: &Dataset, epsilon: f64, seed: RngSeed) -> Result<Vec<CdfEstimate>> {
    let bins = config.bins()?;
    let mut noise = seed.laplace();
    let mut out = Vec::new();
    let best = match config.mechanism {
        MechanismKind::Ind => {
            out.push(mech_range_query(data, bins, epsilon, &mut noise)?);
            0
        }
        MechanismKind::Hist => {
            out.push(mech_histogram(data, bins, epsilon, &mut noise)?);
            0
        }
        MechanismKind::Tree => {
            let spec = spec.expect("tree spec prepared");
            let (tree, cdf) = mech_tree(data, spec, &mut noise)?;
            out.push(cdf);
            if config.refine {
                out.push(refined_cdf(&refine_bottom_up(&tree, spec)?).to_cdf());
            }
            out.len() - 1
        }
    };
    for m in &config.consist {
        out.push(consistent_cdf(&out[best], m.additive())?);
    }
    Ok(out)
}

fn closed_forms(config: &ExperimentConfig, spec: Option<&TreeSpec>, epsilon: f64, samples: usize) -> Result<Vec<Option<f64>>> {
    let k = config.bins()? as u64;
    let n = samples as u64;
    let mut out = vec![Some(match config.mechanism {
        MechanismKind::Ind => e2_ind(k, n, epsilon)?,
        MechanismKind::Hist => e2_hist(k, n, epsilon)?,
        MechanismKind::Tree => e2_tree(spec.expect("tree spec prepared"), n)?,
    })];
    if config.refine {
        let spec = spec.expect("tree spec prepared");
        let beta = spec.shape().branching()[0] as u64;
        let m = spec.shape().height() as u32 + 1;
        out.push(Some(e2_refined(beta, m, spec.budgets()[0], k, n)?));
    }
    out.extend(config.consist.iter().map(|_| None));
    Ok(out)
}

/// Runs every trial of `config` and aggregates the errors against the true CDF.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ErrorReport> {
    config.validate()?;
    let bins = config.bins()?;
    let domain = config.domain()?;
    let fixed = match &config.data {
        Some(p) => Some(ingest_dataset(p, domain, Boundary::Reject)?),
        None => None,
    };
    let samples = fixed.as_ref().map_or(config.samples, |d| d.len());
    let labels = variant_labels(config);
    let mut rows = Vec::new();

    for (ei, &epsilon) in config.epsilons.iter().enumerate() {
        let spec = match config.mechanism {
            MechanismKind::Tree => Some(config.tree_spec(epsilon)?),
            _ => None,
        };
        let per_trial: Vec<Vec<Errors>> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let synth;
                let data = match &fixed {
                    Some(d) => d,
                    None => {
                        synth = synthetic_dataset(domain, samples, config.seed, t)?;
                        &synth
                    }
                };
                let truth = CdfEstimate::exact(data, bins)?;
                let noise = RngSeed::new(config.seed, ((ei as u64) << 40) | t);
                let outs = release(config, spec.as_ref(), data, epsilon, noise)?;
                Ok(outs.iter().map(|o| errors(truth.values(), o.values())).collect())
            })
            .collect::<Result<_>>()?;

        let closed = closed_forms(config, spec.as_ref(), epsilon, samples)?;
        for (vi, label) in labels.iter().enumerate() {
            let (mut l1, mut l2, mut sq) = (Moments::default(), Moments::default(), Moments::default());
            let (mut w1, mut w2) = (0u64, 0u64);
            for trial in &per_trial {
                let e = trial[vi];
                l1.push(e.l1);
                l2.push(e.l2);
                sq.push(e.sq);
                w1 += u64::from(e.l1 < trial[0].l1);
                w2 += u64::from(e.l2 < trial[0].l2);
            }
            rows.push(ReportRow {
                epsilon,
                mechanism: label.clone(),
                e2_closed_form: closed[vi],
                e2_empirical: sq.mean(),
                e2_stderr: sq.stderr(),
                l1_mean: l1.mean(),
                l1_stderr: l1.stderr(),
                l2_mean: l2.mean(),
                l2_stderr: l2.stderr(),
                wins_l1: (vi > 0).then_some(w1),
                wins_l2: (vi > 0).then_some(w2),
            });
        }
    }
    Ok(ErrorReport {
        bins,
        samples,
        trials: config.trials,
        seed: config.seed,
        rows,
    })
}

/// The consistency study: 997 bins, 900 uniform samples on `[0, 997)`, flat
/// tree at `ε = 0.1`, with l1 and l2 consistency fits.
pub fn consistency_study(trials: u64, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(MechanismKind::Tree, 997, vec![0.1]);
    c.samples = 900;
    c.trials = trials;
    c.seed = seed;
    c.consist = vec![FitMetric::L1, FitMetric::L2];
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        let mut c = ExperimentConfig::new(MechanismKind::Tree, 16, vec![1.0]);
        c.branching = Some(vec![4, 4]);
        c.refine = true;
        c.consist = vec![FitMetric::L1];
        assert_eq!(variant_labels(&c), vec!["tree", "tree+refined", "tree+refined+consistent-l1"]);
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.stderr() - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let mut c = ExperimentConfig::new(MechanismKind::Hist, 32, vec![0.5, 1.0]);
        c.trials = 50;
        c.samples = 200;
        c.seed = 17;
        c.consist = vec![FitMetric::L2];
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.rows.len(), 4);
        c.seed = 18;
        assert_ne!(run_experiment(&c).unwrap(), a);
    }

    #[test]
    fn synthetic_in_domain() {
        let d = DomainInterval::new(-2.0, 3.0).unwrap();
        let ds = synthetic_dataset(d, 1000, 1, 2).unwrap();
        assert_eq!(ds.len(), 1000);
        assert_eq!(ds.samples(), synthetic_dataset(d, 1000, 1, 2).unwrap().samples());
        assert_ne!(ds.samples(), synthetic_dataset(d, 1000, 1, 3).unwrap().samples());
    }
}
