use std::fs;
use std::path::{Path, PathBuf};

use dpcdf_core::consistency::AdditiveMetric;
use dpcdf_core::mechanisms::TreeSpec;
use dpcdf_core::tree::{DomainInterval, TreeShape};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    /// Independent noise on every cumulative count.
    Ind,
    /// Noisy histogram, prefix-summed.
    Hist,
    /// Level-uniform tree.
    Tree,
}

impl MechanismKind {
    pub fn label(self) -> &'static str {
        match self {
            MechanismKind::Ind => "ind",
            MechanismKind::Hist => "hist",
            MechanismKind::Tree => "tree",
        }
    }
}

/// Metric used for consistency post-processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMetric {
    L1,
    L2,
    Hamming,
}

impl FitMetric {
    pub fn additive(self) -> AdditiveMetric {
        match self {
            FitMetric::L1 => AdditiveMetric::L1,
            FitMetric::L2 => AdditiveMetric::L2Squared,
            FitMetric::Hamming => AdditiveMetric::Hamming,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FitMetric::L1 => "l1",
            FitMetric::L2 => "l2",
            FitMetric::Hamming => "hamming",
        }
    }
}

/// One Monte Carlo experiment: a mechanism swept over a grid of budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mechanism: MechanismKind,
    /// Number of bins; may be omitted for trees when `branching` is given.
    #[serde(default)]
    pub bins: Option<usize>,
    /// Tree branching factors; defaults to a flat tree over `bins`.
    #[serde(default)]
    pub branching: Option<Vec<usize>>,
    /// Per-level budget fractions (normalized to sum to 1); equal split if absent.
    #[serde(default)]
    pub budget_split: Option<Vec<f64>>,
    pub epsilons: Vec<f64>,
    /// Synthetic sample count; ignored when `data` is set.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Bottom-up refinement with left/right averaging (equal trees only).
    #[serde(default)]
    pub refine: bool,
    /// Consistency fits to report next to the raw estimate.
    #[serde(default)]
    pub consist: Vec<FitMetric>,
    /// Data domain `[a, b)`; defaults to `[0, bins)`.
    #[serde(default)]
    pub domain: Option<(f64, f64)>,
    /// Fixed dataset instead of fresh uniform samples per trial.
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_samples() -> usize {
    1000
}

fn default_trials() -> u64 {
    100
}

impl ExperimentConfig {
    pub fn new(mechanism: MechanismKind, bins: usize, epsilons: Vec<f64>) -> Self {
        Self {
            mechanism,
            bins: Some(bins),
            branching: None,
            budget_split: None,
            epsilons,
            samples: default_samples(),
            trials: default_trials(),
            seed: 0,
            refine: false,
            consist: Vec::new(),
            domain: None,
            data: None,
            output: None,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_error(path))?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.epsilons.is_empty() {
            return bad("epsilon grid is empty");
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return bad("epsilon grid must be strictly positive");
        }
        if self.data.is_none() && self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if self.refine && self.mechanism != MechanismKind::Tree {
            return bad("refinement applies to the tree mechanism only");
        }
        if self.mechanism != MechanismKind::Tree && (self.branching.is_some() || self.budget_split.is_some()) {
            return bad("branching and budget_split apply to the tree mechanism only");
        }
        let bins = self.bins()?;
        if bins < 2 {
            return bad("at least 2 bins are required");
        }
        if let Some(b) = &self.branching {
            let shape = TreeShape::new(b)?;
            if shape.leaf_count() != bins {
                return bad("product of branching factors must equal bins");
            }
            if let Some(s) = &self.budget_split {
                if s.len() != b.len() {
                    return bad("budget_split needs one entry per tree level");
                }
            }
        }
        if let Some(s) = &self.budget_split {
            if s.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return bad("budget_split entries must be positive");
            }
        }
        self.domain()?;
        Ok(())
    }

    pub fn bins(&self) -> Result<usize> {
        match (self.bins, &self.branching) {
            (Some(k), _) => Ok(k),
            (None, Some(b)) => Ok(b.iter().product()),
            (None, None) => Err(HarnessError::Config("either bins or branching is required".into())),
        }
    }

    pub fn domain(&self) -> Result<DomainInterval> {
        let (a, b) = match self.domain {
            Some(d) => d,
            None => (0.0, self.bins()? as f64),
        };
        Ok(DomainInterval::new(a, b)?)
    }

    /// Tree spec for total budget `epsilon`.
    pub fn tree_spec(&self, epsilon: f64) -> Result<TreeSpec> {
        let branching = match &self.branching {
            Some(b) => b.clone(),
            None => vec![self.bins()?],
        };
        let shape = TreeShape::new(&branching)?;
        Ok(match &self.budget_split {
            None => TreeSpec::equal(shape, epsilon)?,
            Some(s) => {
                let total: f64 = s.iter().sum();
                TreeSpec::new(shape, s.iter().map(|x| epsilon * x / total).collect())?
            }
        })
    }
}
