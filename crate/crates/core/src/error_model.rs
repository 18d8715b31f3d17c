//! Closed-form expected squared l2 errors `E_2` of the released CDFs.
//!
//! Every evaluator is homogeneous of degree -2 in both `N` and `ε`.
//! Tree evaluators accept real branching factors so they can be used on the
//! relaxed problem as well as on integer trees.

use crate::error::{Error, Result};
use crate::mechanisms::TreeSpec;

fn check(bins: f64, samples: f64, epsilon: f64) -> Result<()> {
    if !(bins >= 2.0 && bins.is_finite()) {
        return Err(Error::InvalidParameter("number of bins must be at least 2"));
    }
    if !(samples >= 1.0 && samples.is_finite()) {
        return Err(Error::InvalidParameter("sample count must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// Range-query mechanism: `2 (K-1)^3 / (N^2 ε^2)`.
pub fn e2_ind(bins: u64, samples: u64, epsilon: f64) -> Result<f64> {
    let (k, n) = (bins as f64, samples as f64);
    check(k, n, epsilon)?;
    let d = k - 1.0;
    Ok(2.0 * d * d * d / (n * n * epsilon * epsilon))
}

/// Histogram mechanism: `4 K (K-1) / (N^2 ε^2)`.
pub fn e2_hist(bins: u64, samples: u64, epsilon: f64) -> Result<f64> {
    let (k, n) = (bins as f64, samples as f64);
    check(k, n, epsilon)?;
    Ok(4.0 * k * (k - 1.0) / (n * n * epsilon * epsilon))
}

/// Level-uniform tree: `(4 K / N^2) Σ (n_i - 1) / ε_i^2` with `K = Π n_i`.
pub fn e2_tree_real(branching: &[f64], budgets: &[f64], samples: u64) -> Result<f64> {
    if branching.is_empty() || branching.len() != budgets.len() {
        return Err(Error::BudgetMismatch {
            height: branching.len(),
            budgets: budgets.len(),
        });
    }
    if branching.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::InvalidParameter("branching factors must be positive"));
    }
    if let Some(&e) = budgets.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidEpsilon(e));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1"));
    }
    let k: f64 = branching.iter().product();
    let n = samples as f64;
    let s: f64 = branching.iter().zip(budgets).map(|(&b, &e)| (b - 1.0) / (e * e)).sum();
    Ok(4.0 * k / (n * n) * s)
}

pub fn e2_tree(spec: &TreeSpec, samples: u64) -> Result<f64> {
    let branching: alloc::vec::Vec<f64> = spec.shape().branching().iter().map(|&b| b as f64).collect();
    e2_tree_real(&branching, spec.budgets(), samples)
}

/// Optimal error over trees of height `m - 1` with equal branching
/// `β = K^{1/(m-1)}` and equal budgets: `4 K (m-1)^3 (β - 1) / (N^2 ε^2)`.
///
/// Optimality of the equal split is only established for `β >= 3`; the
/// formula is returned for any `β >= 2` regardless.
pub fn e2_opt(bins: u64, m: u32, samples: u64, epsilon: f64) -> Result<f64> {
    let (k, n) = (bins as f64, samples as f64);
    check(k, n, epsilon)?;
    if m < 2 {
        return Err(Error::InvalidParameter("m must be at least 2"));
    }
    let h = (m - 1) as f64;
    let beta = libm::pow(k, 1.0 / h);
    Ok(4.0 * k * h * h * h * (beta - 1.0) / (n * n * epsilon * epsilon))
}

/// The same optimum written through `f(β) = (β-1)/(log β)^3`:
/// `4 K (log K)^3 f(β) / (N^2 ε^2)`.
pub fn e2_opt_beta(bins: u64, beta: f64, samples: u64, epsilon: f64) -> Result<f64> {
    let (k, n) = (bins as f64, samples as f64);
    check(k, n, epsilon)?;
    if !(beta > 1.0) {
        return Err(Error::InvalidParameter("beta must exceed 1"));
    }
    let lk = libm::log(k);
    Ok(4.0 * k * lk * lk * lk * beta_objective(beta) / (n * n * epsilon * epsilon))
}

/// `f(β) = (β - 1) / (log β)^3`.
pub fn beta_objective(beta: f64) -> f64 {
    let l = libm::log(beta);
    (beta - 1.0) / (l * l * l)
}

/// Error after bottom-up refinement and left/right averaging on an equal
/// tree with branching `β`, height `m - 1` and per-level budget `ε̂`:
/// `(2K/N^2) ((β-1)/ε̂^2) Σ_{i=1}^{m-1} (Σ_{j=0}^{m-1-i} β^{-j})^{-1}`.
pub fn e2_refined(beta: u64, m: u32, level_epsilon: f64, bins: u64, samples: u64) -> Result<f64> {
    let (k, n) = (bins as f64, samples as f64);
    check(k, n, level_epsilon)?;
    if beta < 2 || m < 2 {
        return Err(Error::InvalidParameter("refinement needs beta >= 2 and m >= 2"));
    }
    let b = beta as f64;
    let mut total = 0.0;
    for i in 1..m {
        let inner: f64 = (0..=(m - 1 - i)).map(|j| libm::pow(b, -(j as f64))).sum();
        total += 1.0 / inner;
    }
    Ok(2.0 * k / (n * n) * (b - 1.0) / (level_epsilon * level_epsilon) * total)
}

/// Variance of a refined node at `level` (1-based) of an equal tree:
/// `(Σ_{j=0}^{m-1-level} β^{-j})^{-1} · 8/ε̂^2`.
pub fn refined_level_variance(beta: f64, height: usize, level: usize, level_epsilon: f64) -> f64 {
    let inner: f64 = (0..=(height - level)).map(|j| libm::pow(beta, -(j as f64))).sum();
    8.0 / (level_epsilon * level_epsilon) / inner
}

/// Inputs shared by the flat evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorQuery {
    pub bins: u64,
    pub samples: u64,
    pub epsilon: f64,
}

impl ErrorQuery {
    pub fn new(bins: u64, samples: u64, epsilon: f64) -> Result<Self> {
        check(bins as f64, samples as f64, epsilon)?;
        Ok(Self { bins, samples, epsilon })
    }

    pub fn ind(&self) -> f64 {
        e2_ind(self.bins, self.samples, self.epsilon).expect("validated")
    }

    pub fn hist(&self) -> f64 {
        e2_hist(self.bins, self.samples, self.epsilon).expect("validated")
    }

    pub fn opt(&self, m: u32) -> Result<f64> {
        e2_opt(self.bins, m, self.samples, self.epsilon)
    }
}
