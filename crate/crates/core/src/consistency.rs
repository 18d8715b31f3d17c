//! Consistency post-processing.
//!
//! Given noisy cumulative counts `ĥ_1..ĥ_K` with `ĥ_K = N`, finds the integer
//! vector `0 <= h_1 <= ... <= h_K = N` closest to `ĥ` under an additive
//! metric `Σ d(h_i, ĥ_i)`. The feasible vectors are paths through a trellis
//! whose stages `1..K-1` hold the values `0..N`, with an edge `v -> v'`
//! whenever `v <= v'`. A backward pass computes the cost-to-go `α(v, i)` and
//! a forward pass follows the stored successors.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mechanisms::CdfEstimate;

/// Per-coordinate distance `d(h, ĥ)` with `h` an integer count.
#[derive(Debug, Clone, Copy)]
pub enum AdditiveMetric {
    L1,
    /// Squared difference, so the total is the squared l2 distance.
    L2Squared,
    /// `1` when the values differ, `0` otherwise.
    Hamming,
    /// Caller-supplied distance; expected to be non-negative with `d(u, u) = 0`.
    Custom(fn(f64, f64) -> f64),
}

impl AdditiveMetric {
    pub fn distance(&self, h: f64, target: f64) -> f64 {
        match self {
            AdditiveMetric::L1 => (h - target).abs(),
            AdditiveMetric::L2Squared => (h - target) * (h - target),
            AdditiveMetric::Hamming => {
                if h == target {
                    0.0
                } else {
                    1.0
                }
            }
            AdditiveMetric::Custom(d) => d(h, target),
        }
    }

    /// Total cost of `h` against `target` over all but the last coordinate.
    pub fn cost(&self, h: &[u64], target: &[f64]) -> f64 {
        let n = h.len().saturating_sub(1);
        h[..n]
            .iter()
            .zip(target)
            .map(|(&v, &t)| self.distance(v as f64, t))
            .sum()
    }
}

/// A validated instance: `ĥ` is finite and ends at `N` exactly.
#[derive(Debug, Clone)]
pub struct ConsistencyProblem {
    noisy: Vec<f64>,
    total: u64,
    metric: AdditiveMetric,
}

/// Optimal consistent counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TrellisSolution {
    pub values: Vec<u64>,
    pub cost: f64,
    /// `alpha[i][v]` is the cost-to-go from value `v` at stage `i + 1`, when requested.
    pub alpha: Option<Vec<Vec<f64>>>,
}

impl ConsistencyProblem {
    pub fn new(noisy: Vec<f64>, total: u64, metric: AdditiveMetric) -> Result<Self> {
        let last = *noisy.last().ok_or(Error::InvalidBins(0))?;
        if let Some(index) = noisy.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if last != total as f64 {
            return Err(Error::UnpinnedTotal {
                last,
                expected: total as f64,
            });
        }
        if total > u32::MAX as u64 {
            return Err(Error::InvalidParameter("total count too large for the trellis"));
        }
        Ok(Self { noisy, total, metric })
    }

    pub fn noisy(&self) -> &[f64] {
        &self.noisy
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn metric(&self) -> AdditiveMetric {
        self.metric
    }

    pub fn solve(&self) -> TrellisSolution {
        self.run(false)
    }

    /// Like [`solve`](Self::solve), also returning the full cost-to-go table.
    pub fn solve_with_alpha(&self) -> TrellisSolution {
        self.run(true)
    }

    fn run(&self, keep_alpha: bool) -> TrellisSolution {
        let k = self.noisy.len();
        let n = self.total as usize;
        if k == 1 {
            return TrellisSolution {
                values: vec![self.total],
                cost: 0.0,
                alpha: keep_alpha.then(Vec::new),
            };
        }
        let stages = k - 1;
        let mut table: Vec<Vec<f64>> = Vec::new();
        // next[i][v]: successor value chosen from v at stage i + 1
        let mut next: Vec<Vec<u32>> = vec![Vec::new(); stages.saturating_sub(1)];

        let d = |v: usize, i: usize| self.metric.distance(v as f64, self.noisy[i]);
        let mut alpha: Vec<f64> = (0..=n).map(|v| d(v, stages - 1)).collect();
        if keep_alpha {
            table.push(alpha.clone());
        }
        for i in (0..stages - 1).rev() {
            let mut ptr = vec![0u32; n + 1];
            let mut cur = vec![0.0; n + 1];
            let (mut best, mut arg) = (f64::INFINITY, n);
            for v in (0..=n).rev() {
                // `<=` so that the smallest successor wins ties
                if alpha[v] <= best {
                    best = alpha[v];
                    arg = v;
                }
                ptr[v] = arg as u32;
                cur[v] = d(v, i) + best;
            }
            next[i] = ptr;
            alpha = cur;
            if keep_alpha {
                table.push(alpha.clone());
            }
        }

        let mut h = 0usize;
        for v in 1..=n {
            if alpha[v] < alpha[h] {
                h = v;
            }
        }
        let cost = alpha[h];
        let mut values = Vec::with_capacity(k);
        values.push(h as u64);
        for ptr in &next {
            h = ptr[h] as usize;
            values.push(h as u64);
        }
        values.push(self.total);
        if keep_alpha {
            table.reverse();
        }
        TrellisSolution {
            values,
            cost,
            alpha: keep_alpha.then_some(table),
        }
    }
}

/// Closest consistent integer counts to `noisy` under `metric`.
pub fn consistent_fit(noisy: &[f64], total: u64, metric: AdditiveMetric) -> Result<TrellisSolution> {
    Ok(ConsistencyProblem::new(noisy.to_vec(), total, metric)?.solve())
}

/// Consistent CDF: scales by `N`, fits counts, scales back. The last
/// coordinate of `noisy` must be exactly 1.
pub fn consistent_cdf(noisy: &CdfEstimate, metric: AdditiveMetric) -> Result<CdfEstimate> {
    let values = noisy.values();
    let last = *values.last().ok_or(Error::InvalidBins(0))?;
    if last != 1.0 {
        return Err(Error::UnpinnedTotal { last, expected: 1.0 });
    }
    let total = noisy.total();
    let n = total as f64;
    let mut counts: Vec<f64> = values.iter().map(|&x| x * n).collect();
    *counts.last_mut().expect("non-empty") = n;
    let sol = consistent_fit(&counts, total, metric)?;
    let out = sol.values.iter().map(|&h| h as f64 / n).collect();
    Ok(CdfEstimate::new(out, total))
}
