//! ε-DP CDF mechanisms built on Laplace noise.
//!
//! All three mechanisms pin the last coordinate of the released CDF to 1
//! since `N` is public. Noise is drawn breadth-first and lexicographically
//! within a level, from a single [`NoiseSource`] per run.

use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::tree::{exact_counts, left_cumulative, CountVector, Dataset, NodePath, NodeValues, TreeShape};

/// Seed plus stream id; equal pairs give identical noise sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    pub fn laplace(&self) -> LaplaceNoise<ChaCha20Rng> {
        LaplaceNoise::new(self.rng())
    }
}

/// Source of zero-mean Laplace noise.
pub trait NoiseSource {
    /// One draw from `Lap(scale)`; `scale` is positive.
    fn laplace(&mut self, scale: f64) -> f64;
}

/// Inverse-CDF Laplace sampler over any RNG.
#[derive(Debug, Clone)]
pub struct LaplaceNoise<R> {
    rng: R,
}

impl<R: RngCore> LaplaceNoise<R> {
    pub fn new(rng: R) -> Self {
        Self { rng }
    }

    pub fn into_inner(self) -> R {
        self.rng
    }
}

impl<R: RngCore> NoiseSource for LaplaceNoise<R> {
    fn laplace(&mut self, scale: f64) -> f64 {
        laplace_from_uniform(open_unit(&mut self.rng), scale)
    }
}

/// Deterministic zero noise, the ε → ∞ limit. For testing only: a mechanism
/// run with it is not private.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoNoise;

impl NoiseSource for NoNoise {
    fn laplace(&mut self, _scale: f64) -> f64 {
        0.0
    }
}

// Uniform on the open interval (0, 1): midpoints of a 2^-53 grid.
fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Inverse CDF of `Lap(scale)` evaluated at `u ∈ (0, 1)`.
pub fn laplace_from_uniform(u: f64, scale: f64) -> f64 {
    if u < 0.5 {
        scale * libm::log(2.0 * u)
    } else {
        -scale * libm::log(2.0 * (1.0 - u))
    }
}

/// One `Lap(scale)` draw from `rng`.
pub fn laplace_sample<R: RngCore>(scale: f64, rng: &mut R) -> Result<f64> {
    check_positive(scale)?;
    Ok(laplace_from_uniform(open_unit(rng), scale))
}

fn check_positive(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(x))
    }
}

/// Released (possibly noisy) CDF over `bins()` equal-width bins.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfEstimate {
    values: Vec<f64>,
    total: u64,
}

impl CdfEstimate {
    pub fn new(values: Vec<f64>, total: u64) -> Self {
        Self { values, total }
    }

    /// Exact CDF `F = c̄ / N`.
    pub fn exact(dataset: &Dataset, bins: usize) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = dataset.len() as f64;
        let values = dataset.cumulative_counts(bins).into_iter().map(|c| c as f64 / n).collect();
        Ok(Self::new(values, dataset.len() as u64))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn bins(&self) -> usize {
        self.values.len()
    }

    /// Sample count `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Values scaled back to cumulative counts.
    pub fn counts(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.values.iter().map(|v| v * n).collect()
    }
}

/// Tree shape plus per-level privacy budgets `ε_1..ε_{m-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSpec {
    shape: TreeShape,
    budgets: Vec<f64>,
    epsilon: f64,
}

impl TreeSpec {
    pub fn new(shape: TreeShape, budgets: Vec<f64>) -> Result<Self> {
        if budgets.len() != shape.height() {
            return Err(Error::BudgetMismatch {
                height: shape.height(),
                budgets: budgets.len(),
            });
        }
        for &e in &budgets {
            check_positive(e)?;
        }
        let epsilon = budgets.iter().sum();
        Ok(Self {
            shape,
            budgets,
            epsilon,
        })
    }

    /// Equal budgets `ε / height` on every level.
    pub fn equal(shape: TreeShape, epsilon: f64) -> Result<Self> {
        check_positive(epsilon)?;
        let h = shape.height();
        Self::new(shape, alloc::vec![epsilon / h as f64; h])
    }

    pub fn shape(&self) -> &TreeShape {
        &self.shape
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    /// Total budget `Σ ε_i`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Laplace scale `2 / ε_i` used for nodes at `level` (1-based).
    pub fn noise_scale(&self, level: usize) -> f64 {
        2.0 / self.budgets[level - 1]
    }
}

/// Noisy counts `M^Lap_χ(v)` for every node; the root holds `N` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyTree {
    values: NodeValues<f64>,
    total: u64,
}

impl NoisyTree {
    /// Wraps externally computed node values; the root is overwritten with `total`.
    pub fn from_values(mut values: NodeValues<f64>, total: u64) -> Self {
        values.level_mut(0)[0] = total as f64;
        Self { values, total }
    }

    pub fn values(&self) -> &NodeValues<f64> {
        &self.values
    }

    pub fn shape(&self) -> &TreeShape {
        self.values.shape()
    }

    pub fn get(&self, path: &NodePath) -> Option<f64> {
        self.values.get(path).copied()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Cumulative leaf estimates summed over coverings, normalized by `N`.
    pub fn cdf(&self) -> CdfEstimate {
        let n = self.total as f64;
        let values = left_cumulative(&self.values).into_iter().map(|c| c / n).collect();
        CdfEstimate::new(values, self.total)
    }
}

fn check_bins(bins: usize) -> Result<()> {
    if bins < 2 {
        return Err(Error::InvalidBins(bins as u64));
    }
    Ok(())
}

/// Range-query mechanism `F^ind` from exact cumulative counts: coordinates
/// `1..K-1` get independent `Lap((K-1)/ε)` noise, coordinate `K` is 1.
pub fn range_query_from_cumulative<N: NoiseSource>(
    cumulative: &[u64],
    epsilon: f64,
    noise: &mut N,
) -> Result<CdfEstimate> {
    let bins = cumulative.len();
    check_bins(bins)?;
    check_positive(epsilon)?;
    let total = cumulative[bins - 1];
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let scale = (bins - 1) as f64 / epsilon;
    let n = total as f64;
    let mut values: Vec<f64> = cumulative[..bins - 1]
        .iter()
        .map(|&c| (c as f64 + noise.laplace(scale)) / n)
        .collect();
    values.push(1.0);
    Ok(CdfEstimate::new(values, total))
}

pub fn mech_range_query<N: NoiseSource>(
    dataset: &Dataset,
    bins: usize,
    epsilon: f64,
    noise: &mut N,
) -> Result<CdfEstimate> {
    check_bins(bins)?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    range_query_from_cumulative(&dataset.cumulative_counts(bins), epsilon, noise)
}

/// Histogram mechanism `F^hist` from exact bin counts: bins `1..K-1` get
/// `Lap(2/ε)` noise and are prefix-summed, coordinate `K` is 1.
pub fn histogram_from_counts<N: NoiseSource>(
    counts: &[u64],
    epsilon: f64,
    noise: &mut N,
) -> Result<CdfEstimate> {
    let bins = counts.len();
    check_bins(bins)?;
    check_positive(epsilon)?;
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let scale = 2.0 / epsilon;
    let n = total as f64;
    let mut acc = 0.0;
    let mut values: Vec<f64> = counts[..bins - 1]
        .iter()
        .map(|&c| {
            acc += c as f64 + noise.laplace(scale);
            acc / n
        })
        .collect();
    values.push(1.0);
    Ok(CdfEstimate::new(values, total))
}

pub fn mech_histogram<N: NoiseSource>(
    dataset: &Dataset,
    bins: usize,
    epsilon: f64,
    noise: &mut N,
) -> Result<CdfEstimate> {
    check_bins(bins)?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    histogram_from_counts(&dataset.histogram(bins), epsilon, noise)
}

/// Adds `Lap(2/ε_i)` to every level-`i` count; the root keeps `N`.
pub fn noisy_tree<N: NoiseSource>(counts: &CountVector, spec: &TreeSpec, noise: &mut N) -> Result<NoisyTree> {
    if counts.shape() != spec.shape() {
        return Err(Error::BudgetMismatch {
            height: counts.shape().height(),
            budgets: spec.budgets().len(),
        });
    }
    let total = *counts.root();
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let shape = spec.shape();
    let mut values = NodeValues::filled(shape, 0.0);
    values.level_mut(0)[0] = total as f64;
    for level in 1..=shape.height() {
        let scale = spec.noise_scale(level);
        for (dst, &c) in values.level_mut(level).iter_mut().zip(counts.level(level)) {
            *dst = c as f64 + noise.laplace(scale);
        }
    }
    Ok(NoisyTree { values, total })
}

/// Level-uniform tree mechanism `F^tree_{n,ε}`.
pub fn mech_tree<N: NoiseSource>(
    dataset: &Dataset,
    spec: &TreeSpec,
    noise: &mut N,
) -> Result<(NoisyTree, CdfEstimate)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let counts = exact_counts(spec.shape(), dataset);
    let tree = noisy_tree(&counts, spec, noise)?;
    let cdf = tree.cdf();
    Ok((tree, cdf))
}
