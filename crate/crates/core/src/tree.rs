//! The rooted tree `T_m` over a domain `[a, b)`.
//!
//! Level 0 holds the root, level `i` holds `n_1 * ... * n_i` nodes and level
//! `m - 1` (the height) holds the leaves, one per equal-width bin. Nodes are
//! addressed by their 1-based path `(j_1, ..., j_i)`; inside a level they are
//! enumerated lexicographically, which is also the order of their intervals.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Half-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainInterval {
    lo: f64,
    hi: f64,
}

impl DomainInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDomain { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    /// Zero-based index of the equal-width bin holding `x`, out of `bins`.
    ///
    /// `x` must lie in the interval.
    pub fn bin_of(&self, x: f64, bins: usize) -> usize {
        let t = (x - self.lo) / self.width() * bins as f64;
        // rounding can push values just below `hi` onto `bins`
        (libm::floor(t) as usize).min(bins - 1)
    }
}

/// Path `(j_1, ..., j_i)` from the root to a node; the empty path is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn new(indices: Vec<usize>) -> Self {
        NodePath(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<NodePath> {
        if self.0.is_empty() {
            None
        } else {
            Some(NodePath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, j: usize) -> NodePath {
        let mut v = self.0.clone();
        v.push(j);
        NodePath(v)
    }
}

impl From<Vec<usize>> for NodePath {
    fn from(v: Vec<usize>) -> Self {
        NodePath(v)
    }
}

impl<const L: usize> From<[usize; L]> for NodePath {
    fn from(v: [usize; L]) -> Self {
        NodePath(v.to_vec())
    }
}

/// Level-uniform tree shape: every node at level `i - 1` has `n_i` children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    branching: Vec<usize>,
    // level_sizes[i] = n_1 * ... * n_i, level_sizes[0] = 1
    level_sizes: Vec<usize>,
}

impl TreeShape {
    pub fn new(branching: &[usize]) -> Result<Self> {
        if branching.is_empty() || branching.iter().any(|&n| n < 2) {
            return Err(Error::InvalidBranching);
        }
        let mut level_sizes = Vec::with_capacity(branching.len() + 1);
        level_sizes.push(1usize);
        let mut size = 1usize;
        for &n in branching {
            size = size.checked_mul(n).ok_or(Error::InvalidBranching)?;
            level_sizes.push(size);
        }
        level_sizes
            .iter()
            .try_fold(0usize, |acc, &s| acc.checked_add(s))
            .ok_or(Error::InvalidBranching)?;
        Ok(Self {
            branching: branching.to_vec(),
            level_sizes,
        })
    }

    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    /// Number of noisy levels, `m - 1`.
    pub fn height(&self) -> usize {
        self.branching.len()
    }

    /// `K̄ = n_1 * ... * n_{m-1}`.
    pub fn leaf_count(&self) -> usize {
        self.level_sizes[self.height()]
    }

    pub fn node_count(&self) -> usize {
        self.level_sizes.iter().sum()
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.level_sizes[level]
    }

    /// Children per node at `level` (the root is level 0).
    pub fn children_per_node(&self, level: usize) -> usize {
        self.branching.get(level).copied().unwrap_or(0)
    }

    /// Leaves below any single node at `level`.
    pub fn leaves_below(&self, level: usize) -> usize {
        self.leaf_count() / self.level_sizes[level]
    }

    pub fn check_path(&self, path: &NodePath) -> Result<()> {
        let idx = path.indices();
        if idx.len() > self.height() {
            return Err(Error::InvalidPath);
        }
        if idx
            .iter()
            .zip(&self.branching)
            .any(|(&j, &n)| j == 0 || j > n)
        {
            return Err(Error::InvalidPath);
        }
        Ok(())
    }

    pub fn check_leaf(&self, path: &NodePath) -> Result<()> {
        self.check_path(path)?;
        if path.level() != self.height() {
            return Err(Error::NotALeaf);
        }
        Ok(())
    }

    /// Lexicographic position of a (valid) node inside its level.
    pub fn offset(&self, path: &NodePath) -> usize {
        path.indices()
            .iter()
            .zip(&self.branching)
            .fold(0, |acc, (&j, &n)| acc * n + (j - 1))
    }

    /// Inverse of [`offset`](Self::offset).
    pub fn path_at(&self, level: usize, mut offset: usize) -> NodePath {
        let mut idx = vec![0; level];
        for i in (0..level).rev() {
            let n = self.branching[i];
            idx[i] = offset % n + 1;
            offset /= n;
        }
        NodePath(idx)
    }

    /// Leaf for zero-based bin `bin`.
    pub fn leaf(&self, bin: usize) -> NodePath {
        self.path_at(self.height(), bin)
    }

    /// Range of zero-based leaf bins below a node.
    pub fn leaf_range(&self, path: &NodePath) -> Range<usize> {
        let width = self.leaves_below(path.level());
        let start = self.offset(path) * width;
        start..start + width
    }

    /// Nodes of one level, lexicographically.
    pub fn nodes(&self, level: usize) -> impl Iterator<Item = NodePath> + '_ {
        (0..self.level_sizes[level]).map(move |o| self.path_at(level, o))
    }
}

/// Interval of a node: the root gets `[a, b)`, child `j` of a node with
/// interval `[l, L)` at branching `n` gets `[l + (L-l)(j-1)/n, l + (L-l)j/n)`.
pub fn node_interval(
    tree: &TreeShape,
    domain: &DomainInterval,
    v: &NodePath,
) -> Result<DomainInterval> {
    tree.check_path(v)?;
    let (mut lo, mut hi) = (domain.lo(), domain.hi());
    for (&j, &n) in v.indices().iter().zip(tree.branching()) {
        let w = hi - lo;
        let new_lo = lo + w * (j - 1) as f64 / n as f64;
        let new_hi = lo + w * j as f64 / n as f64;
        lo = new_lo;
        hi = new_hi;
    }
    DomainInterval::new(lo, hi)
}

/// One value per node, stored level by level in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValues<T> {
    shape: TreeShape,
    levels: Vec<Vec<T>>,
}

impl<T: Clone> NodeValues<T> {
    pub fn filled(shape: &TreeShape, value: T) -> Self {
        let levels = (0..=shape.height())
            .map(|i| vec![value.clone(); shape.level_size(i)])
            .collect();
        Self {
            shape: shape.clone(),
            levels,
        }
    }
}

impl<T> NodeValues<T> {
    pub fn shape(&self) -> &TreeShape {
        &self.shape
    }

    pub fn get(&self, path: &NodePath) -> Option<&T> {
        self.shape.check_path(path).ok()?;
        Some(&self.levels[path.level()][self.shape.offset(path)])
    }

    pub fn get_mut(&mut self, path: &NodePath) -> Option<&mut T> {
        self.shape.check_path(path).ok()?;
        let off = self.shape.offset(path);
        Some(&mut self.levels[path.level()][off])
    }

    pub fn root(&self) -> &T {
        &self.levels[0][0]
    }

    pub fn level(&self, level: usize) -> &[T] {
        &self.levels[level]
    }

    pub fn level_mut(&mut self, level: usize) -> &mut [T] {
        &mut self.levels[level]
    }

    pub fn leaves(&self) -> &[T] {
        &self.levels[self.shape.height()]
    }
}

/// Exact per-node counts `χ(v)`.
pub type CountVector = NodeValues<u64>;

/// Samples inside a known domain; `N` is the public sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<f64>,
    domain: DomainInterval,
}

impl Dataset {
    pub fn new(samples: Vec<f64>, domain: DomainInterval) -> Result<Self> {
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, &x)| !domain.contains(x))
        {
            return Err(Error::SampleOutOfDomain { index, value });
        }
        Ok(Self { samples, domain })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn domain(&self) -> &DomainInterval {
        &self.domain
    }

    /// Sample count `N`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Histogram over `bins` equal-width bins.
    pub fn histogram(&self, bins: usize) -> Vec<u64> {
        let mut counts = vec![0u64; bins];
        for &x in &self.samples {
            counts[self.domain.bin_of(x, bins)] += 1;
        }
        counts
    }

    /// Cumulative counts `c̄_1, ..., c̄_K`.
    pub fn cumulative_counts(&self, bins: usize) -> Vec<u64> {
        let mut acc = 0;
        self.histogram(bins)
            .into_iter()
            .map(|c| {
                acc += c;
                acc
            })
            .collect()
    }
}

/// `χ(v)` for every node: leaves by binning, internal nodes as sums of
/// their children.
pub fn exact_counts(tree: &TreeShape, dataset: &Dataset) -> CountVector {
    let mut counts = NodeValues::filled(tree, 0u64);
    let leaves = dataset.histogram(tree.leaf_count());
    counts.level_mut(tree.height()).copy_from_slice(&leaves);
    aggregate_up(&mut counts);
    counts
}

fn aggregate_up(counts: &mut CountVector) {
    for level in (0..counts.shape.height()).rev() {
        let n = counts.shape.children_per_node(level);
        let (upper, lower) = counts.levels.split_at_mut(level + 1);
        for (parent, kids) in upper[level].iter_mut().zip(lower[0].chunks(n)) {
            *parent = kids.iter().sum();
        }
    }
}

/// Largest level `τ` (1-based) whose index is not maximal, `None` for the
/// all-max leaf.
fn tau(tree: &TreeShape, leaf: &NodePath) -> Option<usize> {
    leaf.indices()
        .iter()
        .zip(tree.branching())
        .rposition(|(&j, &n)| j != n)
        .map(|p| p + 1)
}

/// Closed-form covering of the cumulative interval `[a, right edge of leaf)`:
/// `{v_{<j_1}, v_{j_1,<j_2}, ..., v_{j_1..,<j_τ}, v_{j_1..j_τ}}`, or the root
/// alone for the last leaf.
pub fn covering(tree: &TreeShape, leaf: &NodePath) -> Result<Vec<NodePath>> {
    tree.check_leaf(leaf)?;
    let Some(tau) = tau(tree, leaf) else {
        return Ok(vec![NodePath::root()]);
    };
    let idx = leaf.indices();
    let mut out = Vec::new();
    for level in 1..=tau {
        let prefix = &idx[..level - 1];
        for r in 1..idx[level - 1] {
            let mut p = prefix.to_vec();
            p.push(r);
            out.push(NodePath(p));
        }
    }
    out.push(NodePath(idx[..tau].to_vec()));
    Ok(out)
}

/// Closed-form covering of `[right edge of leaf, b)`:
/// `{v_{>j_1}, v_{j_1,>j_2}, ..., v_{j_1..,>j_τ}}`; empty for the last leaf.
pub fn right_covering(tree: &TreeShape, leaf: &NodePath) -> Result<Vec<NodePath>> {
    tree.check_leaf(leaf)?;
    let Some(tau) = tau(tree, leaf) else {
        return Ok(Vec::new());
    };
    let idx = leaf.indices();
    let mut out = Vec::new();
    for level in 1..=tau {
        let prefix = &idx[..level - 1];
        for r in idx[level - 1] + 1..=tree.branching()[level - 1] {
            let mut p = prefix.to_vec();
            p.push(r);
            out.push(NodePath(p));
        }
    }
    Ok(out)
}

/// Sum of `values` over the covering of every leaf, in bin order.
///
/// Equivalent to summing over [`covering`] leaf by leaf, in `O(depth)` per
/// leaf using within-group sibling prefix sums.
pub fn left_cumulative(values: &NodeValues<f64>) -> Vec<f64> {
    let shape = values.shape();
    let h = shape.height();
    let before: Vec<Vec<f64>> = (1..=h)
        .map(|level| sibling_sums(values.level(level), shape.children_per_node(level - 1), false))
        .collect();
    let mut out = Vec::with_capacity(shape.leaf_count());
    let mut offsets = vec![0usize; h + 1];
    for bin in 0..shape.leaf_count() {
        leaf_offsets(shape, bin, &mut offsets);
        let tau = (1..=h)
            .rev()
            .find(|&l| offsets[l] % shape.children_per_node(l - 1) != shape.children_per_node(l - 1) - 1);
        let s = match tau {
            None => *values.root(),
            Some(tau) => {
                (1..=tau).map(|l| before[l - 1][offsets[l]]).sum::<f64>()
                    + values.level(tau)[offsets[tau]]
            }
        };
        out.push(s);
    }
    out
}

/// Sum of `values` over the right covering of every leaf, in bin order.
pub fn right_cumulative(values: &NodeValues<f64>) -> Vec<f64> {
    let shape = values.shape();
    let h = shape.height();
    let after: Vec<Vec<f64>> = (1..=h)
        .map(|level| sibling_sums(values.level(level), shape.children_per_node(level - 1), true))
        .collect();
    let mut out = Vec::with_capacity(shape.leaf_count());
    let mut offsets = vec![0usize; h + 1];
    for bin in 0..shape.leaf_count() {
        leaf_offsets(shape, bin, &mut offsets);
        // levels past τ contribute empty sets
        out.push((1..=h).map(|l| after[l - 1][offsets[l]]).sum());
    }
    out
}

// offsets[l] = offset of the level-l ancestor of leaf `bin`
fn leaf_offsets(shape: &TreeShape, bin: usize, offsets: &mut [usize]) {
    let h = shape.height();
    offsets[h] = bin;
    for l in (1..=h).rev() {
        offsets[l - 1] = offsets[l] / shape.children_per_node(l - 1);
    }
}

// Exclusive sums over earlier (or later) siblings in each group of `n`.
fn sibling_sums(level: &[f64], n: usize, later: bool) -> Vec<f64> {
    let mut out = vec![0.0; level.len()];
    for (group, dst) in level.chunks(n).zip(out.chunks_mut(n)) {
        let mut acc = 0.0;
        if later {
            for k in (0..n).rev() {
                dst[k] = acc;
                acc += group[k];
            }
        } else {
            for k in 0..n {
                dst[k] = acc;
                acc += group[k];
            }
        }
    }
    out
}
