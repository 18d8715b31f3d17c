//! Variance refinement for equal trees.
//!
//! Step one walks the tree bottom-up and replaces each internal node's noisy
//! count by the inverse-variance weighted mix of itself and the sum of its
//! (already refined) children. Step two estimates each cumulative count twice,
//! once from the left covering and once as `N` minus the right covering, and
//! averages the two. The two sums read disjoint subtrees, so the average
//! halves the variance.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mechanisms::{CdfEstimate, NoisyTree, TreeSpec};
use crate::tree::{left_cumulative, right_cumulative, NodeValues, TreeShape};

/// Refined node counts with the analytic variance of each level.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedTree {
    values: NodeValues<f64>,
    level_variances: Vec<f64>,
    total: u64,
}

impl RefinedTree {
    pub fn values(&self) -> &NodeValues<f64> {
        &self.values
    }

    pub fn shape(&self) -> &TreeShape {
        self.values.shape()
    }

    /// Variance of a refined node at each level; index 0 is the root.
    pub fn level_variances(&self) -> &[f64] {
        &self.level_variances
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

fn uniform_parameters(spec: &TreeSpec) -> Result<(usize, f64)> {
    let b = spec.shape().branching();
    let e = spec.budgets();
    let beta = b[0];
    let eps = e[0];
    if b.iter().any(|&n| n != beta) || e.iter().any(|&x| x != eps) {
        return Err(Error::NonUniformTree);
    }
    Ok((beta, eps))
}

/// Bottom-up inverse-variance combination of node counts with child sums.
///
/// Leaves are left as is; the root stays pinned to `N`. Level-1 nodes are
/// combined from their own children like any other internal node.
pub fn refine_bottom_up(noisy: &NoisyTree, spec: &TreeSpec) -> Result<RefinedTree> {
    if noisy.shape() != spec.shape() {
        return Err(Error::InvalidParameter("noisy tree and spec have different shapes"));
    }
    let (beta, eps) = uniform_parameters(spec)?;
    let shape = spec.shape();
    let h = shape.height();
    let base = 8.0 / (eps * eps);
    let b = beta as f64;

    let mut values = noisy.values().clone();
    let mut variances = vec![0.0; h + 1];
    variances[h] = base;
    for level in (1..h).rev() {
        let child_var = variances[level + 1];
        let w_own = 1.0 / base;
        let w_children = 1.0 / (b * child_var);
        let alpha = w_own / (w_own + w_children);
        variances[level] = 1.0 / (w_own + w_children);

        let sums: Vec<f64> = values
            .level(level + 1)
            .chunks(beta)
            .map(|c| c.iter().sum())
            .collect();
        for (v, s) in values.level_mut(level).iter_mut().zip(sums) {
            *v = alpha * *v + (1.0 - alpha) * s;
        }
    }
    values.level_mut(0)[0] = noisy.total() as f64;
    Ok(RefinedTree {
        values,
        level_variances: variances,
        total: noisy.total(),
    })
}

/// Forward, backward and averaged cumulative counts for each bin.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedCdf {
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
    pub combined: Vec<f64>,
    pub total: u64,
}

impl RefinedCdf {
    /// Combined counts normalized by `N`; the last bin is exactly 1.
    pub fn to_cdf(&self) -> CdfEstimate {
        let n = self.total as f64;
        let mut values: Vec<f64> = self.combined.iter().map(|c| c / n).collect();
        if let Some(last) = values.last_mut() {
            *last = 1.0;
        }
        CdfEstimate::new(values, self.total)
    }
}

/// Averages the left-covering sum with `N` minus the right-covering sum.
pub fn refined_cdf(refined: &RefinedTree) -> RefinedCdf {
    let forward = left_cumulative(&refined.values);
    let backward = right_cumulative(&refined.values);
    let n = refined.total as f64;
    let combined = forward
        .iter()
        .zip(&backward)
        .map(|(f, b)| (f + n - b) / 2.0)
        .collect();
    RefinedCdf {
        forward,
        backward,
        combined,
        total: refined.total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_model::refined_level_variance;
    use crate::mechanisms::{noisy_tree, NoNoise, RngSeed};
    use crate::tree::{exact_counts, Dataset, DomainInterval};

    fn data(shape: &TreeShape) -> (Dataset, crate::tree::CountVector) {
        let k = shape.leaf_count();
        let samples: Vec<f64> = (0..40).map(|i| ((i * 7) % k) as f64 + 0.5).collect();
        let d = Dataset::new(samples, DomainInterval::new(0.0, k as f64).unwrap()).unwrap();
        let c = exact_counts(shape, &d);
        (d, c)
    }

    #[test]
    fn variances_match_closed_form() {
        let shape = TreeShape::new(&[4, 4, 4]).unwrap();
        let spec = TreeSpec::equal(shape.clone(), 0.9).unwrap();
        let (_, counts) = data(&shape);
        let noisy = noisy_tree(&counts, &spec, &mut NoNoise).unwrap();
        let r = refine_bottom_up(&noisy, &spec).unwrap();
        let v = r.level_variances();
        assert_eq!(v[0], 0.0);
        for level in 1..=3 {
            let want = refined_level_variance(4.0, 3, level, 0.3);
            assert!((v[level] / want - 1.0).abs() < 1e-12);
        }
        let base = 8.0 / 0.09;
        assert!((v[3] - base).abs() < 1e-9);
        assert!((v[2] - base / 1.25).abs() < 1e-9);
    }

    #[test]
    fn noiseless_is_exact() {
        let shape = TreeShape::new(&[3, 3, 3]).unwrap();
        let spec = TreeSpec::equal(shape.clone(), 1.0).unwrap();
        let (d, counts) = data(&shape);
        let noisy = noisy_tree(&counts, &spec, &mut NoNoise).unwrap();
        let r = refine_bottom_up(&noisy, &spec).unwrap();
        let cdf = refined_cdf(&r);
        let exact = d.cumulative_counts(27);
        for i in 0..27 {
            assert!((cdf.combined[i] - exact[i] as f64).abs() < 1e-9);
            assert!((cdf.forward[i] - exact[i] as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn last_bin_pinned() {
        let shape = TreeShape::new(&[2, 2, 2, 2]).unwrap();
        let spec = TreeSpec::equal(shape.clone(), 0.2).unwrap();
        let (_, counts) = data(&shape);
        for s in 0..20 {
            let noisy = noisy_tree(&counts, &spec, &mut RngSeed::new(s, 0).laplace()).unwrap();
            let c = refined_cdf(&refine_bottom_up(&noisy, &spec).unwrap());
            assert_eq!(*c.backward.last().unwrap(), 0.0);
            assert_eq!(*c.forward.last().unwrap(), 40.0);
            assert_eq!(*c.combined.last().unwrap(), 40.0);
            assert_eq!(*c.to_cdf().values().last().unwrap(), 1.0);
        }
    }

    #[test]
    fn rejects_unequal_trees() {
        let shape = TreeShape::new(&[2, 4]).unwrap();
        let spec = TreeSpec::equal(shape.clone(), 1.0).unwrap();
        let (_, counts) = data(&shape);
        let noisy = noisy_tree(&counts, &spec, &mut NoNoise).unwrap();
        assert_eq!(refine_bottom_up(&noisy, &spec), Err(Error::NonUniformTree));

        let shape = TreeShape::new(&[3, 3]).unwrap();
        let spec = TreeSpec::new(shape.clone(), vec![0.3, 0.7]).unwrap();
        let (_, counts) = data(&shape);
        let noisy = noisy_tree(&counts, &spec, &mut NoNoise).unwrap();
        assert_eq!(refine_bottom_up(&noisy, &spec), Err(Error::NonUniformTree));
    }
}
