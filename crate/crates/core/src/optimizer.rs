//! Parameter selection for level-uniform tree mechanisms.
//!
//! Two regimes are covered. With real branching factors the optimal budgets
//! given branching (and vice versa) have closed forms, and the best common
//! branching factor minimizes `f(β) = (β-1)/(log β)^3`. With integer
//! branching factors and equal budgets the error is proportional to
//! `g(n) = m̄^2 Σ (n_i - 1)`; prime-power bin counts have an explicit optimal
//! allocation per height, and general bin counts fall back to enumerating
//! all factorizations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::error_model::{beta_objective, e2_tree, e2_tree_real};
use crate::mechanisms::TreeSpec;
use crate::tree::TreeShape;

/// Largest input accepted by [`factorize`].
pub const FACTORIZATION_LIMIT: u64 = 1_000_000_000;

/// Real-relaxed branching factors and budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct RealAllocation {
    pub branching: Vec<f64>,
    pub budgets: Vec<f64>,
}

impl RealAllocation {
    /// Expected squared l2 error for `samples` samples.
    pub fn e2(&self, samples: u64) -> Result<f64> {
        e2_tree_real(&self.branching, &self.budgets, samples)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(epsilon))
    }
}

/// Optimal budgets for fixed branching: `ε_i ∝ (n_i - 1)^{1/3}`, summing to `ε`.
pub fn opt_budgets_given_branching(branching: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    check_epsilon(epsilon)?;
    if branching.is_empty() {
        return Err(Error::InvalidBranching);
    }
    // n_i = 1 would get zero weight and an infinite error term
    if branching.iter().any(|&n| !(n > 1.0 && n.is_finite())) {
        return Err(Error::InvalidBranching);
    }
    let weights: Vec<f64> = branching.iter().map(|&n| libm::cbrt(n - 1.0)).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| epsilon * w / total).collect())
}

/// Optimal real branching for fixed budgets:
/// `n_i = K^{1/h} ε_i^2 / (Π ε_j^2)^{1/h}`, computed in the log domain so the
/// product is `K` to rounding.
pub fn opt_branching_given_budgets(budgets: &[f64], bins: f64) -> Result<Vec<f64>> {
    if budgets.is_empty() {
        return Err(Error::InvalidParameter("budget vector is empty"));
    }
    if let Some(&e) = budgets.iter().find(|&&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidEpsilon(e));
    }
    if !(bins > 0.0 && bins.is_finite()) {
        return Err(Error::InvalidParameter("number of bins must be positive"));
    }
    let h = budgets.len() as f64;
    let logs: Vec<f64> = budgets.iter().map(|&e| 2.0 * libm::log(e)).collect();
    let mean: f64 = logs.iter().sum::<f64>() / h;
    let base = libm::log(bins) / h;
    Ok(logs.iter().map(|&l| libm::exp(base + l - mean)).collect())
}

/// Unique root `β* > 3` of `log β = 3(β - 1)/β`, by bisection on `[3, 100]`.
pub fn opt_beta_real() -> f64 {
    let g = |b: f64| libm::log(b) - 3.0 * (b - 1.0) / b;
    let (mut lo, mut hi) = (3.0f64, 100.0f64);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integer minimizer of `f(β)`: `f` decreases up to `β*` and increases after,
/// so the answer is whichever neighbour of `β*` is smaller.
pub fn opt_beta_int() -> u64 {
    let b = opt_beta_real();
    let (lo, hi) = (libm::floor(b), libm::ceil(b));
    if beta_objective(hi) < beta_objective(lo) {
        hi as u64
    } else {
        lo as u64
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs in
/// increasing order. Inputs above [`FACTORIZATION_LIMIT`] are refused.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n < 2 {
        return Err(Error::InvalidBins(n));
    }
    if n > FACTORIZATION_LIMIT {
        return Err(Error::FactorizationLimit(n));
    }
    let mut out = Vec::new();
    let mut rest = n;
    let mut d = 2u64;
    while d * d <= rest {
        if rest % d == 0 {
            let mut e = 0;
            while rest % d == 0 {
                rest /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        out.push((rest, 1));
    }
    Ok(out)
}

/// `(p, t)` with `n = p^t`, if `n` is a prime power.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    // smallest factor first: cheap even when n is above the trial-division cap
    let mut d = 2u64;
    while d.saturating_mul(d) <= n && n % d != 0 {
        d += if d == 2 { 1 } else { 2 };
    }
    if n % d != 0 || d.saturating_mul(d) > n {
        return Some((n, 1));
    }
    let mut rest = n;
    let mut t = 0;
    while rest % d == 0 {
        rest /= d;
        t += 1;
    }
    (rest == 1).then_some((d, t))
}

/// Smallest prime power `K̄ = p^t >= bins`, returned as `(p, t, K̄)`.
pub fn smallest_prime_power_at_least(bins: u64) -> Result<(u64, u32, u64)> {
    if bins < 2 {
        return Err(Error::InvalidBins(bins));
    }
    let mut k = bins;
    loop {
        if let Some((p, t)) = prime_power(k) {
            return Ok((p, t, k));
        }
        k = k.checked_add(1).ok_or(Error::InvalidBins(bins))?;
    }
}

/// Branching `p^{t_1}, ..., p^{t_m̄}` with non-decreasing exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerAllocation {
    pub base: u64,
    pub exponents: Vec<u32>,
}

impl IntegerAllocation {
    pub fn total_exponent(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn branching(&self) -> Vec<u64> {
        self.exponents.iter().map(|&t| self.base.pow(t)).collect()
    }

    /// `Σ p^{t_i}`.
    pub fn cost(&self) -> u128 {
        self.exponents.iter().map(|&t| (self.base as u128).pow(t)).sum()
    }
}

/// Optimal split of `t` into `m̄` positive exponents minimizing `Σ p^{t_i}`:
/// with `t = τ m̄ + ρ`, the first `m̄ - ρ` exponents are `τ` and the rest `τ + 1`.
pub fn int_alloc_prime_power(p: u64, t: u32, mbar: u32) -> Result<IntegerAllocation> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if t == 0 || mbar == 0 || mbar > t {
        return Err(Error::InvalidParameter("need 1 <= m̄ <= t"));
    }
    let (tau, rho) = (t / mbar, t % mbar);
    let exponents = (0..mbar)
        .map(|i| if i < mbar - rho { tau } else { tau + 1 })
        .collect();
    Ok(IntegerAllocation { base: p, exponents })
}

/// Equal-budget cost factor `g(n) = m̄^2 Σ (n_i - 1)`; the error is
/// `4 K̄ g(n) / (N^2 ε^2)`.
pub fn equal_budget_cost(branching: &[u64]) -> u128 {
    let m = branching.len() as u128;
    m * m * branching.iter().map(|&n| n as u128 - 1).sum::<u128>()
}

/// Bounds on (and, for prime powers, the value of) the optimal height.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeightBounds {
    pub lower: u32,
    pub upper: u32,
    pub exact: Option<u32>,
}

/// Bounds from integer roots of `K̄ = p^t`: a root `b = K̄^{1/m̃} >= 17`
/// forces `m̄_OPT >= m̃`, a root `b <= 16` forces `m̄_OPT <= m̃`.
pub fn height_bounds_from_roots(p: u64, t: u32) -> HeightBounds {
    let (mut lower, mut upper) = (1u32, t);
    for m in (1..=t).filter(|m| t % m == 0) {
        let b = (p as u128).pow(t / m);
        if b >= 17 {
            lower = lower.max(m);
        } else {
            upper = upper.min(m);
        }
    }
    HeightBounds {
        lower,
        upper,
        exact: None,
    }
}

/// `h(m̄) = min g(n)` over integer branchings of height `m̄` with product `p^t`.
pub fn height_cost(p: u64, t: u32, mbar: u32) -> Result<u128> {
    let alloc = int_alloc_prime_power(p, t, mbar)?;
    Ok(equal_budget_cost(&alloc.branching()))
}

/// Optimal height for a prime-power bin count (smallest on ties), together
/// with the root-based bounds it must satisfy.
pub fn opt_height(kbar: u64) -> Result<HeightBounds> {
    let (p, t) = prime_power(kbar).ok_or(Error::NotPrimePower(kbar))?;
    let mut best = (u128::MAX, 0u32);
    for mbar in 1..=t {
        let h = height_cost(p, t, mbar)?;
        if h < best.0 {
            best = (h, mbar);
        }
    }
    let mut bounds = height_bounds_from_roots(p, t);
    bounds.exact = Some(best.1);
    Ok(bounds)
}

/// Optimal tree for a prime-power bin count: optimal height, then the
/// balanced exponent split, equal budgets.
pub fn prime_power_tree(kbar: u64, epsilon: f64) -> Result<TreeSpec> {
    let (p, t) = prime_power(kbar).ok_or(Error::NotPrimePower(kbar))?;
    let mbar = opt_height(kbar)?.exact.expect("set by opt_height");
    let alloc = int_alloc_prime_power(p, t, mbar)?;
    spec_from_branching(&alloc.branching(), epsilon)
}

fn spec_from_branching(branching: &[u64], epsilon: f64) -> Result<TreeSpec> {
    let b: Vec<usize> = branching
        .iter()
        .map(|&n| usize::try_from(n).map_err(|_| Error::InvalidBranching))
        .collect::<Result<_>>()?;
    TreeSpec::equal(TreeShape::new(&b)?, epsilon)
}

/// Calls `visit` on every unordered factorization of `n` into factors >= 2,
/// each given non-decreasing, in lexicographic order.
pub fn for_each_factorization(n: u64, mut visit: impl FnMut(&[u64])) -> Result<()> {
    let primes = factorize(n)?;
    let mut divisors = vec![1u64];
    for &(p, e) in &primes {
        let len = divisors.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divisors.push(divisors[i] * pk);
            }
        }
    }
    divisors.retain(|&d| d >= 2);
    divisors.sort_unstable();

    fn rec(rest: u64, min_idx: usize, divisors: &[u64], cur: &mut Vec<u64>, visit: &mut dyn FnMut(&[u64])) {
        if rest == 1 {
            visit(cur);
            return;
        }
        for (i, &d) in divisors.iter().enumerate().skip(min_idx) {
            if d > rest {
                break;
            }
            // remaining factors are >= d, so d^2 > rest leaves only d == rest
            if d != rest && d * d > rest {
                continue;
            }
            if rest % d == 0 {
                cur.push(d);
                rec(rest / d, i, divisors, cur, visit);
                cur.pop();
            }
        }
    }
    let mut cur = Vec::new();
    rec(n, 0, &divisors, &mut cur, &mut visit);
    Ok(())
}

/// Outcome of [`exhaustive_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub spec: TreeSpec,
    /// Predicted `E_2 · N^2`.
    pub error: f64,
    /// Number of factorizations evaluated.
    pub candidates: usize,
}

/// Best tree over all factorizations of `bins` with equal budgets `ε/m̄`.
///
/// Candidates are compared on the exact integer cost `m̄^2 Σ(n_i - 1)`; ties
/// go to the lexicographically smallest sorted branching. With
/// `refine_budgets` the winner's budgets are then re-optimized for its
/// branching.
pub fn exhaustive_search(bins: u64, epsilon: f64, refine_budgets: bool) -> Result<SearchResult> {
    check_epsilon(epsilon)?;
    let mut best: Option<(u128, Vec<u64>)> = None;
    let mut candidates = 0usize;
    for_each_factorization(bins, |f| {
        candidates += 1;
        let cost = equal_budget_cost(f);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, f.to_vec()));
        }
    })?;
    let (_, branching) = best.expect("bins >= 2 has at least one factorization");
    let mut spec = spec_from_branching(&branching, epsilon)?;
    if refine_budgets {
        let real: Vec<f64> = branching.iter().map(|&n| n as f64).collect();
        let budgets = opt_budgets_given_branching(&real, epsilon)?;
        spec = TreeSpec::new(spec.shape().clone(), budgets)?;
    }
    let error = e2_tree(&spec, 1)?;
    Ok(SearchResult {
        spec,
        error,
        candidates,
    })
}

/// Unequal-branching tree for `K̄ = 2^t` (`t` prime, `t >= 11`) beating every
/// equal-branching tree by more than a factor of 3 at equal budgets:
/// `(16, ..., 16, 32)` of height `s` when `t = 4s + 1`, and
/// `(8, 16, ..., 16)` of height `s + 1` when `t = 4s + 3`.
pub fn counterexample_unequal(t: u32, epsilon: f64) -> Result<TreeSpec> {
    if !is_prime(t as u64) {
        return Err(Error::NotPrime(t as u64));
    }
    if t < 11 {
        return Err(Error::InvalidParameter("exponent must be at least 11"));
    }
    let s = (t / 4) as usize;
    let branching: Vec<u64> = if t % 4 == 1 {
        let mut b = vec![16u64; s - 1];
        b.push(32);
        b
    } else {
        let mut b = vec![8u64];
        b.extend(core::iter::repeat_n(16, s));
        b
    };
    spec_from_branching(&branching, epsilon)
}

/// `φ(r, ε) = (e^r - 1) / ε^2`, one term of the log-domain objective.
pub fn phi(r: f64, epsilon: f64) -> f64 {
    (libm::exp(r) - 1.0) / (epsilon * epsilon)
}

/// Analytic Hessian of [`phi`] in `(r, ε)`.
pub fn phi_hessian(r: f64, epsilon: f64) -> [[f64; 2]; 2] {
    let er = libm::exp(r);
    let e2 = epsilon * epsilon;
    let off = -2.0 * er / (e2 * epsilon);
    [[er / e2, off], [off, 6.0 * (er - 1.0) / (e2 * e2)]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_model::e2_opt;

    #[test]
    fn budgets_examples() {
        assert_eq!(opt_budgets_given_branching(&[2.0, 2.0], 1.0).unwrap(), vec![0.5, 0.5]);
        let b = opt_budgets_given_branching(&[2.0, 9.0], 1.0).unwrap();
        assert!((b[0] - 1.0 / 3.0).abs() < 1e-12 && (b[1] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(opt_budgets_given_branching(&[2.0, 1.0], 1.0), Err(Error::InvalidBranching));
        assert!(opt_budgets_given_branching(&[2.0], 0.0).is_err());
    }

    #[test]
    fn budgets_beat_grid() {
        // scan ε_1 on a fine grid for n = (2, 9)
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..10_000 {
            let e1 = i as f64 / 10_000.0;
            let v = e2_tree_real(&[2.0, 9.0], &[e1, 1.0 - e1], 1).unwrap();
            if v < best.0 {
                best = (v, e1);
            }
        }
        assert!((best.1 - 1.0 / 3.0).abs() < 2e-4);
    }

    #[test]
    fn branching_examples() {
        let n = opt_branching_given_budgets(&[0.25, 0.25, 0.25], 64.0).unwrap();
        assert!(n.iter().all(|&x| (x - 4.0).abs() < 1e-12));
        let n = opt_branching_given_budgets(&[1.0, 2.0], 16.0).unwrap();
        assert!((n[0] - 2.0).abs() < 1e-12 && (n[1] - 8.0).abs() < 1e-12);
        let n = opt_branching_given_budgets(&[0.1, 0.7, 0.2, 1.3], 12345.0).unwrap();
        let prod: f64 = n.iter().product();
        assert!((prod / 12345.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn branching_beats_grid() {
        // n_1 ∈ (0, 16) on a grid, n_2 = 16 / n_1, budgets (1, 2)
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..16_000 {
            let n1 = i as f64 / 1000.0;
            let v = e2_tree_real(&[n1, 16.0 / n1], &[1.0, 2.0], 1).unwrap();
            if v < best.0 {
                best = (v, n1);
            }
        }
        assert!((best.1 - 2.0).abs() < 2e-3);
    }

    #[test]
    fn beta_real() {
        let b = opt_beta_real();
        assert!((b - 16.801016).abs() < 1e-6, "{b}");
        assert!((libm::log(b) - 3.0 * (b - 1.0) / b).abs() < 1e-10);
        for k in 2..=100 {
            assert!(beta_objective(b) <= beta_objective(k as f64));
        }
    }

    #[test]
    fn beta_int() {
        assert_eq!(opt_beta_int(), 17);
        assert!(beta_objective(17.0) < beta_objective(16.0));
        for k in (2..=1000).filter(|&k| k != 17) {
            assert!(beta_objective(17.0) < beta_objective(k as f64));
        }
    }

    #[test]
    fn primes_and_powers() {
        assert!(is_prime(2) && is_prime(997) && is_prime(1009) && !is_prime(1) && !is_prime(1001));
        assert_eq!(factorize(360).unwrap(), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(997).unwrap(), vec![(997, 1)]);
        assert_eq!(factorize(1), Err(Error::InvalidBins(1)));
        assert_eq!(factorize(FACTORIZATION_LIMIT + 1), Err(Error::FactorizationLimit(FACTORIZATION_LIMIT + 1)));
        assert_eq!(prime_power(1 << 20), Some((2, 20)));
        assert_eq!(prime_power(83521), Some((17, 4)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(997), Some((997, 1)));
        assert_eq!(smallest_prime_power_at_least(1000).unwrap(), (1009, 1, 1009));
        assert_eq!(smallest_prime_power_at_least(1022).unwrap(), (2, 10, 1024));
        assert_eq!(smallest_prime_power_at_least(256).unwrap(), (2, 8, 256));
    }

    #[test]
    fn smallest_prime_power_matches_scan() {
        for k in 2u64..3000 {
            let (p, t, kbar) = smallest_prime_power_at_least(k).unwrap();
            assert_eq!(p.pow(t), kbar);
            // scan oracle: no number in [k, kbar) has a single distinct prime factor
            for j in k..kbar {
                assert!(factorize(j).unwrap().len() > 1);
            }
            assert_eq!(factorize(kbar).unwrap().len(), 1);
        }
    }

    #[test]
    fn int_alloc_examples() {
        assert_eq!(int_alloc_prime_power(2, 20, 4).unwrap().exponents, vec![5, 5, 5, 5]);
        assert_eq!(int_alloc_prime_power(2, 7, 2).unwrap().exponents, vec![3, 4]);
        assert_eq!(int_alloc_prime_power(3, 7, 3).unwrap().exponents, vec![2, 2, 3]);
        assert_eq!(int_alloc_prime_power(5, 4, 1).unwrap().exponents, vec![4]);
        assert!(int_alloc_prime_power(2, 3, 4).is_err());
        assert_eq!(int_alloc_prime_power(4, 3, 1), Err(Error::NotPrime(4)));
    }

    #[test]
    fn heights() {
        let b = opt_height(1 << 20).unwrap();
        assert!(matches!(b.exact, Some(4) | Some(5)));
        assert_eq!((b.lower, b.upper), (4, 5));
        for t in 1..=5 {
            let b = opt_height(17u64.pow(t)).unwrap();
            assert_eq!(b.exact, Some(t));
            assert_eq!((b.lower, b.upper), (t, t));
        }
        for k in 2..=16 {
            if prime_power(k).is_some() {
                assert_eq!(opt_height(k).unwrap().exact, Some(1), "K̄ = {k}");
            }
        }
        assert_eq!(opt_height(12), Err(Error::NotPrimePower(12)));
    }

    #[test]
    fn exact_height_within_bounds() {
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23] {
            let mut t = 1;
            while let Some(k) = p.checked_pow(t) {
                if k > 1 << 40 {
                    break;
                }
                let b = opt_height(k).unwrap();
                let e = b.exact.unwrap();
                assert!(b.lower <= e && e <= b.upper, "p={p} t={t} {b:?}");
                t += 1;
            }
        }
    }

    #[test]
    fn height_cost_dominates_equal_relaxation() {
        for (p, t) in [(2u64, 20u32), (3, 9), (5, 6), (7, 5), (2, 13)] {
            let k = (p as f64).powi(t as i32);
            for m in 1..=t {
                let h = height_cost(p, t, m).unwrap() as f64;
                let mf = m as f64;
                let g = mf * mf * mf * (libm::pow(k, 1.0 / mf) - 1.0);
                assert!(h >= g * (1.0 - 1e-12), "p={p} t={t} m={m}");
            }
        }
    }

    #[test]
    fn factorizations_of_12() {
        let mut all = Vec::new();
        for_each_factorization(12, |f| all.push(f.to_vec())).unwrap();
        assert_eq!(all, vec![vec![2, 2, 3], vec![2, 6], vec![3, 4], vec![12]]);
    }

    #[test]
    fn search_examples() {
        let r = exhaustive_search(997, 1.0, false).unwrap();
        assert_eq!(r.spec.shape().branching(), &[997]);
        assert_eq!(r.candidates, 1);

        let r = exhaustive_search(1 << 11, 1.0, false).unwrap();
        assert_eq!(r.spec.shape().branching(), &[8, 16, 16]);
        let binary = e2_tree(&TreeSpec::equal(TreeShape::new(&[2; 11]).unwrap(), 1.0).unwrap(), 1).unwrap();
        assert!(r.error * 3.0 < binary);

        let r = exhaustive_search(256, 1.0, false).unwrap();
        for m in [2u32, 3, 5, 9] {
            assert!(r.error <= e2_opt(256, m, 1, 1.0).unwrap() * (1.0 + 1e-12));
        }
        assert_eq!(r.spec.shape().branching(), &[16, 16]);
        assert!(exhaustive_search(1, 1.0, false).is_err());
    }

    #[test]
    fn search_refined_budgets_do_not_hurt() {
        for k in [12u64, 360, 1000, 2 * 3 * 5 * 7 * 11] {
            let plain = exhaustive_search(k, 0.5, false).unwrap();
            let refined = exhaustive_search(k, 0.5, true).unwrap();
            assert_eq!(plain.spec.shape(), refined.spec.shape());
            assert!(refined.error <= plain.error * (1.0 + 1e-12));
            assert!((refined.spec.epsilon() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn counterexamples() {
        let s = counterexample_unequal(11, 1.0).unwrap();
        assert_eq!(s.shape().branching(), &[8, 16, 16]);
        assert_eq!(equal_budget_cost(&[8, 16, 16]), 333);
        assert!(3 * 333 < 11u128.pow(3));
        let s = counterexample_unequal(13, 1.0).unwrap();
        assert_eq!(s.shape().branching(), &[16, 16, 32]);
        assert_eq!(equal_budget_cost(&[16, 16, 32]), 549);
        assert!(3 * 549 < 13u128.pow(3));
        assert_eq!(counterexample_unequal(12, 1.0), Err(Error::NotPrime(12)));
        assert!(counterexample_unequal(7, 1.0).is_err());
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let (r, e) = (1.7, 0.4);
        let h = phi_hessian(r, e);
        let d = 1e-4;
        let frr = (phi(r + d, e) - 2.0 * phi(r, e) + phi(r - d, e)) / (d * d);
        let fee = (phi(r, e + d) - 2.0 * phi(r, e) + phi(r, e - d)) / (d * d);
        let fre = (phi(r + d, e + d) - phi(r + d, e - d) - phi(r - d, e + d) + phi(r - d, e - d)) / (4.0 * d * d);
        assert!((frr / h[0][0] - 1.0).abs() < 1e-5);
        assert!((fee / h[1][1] - 1.0).abs() < 1e-5);
        assert!((fre / h[0][1] - 1.0).abs() < 1e-5);
    }
}
