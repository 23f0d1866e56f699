//! The urn model: problem specification, support enumeration, the two
//! sampling p.m.f.s (without replacement H, with replacement B), marginal
//! laws, and the factorial/central moment formulas.
//!
//! All p.m.f.s are computed as `exp` of log-domain sums of [`log_gamma`]
//! terms, never by multiplying binomial coefficients, so populations up to
//! about a million balls stay representable.

use serde::Serialize;

use crate::numerics::log_gamma;
use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// An urn with `n` balls split into colours (`ell[i]` balls of colour `i`),
/// from which `k` balls are drawn.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct UrnSpec {
    pub n: u64,
    pub k: u64,
    pub ell: Vec<u64>,
}

impl UrnSpec {
    /// Validates `Σ ell = n ≥ 1`, `0 ≤ k ≤ n`, and at least one colour.
    /// Zero-count colours are permitted; operations that need strictly
    /// positive colour counts reduce via [`UrnSpec::reduced`].
    pub fn new(n: u64, k: u64, ell: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec(
                "urn must contain at least one ball".into(),
            ));
        }
        if ell.is_empty() {
            return Err(Error::InvalidSpec("urn needs at least one colour".into()));
        }
        let total: u64 = ell.iter().sum();
        if total != n {
            return Err(Error::InvalidSpec(format!(
                "colour counts sum to {total}, expected n = {n}"
            )));
        }
        if k > n {
            return Err(Error::InvalidSpec(format!(
                "cannot draw k = {k} balls from n = {n}"
            )));
        }
        Ok(Self { n, k, ell })
    }

    /// Number of colours, including any with zero balls.
    pub fn c(&self) -> usize {
        self.ell.len()
    }

    /// The same urn with zero-count colours dropped. Counts of absent
    /// colours are deterministically zero, so every distribution-level
    /// quantity is unchanged by the reduction.
    pub fn reduced(&self) -> UrnSpec {
        if self.ell.iter().all(|&l| l > 0) {
            return self.clone();
        }
        UrnSpec {
            n: self.n,
            k: self.k,
            ell: self.ell.iter().copied().filter(|&l| l > 0).collect(),
        }
    }
}

/// Per-colour draw counts `s`, summing to the draw size of the associated
/// urn.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CountVector(pub Vec<u64>);

impl CountVector {
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Iterator over the hypergeometric support in colexicographic order: all
/// `s` with `Σ sᵢ = k` and `0 ≤ sᵢ ≤ ℓᵢ`, ordered by the reversed vector.
///
/// The first element pushes as much mass as possible onto the early
/// coordinates; each step finds the lowest coordinate `j ≥ 1` that can
/// absorb one more unit from below, increments it, and re-packs the prefix.
pub struct Support {
    bounds: Vec<u64>,
    state: Option<Vec<u64>>,
}

fn greedy_prefix_fill(state: &mut [u64], bounds: &[u64], mut remaining: u64) {
    for (slot, &cap) in state.iter_mut().zip(bounds) {
        let take = remaining.min(cap);
        *slot = take;
        remaining -= take;
    }
    debug_assert_eq!(remaining, 0, "prefix cannot absorb the remaining mass");
}

impl Iterator for Support {
    type Item = CountVector;

    fn next(&mut self) -> Option<CountVector> {
        let state = self.state.as_mut()?;
        let item = CountVector(state.clone());
        // Find the lowest j ≥ 1 that can take one unit from the prefix mass.
        let mut prefix: u64 = state[0];
        let mut advanced = false;
        for j in 1..state.len() {
            if state[j] < self.bounds[j] && prefix >= 1 {
                state[j] += 1;
                let (head, _) = state.split_at_mut(j);
                greedy_prefix_fill(head, &self.bounds[..j], prefix - 1);
                advanced = true;
                break;
            }
            prefix += state[j];
        }
        if !advanced {
            self.state = None;
        }
        Some(item)
    }
}

/// Enumerates the support of the hypergeometric law of `spec`: every vector
/// of per-colour counts that a draw of `k` balls can realize, each exactly
/// once, in colexicographic order.
pub fn support(spec: &UrnSpec) -> Support {
    let capacity: u64 = spec.ell.iter().sum();
    let state = if spec.k <= capacity {
        let mut first = vec![0u64; spec.ell.len()];
        greedy_prefix_fill(&mut first, &spec.ell, spec.k);
        Some(first)
    } else {
        None
    };
    Support {
        bounds: spec.ell.clone(),
        state,
    }
}

/// Enumerates every composition of `total` into `parts` nonnegative parts
/// (colex order): the support of an unconstrained count vector, used for the
/// multinomial side and for mixture atoms.
pub(crate) fn compositions(total: u64, parts: usize) -> Support {
    let mut first = vec![0u64; parts];
    first[0] = total;
    Support {
        bounds: vec![total; parts],
        state: Some(first),
    }
}

/// log C(a, b) for integers 0 ≤ b ≤ a.
///
/// When min(b, a−b) is moderate, the log-gamma route cancels two huge values
/// to a small one and the absolute error can reach ~|log Γ(a+1)|·ε, which is
/// visible at a ≈ 500. Multiplying the ratios (a−b+i)/i directly keeps the
/// error at a few ulps of the answer itself, so prefer it whenever the
/// product stays short.
pub(crate) fn log_choose(a: u64, b: u64) -> f64 {
    debug_assert!(b <= a);
    let b = b.min(a - b);
    if b <= 256 {
        // Every ratio (a−b+i)/i is ≥ 1, so the running product only grows;
        // renormalize by an exact power of two before it can overflow. The
        // product carries ~2 ulp of relative error per step, so the final
        // log is good to ~b·ε — independent of how large log Γ(a+1) is.
        let mut prod = 1.0_f64;
        let mut halvings = 0u32;
        for i in 1..=b {
            prod *= ((a - b + i) as f64) / (i as f64);
            if prod > 1e280 {
                prod *= 2.0_f64.powi(-512);
                halvings += 512;
            }
        }
        prod.ln() + f64::from(halvings) * core::f64::consts::LN_2
    } else {
        let lg = |x: u64| log_gamma(x as f64).expect("positive integer argument");
        lg(a + 1) - lg(b + 1) - lg(a - b + 1)
    }
}

fn check_counts(spec: &UrnSpec, s: &CountVector) -> Result<()> {
    if s.0.len() != spec.ell.len() {
        return Err(Error::Domain(format!(
            "count vector has {} entries, spec has {} colours",
            s.0.len(),
            spec.ell.len()
        )));
    }
    let total = s.total();
    if total != spec.k {
        return Err(Error::Domain(format!(
            "count vector sums to {total}, expected k = {}",
            spec.k
        )));
    }
    Ok(())
}

/// Log of the hypergeometric p.m.f., or `None` when `s` is outside the
/// support (some `sᵢ > ℓᵢ`).
pub(crate) fn log_hypergeometric(spec: &UrnSpec, s: &CountVector) -> Option<f64> {
    let mut acc = NeumaierSum::new();
    for (&l, &si) in spec.ell.iter().zip(&s.0) {
        if si > l {
            return None;
        }
        acc.add(log_choose(l, si));
    }
    acc.add(-log_choose(spec.n, spec.k));
    Some(acc.value())
}

/// Log of the multinomial p.m.f., or `None` when the probability is zero
/// (`sᵢ > 0` for an absent colour). The with-replacement law is meaningful
/// for any draw count, so this takes the pieces rather than a validated
/// spec.
pub(crate) fn log_multinomial_parts(n: u64, k: u64, ell: &[u64], s: &[u64]) -> Option<f64> {
    debug_assert_eq!(s.iter().sum::<u64>(), k);
    let nf = n as f64;
    let mut acc = NeumaierSum::new();
    // Telescope the coefficient, k!/Π sᵢ! = Π C(remᵢ, sᵢ), so each factor
    // goes through the short-sum path of `log_choose` instead of cancelling
    // log-gamma values that dwarf the result.
    let mut rem = k;
    for (&l, &si) in ell.iter().zip(s) {
        if si == 0 {
            continue; // covers the 0⁰ = 1 convention for ℓᵢ = 0
        }
        if l == 0 {
            return None;
        }
        acc.add(log_choose(rem, si));
        rem -= si;
        acc.add(si as f64 * ((l as f64).ln() - nf.ln()));
    }
    Some(acc.value())
}

pub(crate) fn log_multinomial(spec: &UrnSpec, s: &CountVector) -> Option<f64> {
    log_multinomial_parts(spec.n, spec.k, &spec.ell, &s.0)
}

/// The multivariate hypergeometric p.m.f.
/// `H(n,k,ℓ;s) = Πᵢ C(ℓᵢ, sᵢ) / C(n,k)`: the law of the colour counts when
/// `k` balls are drawn without replacement.
///
/// Returns 0 for vectors outside the support (some `sᵢ > ℓᵢ`).
///
/// # Errors
/// `Domain` when `Σ sᵢ ≠ k` or the vector length does not match.
pub fn hypergeometric_pmf(spec: &UrnSpec, s: &CountVector) -> Result<f64> {
    check_counts(spec, s)?;
    Ok(log_hypergeometric(spec, s).map_or(0.0, f64::exp))
}

/// The multinomial p.m.f. `B(n,k,ℓ;s) = C(k; s) Πᵢ (ℓᵢ/n)^{sᵢ}`: the law of
/// the colour counts when `k` balls are drawn with replacement. `0⁰ = 1`
/// when a colour is absent and not drawn.
///
/// # Errors
/// `Domain` when `Σ sᵢ ≠ k` or the vector length does not match.
pub fn multinomial_pmf(spec: &UrnSpec, s: &CountVector) -> Result<f64> {
    check_counts(spec, s)?;
    Ok(log_multinomial(spec, s).map_or(0.0, f64::exp))
}

/// Marginal law of a single colour count: the probability that a draw of `k`
/// from `n` contains exactly `s_i` of the `ell_i` balls of colour `i`.
/// Equals the two-colour hypergeometric on `(ℓᵢ, n−ℓᵢ)`. Returns 0 outside
/// the support.
///
/// # Errors
/// `Domain` when `ell_i > n` or `k > n`.
pub fn marginal_hypergeometric(n: u64, k: u64, ell_i: u64, s_i: u64) -> Result<f64> {
    if ell_i > n || k > n {
        return Err(Error::Domain(format!(
            "marginal requires ell_i ≤ n and k ≤ n, got n = {n}, k = {k}, ell_i = {ell_i}"
        )));
    }
    if s_i > k || s_i > ell_i || k - s_i > n - ell_i {
        return Ok(0.0);
    }
    Ok((log_choose(ell_i, s_i) + log_choose(n - ell_i, k - s_i) - log_choose(n, k)).exp())
}

fn falling(x: f64, r: u32) -> f64 {
    (0..r).fold(1.0, |acc, j| acc * (x - j as f64))
}

/// `r`-th factorial moment of the colour-`i` count under the hypergeometric:
/// `E[(Sᵢ)_r] = (ℓᵢ)_r (k)_r / (n)_r`. Returns 1 for `r = 0` and 0 when `r`
/// exceeds `min(k, ℓᵢ)`.
pub fn factorial_moment(n: u64, k: u64, ell_i: u64, r: u32) -> f64 {
    if r as u64 > k.min(ell_i) {
        return 0.0;
    }
    falling(ell_i as f64, r) * falling(k as f64, r) / falling(n as f64, r)
}

/// Central moment `E[(Sᵢ − kℓᵢ/n)^order]` of the colour-`i` count, for
/// `order ∈ {2, 3}`, in closed form:
///
/// ```text
/// M₂ = k(n−k)ℓᵢ(n−ℓᵢ) / (n²(n−1))
/// M₃ = kℓᵢ(n−k)(n−2k)(n−ℓᵢ)(n−2ℓᵢ) / (n³(n−1)(n−2))
/// ```
///
/// # Errors
/// `Domain` for orders outside {2, 3}, and for `n ≤ 2` at order 3.
pub fn central_moment(n: u64, k: u64, ell_i: u64, order: u32) -> Result<f64> {
    let (nf, kf, lf) = (n as f64, k as f64, ell_i as f64);
    match order {
        2 => {
            if n == 1 {
                return Ok(0.0); // a single ball leaves no variance
            }
            Ok(kf * (nf - kf) * lf * (nf - lf) / (nf * nf * (nf - 1.0)))
        }
        3 => {
            if n <= 2 {
                return Err(Error::Domain(format!(
                    "third central moment needs n > 2, got n = {n}"
                )));
            }
            Ok(
                kf * lf * (nf - kf) * (nf - 2.0 * kf) * (nf - lf) * (nf - 2.0 * lf)
                    / (nf * nf * nf * (nf - 1.0) * (nf - 2.0)),
            )
        }
        other => Err(Error::Domain(format!(
            "central_moment supports orders 2 and 3, got {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn spec(n: u64, k: u64, ell: &[u64]) -> UrnSpec {
        UrnSpec::new(n, k, ell.to_vec()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(UrnSpec::new(4, 2, vec![2, 2]).is_ok());
        assert!(UrnSpec::new(4, 5, vec![2, 2]).is_err());
        assert!(UrnSpec::new(4, 2, vec![2, 1]).is_err());
        assert!(UrnSpec::new(0, 0, vec![]).is_err());
        assert!(UrnSpec::new(3, 1, vec![]).is_err());
    }

    #[test]
    fn reduced_drops_zero_colours() {
        let s = spec(5, 2, &[2, 0, 3]);
        assert_eq!(s.reduced().ell, vec![2, 3]);
        assert_eq!(s.c(), 3);
        assert_eq!(s.reduced().c(), 2);
    }

    #[test]
    fn support_two_colours() {
        let got: Vec<_> = support(&spec(4, 2, &[2, 2])).map(|cv| cv.0).collect();
        assert_eq!(got, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn support_single_draw() {
        let got: Vec<_> = support(&spec(2, 1, &[1, 1])).map(|cv| cv.0).collect();
        assert_eq!(got, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn support_count_balanced_hundred() {
        assert_eq!(support(&spec(100, 30, &[50, 50])).count(), 31);
    }

    #[test]
    fn support_respects_tight_bounds() {
        let got: Vec<_> = support(&spec(4, 3, &[1, 2, 1])).map(|cv| cv.0).collect();
        assert_eq!(got, vec![vec![1, 2, 0], vec![1, 1, 1], vec![0, 2, 1]]);
        // Colex order: compare reversed vectors lexicographically.
        let mut sorted = got.clone();
        sorted.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
        assert_eq!(got, sorted);
    }

    #[test]
    fn support_zero_draw_is_zero_vector() {
        let got: Vec<_> = support(&spec(3, 0, &[1, 2])).map(|cv| cv.0).collect();
        assert_eq!(got, vec![vec![0, 0]]);
    }

    #[test]
    fn hypergeometric_examples() {
        let s = spec(4, 2, &[2, 2]);
        assert_relative_eq!(
            hypergeometric_pmf(&s, &CountVector(vec![1, 1])).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-13
        );
        let all = spec(7, 7, &[3, 4]);
        assert_relative_eq!(
            hypergeometric_pmf(&all, &CountVector(vec![3, 4])).unwrap(),
            1.0,
            max_relative = 1e-13
        );
        let half = spec(2, 1, &[1, 1]);
        assert_relative_eq!(
            hypergeometric_pmf(&half, &CountVector(vec![1, 0])).unwrap(),
            0.5,
            max_relative = 1e-13
        );
    }

    #[test]
    fn hypergeometric_outside_support_is_zero() {
        let s = spec(4, 2, &[1, 3]);
        assert_eq!(
            hypergeometric_pmf(&s, &CountVector(vec![2, 0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn hypergeometric_rejects_wrong_total() {
        let s = spec(4, 2, &[2, 2]);
        assert!(hypergeometric_pmf(&s, &CountVector(vec![1, 2])).is_err());
        assert!(hypergeometric_pmf(&s, &CountVector(vec![2])).is_err());
    }

    #[test]
    fn multinomial_examples() {
        let half = spec(2, 1, &[1, 1]);
        assert_relative_eq!(
            multinomial_pmf(&half, &CountVector(vec![1, 0])).unwrap(),
            0.5,
            max_relative = 1e-13
        );
        let s = spec(4, 2, &[2, 2]);
        assert_relative_eq!(
            multinomial_pmf(&s, &CountVector(vec![1, 1])).unwrap(),
            0.5,
            max_relative = 1e-13
        );
        let skew = spec(4, 2, &[1, 3]);
        assert_relative_eq!(
            multinomial_pmf(&skew, &CountVector(vec![2, 0])).unwrap(),
            1.0 / 16.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn multinomial_zero_colour_conventions() {
        let s = spec(4, 2, &[0, 4]);
        // Colour absent and never drawn: 0⁰ = 1 leaves the mass elsewhere.
        assert_relative_eq!(
            multinomial_pmf(&s, &CountVector(vec![0, 2])).unwrap(),
            1.0,
            max_relative = 1e-13
        );
        assert_eq!(multinomial_pmf(&s, &CountVector(vec![1, 1])).unwrap(), 0.0);
    }

    #[test]
    fn pmf_normalization_small_grid() {
        for (n, k, ell) in [
            (4u64, 2u64, vec![2u64, 2]),
            (10, 4, vec![3, 7]),
            (10, 3, vec![2, 3, 5]),
            (9, 5, vec![1, 3, 5]),
            (8, 8, vec![2, 2, 4]),
            (6, 2, vec![0, 2, 4]),
        ] {
            let s = UrnSpec::new(n, k, ell).unwrap();
            let mut h_total = 0.0;
            for cv in support(&s) {
                h_total += hypergeometric_pmf(&s, &cv).unwrap();
            }
            assert_abs_diff_eq!(h_total, 1.0, epsilon = 1e-12);

            // B-normalization over all compositions of k: enumerate via the
            // unconstrained-bounds trick (bounds = k in every colour).
            let free = UrnSpec {
                n: s.n,
                k: s.k,
                ell: vec![s.k; s.ell.len()],
            };
            let mut b_total = 0.0;
            for cv in support(&free) {
                b_total += multinomial_pmf(&s, &cv).unwrap();
            }
            assert_abs_diff_eq!(b_total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn marginal_examples() {
        assert_relative_eq!(
            marginal_hypergeometric(4, 2, 2, 1).unwrap(),
            2.0 / 3.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            marginal_hypergeometric(10, 10, 3, 3).unwrap(),
            1.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            marginal_hypergeometric(10, 4, 3, 0).unwrap(),
            1.0 / 6.0,
            max_relative = 1e-13
        );
        assert_eq!(marginal_hypergeometric(10, 4, 3, 4).unwrap(), 0.0);
        assert!(marginal_hypergeometric(10, 11, 3, 1).is_err());
    }

    #[test]
    fn marginal_matches_two_colour_reduction() {
        let n = 11;
        let k = 5;
        let ell_i = 4;
        let two = spec(n, k, &[ell_i, n - ell_i]);
        for s_i in 0..=k.min(ell_i) {
            let direct = marginal_hypergeometric(n, k, ell_i, s_i).unwrap();
            let reduced = hypergeometric_pmf(&two, &CountVector(vec![s_i, k - s_i])).unwrap();
            assert_abs_diff_eq!(direct, reduced, epsilon = 1e-14);
        }
    }

    #[test]
    fn factorial_moment_examples() {
        assert_relative_eq!(factorial_moment(10, 4, 3, 1), 1.2, max_relative = 1e-13);
        assert_relative_eq!(factorial_moment(10, 4, 3, 2), 0.8, max_relative = 1e-13);
        assert_eq!(factorial_moment(10, 4, 3, 0), 1.0);
        assert_eq!(factorial_moment(10, 4, 3, 4), 0.0); // r > ℓᵢ
        assert_eq!(factorial_moment(10, 2, 5, 3), 0.0); // r > k
    }

    #[test]
    fn factorial_moment_matches_enumeration() {
        let n = 10;
        let k = 4;
        let ell_i = 3;
        for r in 0..=3u32 {
            let mut expect = 0.0;
            for s_i in 0..=k {
                let p = marginal_hypergeometric(n, k, ell_i, s_i).unwrap();
                expect += p * falling(s_i as f64, r);
            }
            assert_abs_diff_eq!(factorial_moment(n, k, ell_i, r), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn central_moment_examples() {
        assert_relative_eq!(
            central_moment(10, 4, 3, 2).unwrap(),
            0.56,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            central_moment(10, 4, 3, 3).unwrap(),
            0.056,
            max_relative = 1e-13
        );
        assert_eq!(central_moment(10, 5, 3, 3).unwrap(), 0.0); // n = 2k kills M₃
        assert!(central_moment(2, 1, 1, 3).is_err());
        assert!(central_moment(10, 4, 3, 4).is_err());
    }

    #[test]
    fn central_moment_matches_enumeration() {
        let n = 10;
        let k = 4;
        let ell_i = 3;
        let mean = k as f64 * ell_i as f64 / n as f64;
        for order in [2u32, 3] {
            let mut expect = 0.0;
            for s_i in 0..=k {
                let p = marginal_hypergeometric(n, k, ell_i, s_i).unwrap();
                expect += p * (s_i as f64 - mean).powi(order as i32);
            }
            assert_abs_diff_eq!(
                central_moment(n, k, ell_i, order).unwrap(),
                expect,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn permutation_invariance() {
        let a = spec(10, 4, &[2, 3, 5]);
        let b = spec(10, 4, &[5, 2, 3]);
        let sa = CountVector(vec![1, 1, 2]);
        let sb = CountVector(vec![2, 1, 1]);
        assert_abs_diff_eq!(
            hypergeometric_pmf(&a, &sa).unwrap(),
            hypergeometric_pmf(&b, &sb).unwrap(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            multinomial_pmf(&a, &sa).unwrap(),
            multinomial_pmf(&b, &sb).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn complement_symmetry() {
        // Drawing k and leaving n−k are the same split of the urn.
        let s = spec(10, 4, &[2, 3, 5]);
        let flipped = spec(10, 6, &[2, 3, 5]);
        for cv in support(&s) {
            let complement = CountVector(s.ell.iter().zip(&cv.0).map(|(&l, &si)| l - si).collect());
            assert_abs_diff_eq!(
                hypergeometric_pmf(&s, &cv).unwrap(),
                hypergeometric_pmf(&flipped, &complement).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn marginal_consistency_with_joint() {
        let s = spec(10, 4, &[2, 3, 5]);
        for target in 0..=4u64 {
            let mut joint_sum = 0.0;
            for cv in support(&s) {
                if cv.0[1] == target {
                    joint_sum += hypergeometric_pmf(&s, &cv).unwrap();
                }
            }
            assert_abs_diff_eq!(
                joint_sum,
                marginal_hypergeometric(10, 4, 3, target).unwrap(),
                epsilon = 1e-13
            );
        }
    }
}
