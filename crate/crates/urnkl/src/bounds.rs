//! Closed-form bounds on the divergence between sampling with and without
//! replacement, the large-`n` limit expressions, and per-step diagnostics
//! that compare each intermediate inequality of the derivations against the
//! exactly enumerated quantity it bounds.
//!
//! Applicability is encoded as optional presence, never silent
//! extrapolation: each bound's stated hypotheses (`k ≤ n/2`, `ℓ ≤ n/2`,
//! `ℓᵢ ≥ 1`, `c = 2`, …) are enforced, and [`BoundReport`] simply omits a
//! bound that does not apply.

use serde::Serialize;

use crate::divergence::{expected_u, relative_entropy};
use crate::numerics::u_value;
use crate::urn::{central_moment, UrnSpec};
use crate::{digamma_family, Error, Result};

/// All closed-form bounds for one urn. Optional fields are present exactly
/// when their applicability conditions hold; `hm_upper` is `+∞` at `k = n`
/// (the bound degenerates there while Stam's stays finite).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub stam_upper: f64,
    pub stam_lower: f64,
    pub hm_upper: f64,
    pub hm_lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thm1_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prop12_upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_binary: Option<f64>,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Diaconis–Freedman total-variation bound ck/n.
    pub df_tv: f64,
    /// Diagnostic only, populated when `k > n/2`: whether the refined upper
    /// bound would still dominate the exact divergence outside its stated
    /// hypothesis. Never a bound — evidence about the hypothesis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thm1_would_hold: Option<bool>,
}

/// One proof-step comparison: a quantity computed exactly by enumeration and
/// the closed-form upper bound a derivation step asserts for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaPair {
    pub exact: f64,
    pub bound: f64,
}

impl LemmaPair {
    /// Whether `exact ≤ bound + slack`.
    pub fn holds(&self, slack: f64) -> bool {
        self.exact <= self.bound + slack
    }

    /// Bound minus exact; nonnegative when the step is verified.
    pub fn margin(&self) -> f64 {
        self.bound - self.exact
    }
}

/// Exact-vs-bound pairs for every intermediate step of the upper-bound
/// derivations, grouped by step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofStepDiagnostics {
    /// `U(n,k) − Σᵢ U(ℓᵢ, ℓᵢk/n)` (counts replaced by their means) against
    /// its Stirling-sandwich bound.
    pub mean_term: LemmaPair,
    /// `Σᵢ (−E U(ℓᵢ,Sᵢ) + U(ℓᵢ, ℓᵢk/n))` against the second-moment bound.
    pub fluctuation_term: LemmaPair,
    /// Per-colour `−E U(ℓᵢ,Sᵢ) + U(ℓᵢ, ℓᵢk/n)` against the digamma Taylor
    /// bound `−ψ′(ℓᵢ(1−k/n)+1)·M₂/2 + ψ″(ℓᵢ(1−k/n)+1)·M₃/6`.
    pub taylor_terms: Vec<LemmaPair>,
    /// Per-colour `−E U(ℓᵢ,Sᵢ)` against the Newton-series bound with
    /// falling-factorial moments; brackets read as zero for ℓᵢ ∈ {1,2} (the
    /// first is `−2 log 2` at ℓᵢ = 2).
    pub newton_terms: Vec<LemmaPair>,
    /// For `c = 2` only: the three-part split of `D` along the smaller
    /// colour ℓ, whose three bounds sum exactly to [`prop12_upper`].
    pub split_terms: Option<[LemmaPair; 3]>,
}

/// Stam's two-sided bound:
/// upper `(c−1)k(k−1)/(2(n−1)(n−k+1))`, lower `(c−1)k(k−1)/(4(n−1)²)`.
///
/// # Errors
/// `Domain` for `k > n` or `c < 2`.
pub fn stam_bounds(n: u64, k: u64, c: usize) -> Result<(f64, f64)> {
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    if c < 2 {
        return Err(Error::Domain(format!("need at least two colours, got {c}")));
    }
    if n == 1 {
        return Ok((0.0, 0.0)); // k ≤ 1, so both laws coincide
    }
    let (nf, kf, cf) = (n as f64, k as f64, c as f64);
    let upper = (cf - 1.0) * kf * (kf - 1.0) / (2.0 * (nf - 1.0) * (nf - kf + 1.0));
    let lower = (cf - 1.0) * kf * (kf - 1.0) / (4.0 * (nf - 1.0) * (nf - 1.0));
    Ok((upper, lower))
}

/// The Harremoës–Matúš bounds:
/// upper `(c−1)(log((n−1)/(n−k)) − k/n + 1/(n−k+1))` for `k ≤ n−1` (`+∞` at
/// `k = n`), lower `((c−1)/2)(r − 1 − log r)` with `r = (n−k+1)/(n−1)`.
///
/// The lower closed form is calibrated so that `r = 1` (value 0) at `k = 2`;
/// a single draw makes the two laws identical, so `k = 1` returns the
/// trivial bound 0 rather than the (positive) formula value.
///
/// # Errors
/// `Domain` for `k > n`, `k = 0`, `c < 2`, or `n < 2`.
pub fn hm_bounds(n: u64, k: u64, c: usize) -> Result<(f64, f64)> {
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    if k == 0 {
        return Err(Error::Domain("bounds are stated for k ≥ 1".into()));
    }
    if c < 2 {
        return Err(Error::Domain(format!("need at least two colours, got {c}")));
    }
    if n < 2 {
        return Err(Error::Domain("bounds need n ≥ 2".into()));
    }
    let (nf, kf, cf) = (n as f64, k as f64, c as f64);
    let r = (nf - kf + 1.0) / (nf - 1.0);
    let lower = if k == 1 {
        0.0
    } else {
        0.5 * (cf - 1.0) * (r - 1.0 - r.ln())
    };
    let upper = if k == n {
        f64::INFINITY
    } else {
        (cf - 1.0) * (((nf - 1.0) / (nf - kf)).ln() - kf / nf + 1.0 / (nf - kf + 1.0))
    };
    Ok((upper, lower))
}

fn thm1_formula(spec: &UrnSpec) -> Result<f64> {
    let (sigma1, sigma2) = sigma_stats(spec)?;
    let (nf, kf, cf) = (spec.n as f64, spec.k as f64, spec.c() as f64);
    let head = 0.5 * (cf - 1.0) * ((nf / (nf - kf)).ln() - kf / (nf - 1.0));
    let quad = kf * (2.0 * nf + 1.0) / (12.0 * nf * (nf - 1.0) * (nf - kf)) * sigma1;
    let cubic = (1.0 / (nf - kf).powi(3) - 1.0 / nf.powi(3)) / 360.0 * sigma2;
    Ok(head + quad + cubic)
}

/// The refined upper bound on `D(n,k,ℓ)` for any number of colours:
///
/// ```text
/// ((c−1)/2)(log(n/(n−k)) − k/(n−1))
///   + [k(2n+1)/(12n(n−1)(n−k))]·Σᵢ n/ℓᵢ
///   + (1/360)(1/(n−k)³ − 1/n³)·Σᵢ n³/ℓᵢ³
/// ```
///
/// # Errors
/// `Applicability` unless `1 ≤ k ≤ n/2`, `c ≥ 2`, and every `ℓᵢ ≥ 1`.
pub fn thm1_upper(spec: &UrnSpec) -> Result<f64> {
    if spec.c() < 2 {
        return Err(Error::Applicability(
            "refined bound needs at least two colours".into(),
        ));
    }
    if spec.k < 1 || 2 * spec.k > spec.n {
        return Err(Error::Applicability(format!(
            "refined bound needs 1 ≤ k ≤ n/2, got k = {}, n = {}",
            spec.k, spec.n
        )));
    }
    if spec.ell.contains(&0) {
        return Err(Error::Applicability(
            "refined bound needs every colour present".into(),
        ));
    }
    thm1_formula(spec)
}

/// The two log brackets of the Newton-series bound, with the conventions
/// that both are zero at ℓ = 1 and the second is zero at ℓ = 2.
fn newton_brackets(ell: u64) -> (f64, f64) {
    let lf = ell as f64;
    let first = if ell >= 2 {
        -lf * (lf - 1.0) * (lf / (lf - 1.0)).ln()
    } else {
        0.0
    };
    let second = if ell >= 3 {
        -lf * (lf - 1.0) * (lf - 2.0) * ((lf - 1.0) * (lf - 1.0) / (lf * (lf - 2.0))).ln()
    } else {
        0.0
    };
    (first, second)
}

/// The Newton-series upper bound on `−E U(ℓ, S)`:
/// `(k)₂/(2(n)₂)·[−ℓ(ℓ−1)log(ℓ/(ℓ−1))] + (k)₃/(6(n)₃)·[−ℓ(ℓ−1)(ℓ−2)log((ℓ−1)²/(ℓ(ℓ−2)))]`.
fn newton_bound(n: u64, k: u64, ell: u64) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    let (br1, br2) = newton_brackets(ell);
    let mut total = 0.0;
    if br1 != 0.0 {
        total += kf * (kf - 1.0) / (2.0 * nf * (nf - 1.0)) * br1;
    }
    if br2 != 0.0 {
        total += kf * (kf - 1.0) * (kf - 2.0) / (6.0 * nf * (nf - 1.0) * (nf - 2.0)) * br2;
    }
    total
}

/// The four-term two-colour upper bound on `D(n,k,(ℓ,n−ℓ))`:
///
/// ```text
/// ℓ[(1−k/n)log(1−k/n) + k/n − k/(2n(n−1))]
///   + kℓ/((n−1)(n−ℓ)(n−k))
///   − [k(k−1)/(2n(n−1))]·ℓ(ℓ−1)log(ℓ/(ℓ−1))
///   − [k(k−1)(k−2)/(6n(n−1)(n−2))]·ℓ(ℓ−1)(ℓ−2)log((ℓ−1)²/(ℓ(ℓ−2)))
/// ```
///
/// with the last two brackets read as zero at ℓ = 1 and the last one zero at
/// ℓ = 2.
///
/// # Errors
/// `Applicability` unless `1 ≤ ℓ ≤ n/2` and `1 ≤ k ≤ n/2`.
pub fn prop12_upper(n: u64, k: u64, ell: u64) -> Result<f64> {
    if ell < 1 || 2 * ell > n {
        return Err(Error::Applicability(format!(
            "two-colour bound needs 1 ≤ ℓ ≤ n/2, got ℓ = {ell}, n = {n}"
        )));
    }
    if k < 1 || 2 * k > n {
        return Err(Error::Applicability(format!(
            "two-colour bound needs 1 ≤ k ≤ n/2, got k = {k}, n = {n}"
        )));
    }
    let (nf, kf, lf) = (n as f64, k as f64, ell as f64);
    let ratio = 1.0 - kf / nf;
    let term1 = lf * (ratio * ratio.ln() + kf / nf - kf / (2.0 * nf * (nf - 1.0)));
    let term2 = kf * lf / ((nf - 1.0) * (nf - lf) * (nf - kf));
    Ok(term1 + term2 + newton_bound(n, k, ell))
}

/// Exact closed form of `D(n,k,(1,n−1))`:
/// `(1−k/n)log(1−k/n) − k(1−1/n)log(1−1/n)`, with `0·log 0 = 0` at `k = n`.
///
/// # Errors
/// `Domain` for `k > n`.
pub fn exact_binary_divergence(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    let (nf, kf) = (n as f64, k as f64);
    let head = if k == n {
        0.0
    } else {
        let ratio = (nf - kf) / nf;
        ratio * ratio.ln()
    };
    let tail = if n == 1 {
        0.0
    } else {
        kf * ((nf - 1.0) / nf) * ((nf - 1.0) / nf).ln()
    };
    Ok(head - tail)
}

/// The two composition statistics the refined bound depends on:
/// `(Σᵢ n/ℓᵢ, Σᵢ n³/ℓᵢ³)`. The first is at least `c²`, with equality for
/// balanced urns.
///
/// # Errors
/// `Domain` if any `ℓᵢ = 0`.
pub fn sigma_stats(spec: &UrnSpec) -> Result<(f64, f64)> {
    if spec.ell.contains(&0) {
        return Err(Error::Domain(
            "composition statistics need every colour present".into(),
        ));
    }
    let nf = spec.n as f64;
    let mut sigma1 = 0.0;
    let mut sigma2 = 0.0;
    for &l in &spec.ell {
        let r = nf / l as f64;
        sigma1 += r;
        sigma2 += r * r * r;
    }
    Ok((sigma1, sigma2))
}

/// The two sampling-fraction limits of `D` as `n → ∞` with `k/n → s`:
/// `balanced = ((c−1)/2)(−log(1−s) − s)` for urns with all `ℓᵢ = n/c`, and
/// `unbalanced = s + (1−s)log(1−s)` for the extreme case `ℓ = (1, n−1)`.
///
/// # Errors
/// `Domain` for `s ∉ (0,1)`.
pub fn limit_expressions(c: usize, s: f64) -> Result<(f64, f64)> {
    if !(0.0 < s && s < 1.0) {
        return Err(Error::Domain(format!(
            "sampling fraction must lie in (0,1), got {s}"
        )));
    }
    let cf = c as f64;
    let balanced = 0.5 * (cf - 1.0) * (-(1.0 - s).ln() - s);
    let unbalanced = s + (1.0 - s) * (1.0 - s).ln();
    Ok((balanced, unbalanced))
}

/// The sampling fraction at which the balanced and unbalanced `c = 2` limits
/// cross, found by bisection on `[0.5, 0.99]` (the difference changes sign
/// there: the unbalanced limit is larger at 0.5 and smaller at 0.99).
pub fn crossover_s_star() -> f64 {
    let f = |s: f64| {
        let (balanced, unbalanced) = limit_expressions(2, s).expect("s in (0,1)");
        unbalanced - balanced
    };
    let mut lo = 0.5;
    let mut hi = 0.99;
    debug_assert!(f(lo) > 0.0 && f(hi) < 0.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Evaluates every intermediate inequality used in the upper-bound
/// derivations at `spec`, returning (exact, bound) pairs; see
/// [`ProofStepDiagnostics`] for the grouping. The two-colour split is
/// reported only when `c = 2`.
///
/// # Errors
/// `Applicability` unless `1 ≤ k ≤ n/2`, `c ≥ 2`, and every `ℓᵢ ≥ 1`.
pub fn proof_step_diagnostics(spec: &UrnSpec) -> Result<ProofStepDiagnostics> {
    let c = spec.c();
    if c < 2 {
        return Err(Error::Applicability(
            "diagnostics need at least two colours".into(),
        ));
    }
    if spec.k < 1 || 2 * spec.k > spec.n {
        return Err(Error::Applicability(format!(
            "diagnostics need 1 ≤ k ≤ n/2, got k = {}, n = {}",
            spec.k, spec.n
        )));
    }
    if spec.ell.contains(&0) {
        return Err(Error::Applicability(
            "diagnostics need every colour present".into(),
        ));
    }

    let (n, k) = (spec.n, spec.k);
    let (nf, kf, cf) = (n as f64, k as f64, c as f64);
    let u_nk = u_value(nf, kf)?;
    let mut u_at_mean = Vec::with_capacity(c);
    let mut eu = Vec::with_capacity(c);
    for &l in &spec.ell {
        let lf = l as f64;
        u_at_mean.push(u_value(lf, lf * kf / nf)?);
        eu.push(expected_u(n, k, l)?);
    }
    let (sigma1, _) = sigma_stats(spec)?;

    // Counts replaced by their means, against the Stirling-sandwich bound.
    let mean_exact = u_nk - u_at_mean.iter().sum::<f64>();
    let inv_cubes: f64 = spec.ell.iter().map(|&l| (l as f64).powi(-3)).sum();
    let mean_bound = 0.5 * (cf - 1.0) * (nf / (nf - kf)).ln()
        + kf / (12.0 * nf * (nf - kf)) * (1.0 - sigma1)
        + (nf.powi(3) / (nf - kf).powi(3) - 1.0) / 360.0 * inv_cubes;

    // Aggregate fluctuation around the mean, against the moment bound.
    let fluct_exact: f64 = (0..c).map(|i| -eu[i] + u_at_mean[i]).sum();
    let fluct_bound =
        -kf * (cf - 1.0) / (2.0 * (nf - 1.0)) + kf / (4.0 * (nf - kf) * (nf - 1.0)) * (sigma1 - cf);

    // Per-colour digamma Taylor bound.
    let mut taylor_terms = Vec::with_capacity(c);
    for (i, &l) in spec.ell.iter().enumerate() {
        let lf = l as f64;
        let x = lf * (1.0 - kf / nf) + 1.0;
        let m2 = central_moment(n, k, l, 2)?;
        let m3 = if n > 2 {
            central_moment(n, k, l, 3)?
        } else {
            0.0
        };
        let bound = -digamma_family(x, 1)? * m2 / 2.0 + digamma_family(x, 2)? * m3 / 6.0;
        taylor_terms.push(LemmaPair {
            exact: -eu[i] + u_at_mean[i],
            bound,
        });
    }

    // Per-colour Newton-series bound.
    let newton_terms: Vec<LemmaPair> = (0..c)
        .map(|i| LemmaPair {
            exact: -eu[i],
            bound: newton_bound(n, k, spec.ell[i]),
        })
        .collect();

    // Two-colour three-part split along the smaller colour.
    let split_terms = if c == 2 {
        let ell = spec.ell[0].min(spec.ell[1]);
        let lf = ell as f64;
        let rest = n - ell;
        let rf = rest as f64;
        let u_rest_mean = u_value(rf, rf * kf / nf)?;
        let ratio = 1.0 - kf / nf;
        let p1 = LemmaPair {
            exact: u_nk - u_rest_mean,
            bound: lf * (ratio * ratio.ln() + kf / nf),
        };
        let p2 = LemmaPair {
            exact: -expected_u(n, k, ell)?,
            bound: newton_bound(n, k, ell),
        };
        let p3 = LemmaPair {
            exact: u_rest_mean - expected_u(n, k, rest)?,
            bound: -kf * lf / (2.0 * nf * (nf - 1.0))
                + kf * lf / ((nf - 1.0) * (nf - lf) * (nf - kf)),
        };
        Some([p1, p2, p3])
    } else {
        None
    };

    Ok(ProofStepDiagnostics {
        mean_term: LemmaPair {
            exact: mean_exact,
            bound: mean_bound,
        },
        fluctuation_term: LemmaPair {
            exact: fluct_exact,
            bound: fluct_bound,
        },
        taylor_terms,
        newton_terms,
        split_terms,
    })
}

/// Evaluates every applicable bound for `spec`. Zero-count colours are
/// dropped first; with a single remaining colour or `k = 0` the two laws
/// coincide and the always-present bounds degenerate to zero.
pub fn bound_report(spec: &UrnSpec) -> Result<BoundReport> {
    let spec = spec.reduced();
    let c = spec.c();
    let (n, k) = (spec.n, spec.k);
    let (sigma1, sigma2) = sigma_stats(&spec)?;
    let df_tv = c as f64 * k as f64 / n as f64;

    let (stam_upper, stam_lower, hm_upper, hm_lower) = if c < 2 || k == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let (su, sl) = stam_bounds(n, k, c)?;
        let (hu, hl) = hm_bounds(n, k, c)?;
        (su, sl, hu, hl)
    };

    let in_half_range = k >= 1 && 2 * k <= n;
    let thm1 = if c >= 2 && in_half_range {
        Some(thm1_upper(&spec)?)
    } else {
        None
    };
    let thm1_would_hold = if c >= 2 && k >= 1 && 2 * k > n {
        let formula = thm1_formula(&spec)?;
        let exact = relative_entropy(&spec)?;
        Some(exact <= formula + 1e-12)
    } else {
        None
    };
    let prop12 = if c == 2 && in_half_range {
        Some(prop12_upper(n, k, spec.ell[0].min(spec.ell[1]))?)
    } else {
        None
    };
    let exact_binary = if c == 2 && spec.ell.contains(&1) && n >= 2 {
        Some(exact_binary_divergence(n, k)?)
    } else {
        None
    };

    Ok(BoundReport {
        stam_upper,
        stam_lower,
        hm_upper,
        hm_lower,
        thm1_upper: thm1,
        prop12_upper: prop12,
        exact_binary,
        sigma1,
        sigma2,
        df_tv,
        thm1_would_hold,
    })
}
