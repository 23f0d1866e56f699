//! Exact divergences between sampling without and with replacement: the
//! relative entropy `D(H‖B) = Σ H log(H/B)` by direct enumeration, the same
//! quantity through the `U`-representation
//! `D = U(n,k) − Σᵢ E[U(ℓᵢ, Sᵢ)]`, and the total variation distance.

use serde::Serialize;

use crate::numerics::u_value;
use crate::sum::NeumaierSum;
use crate::urn::{
    compositions, log_hypergeometric, log_multinomial, marginal_hypergeometric, support, UrnSpec,
};
use crate::{Error, Result};

/// Exact divergence figures for one urn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceReport {
    /// Relative entropy D(H‖B) in nats, by direct support enumeration.
    pub kl: f64,
    /// Total variation distance ‖H−B‖ ∈ [0, 1].
    pub tv: f64,
    /// Number of points in the hypergeometric support.
    pub support_size: u64,
    /// Relative entropy recomputed through the U-representation.
    pub kl_via_u: f64,
}

/// Relative entropy `D(n,k,ℓ) = Σ_s H log(H/B)` in nats, summed over the
/// hypergeometric support in colexicographic order with compensated
/// accumulation. Zero-count colours are dropped before computation. Draws of
/// size 0 or 1 give exactly 0 (the two laws coincide), as does a one-colour
/// urn.
pub fn relative_entropy(spec: &UrnSpec) -> Result<f64> {
    let spec = spec.reduced();
    if spec.k <= 1 || spec.c() == 1 {
        return Ok(0.0);
    }
    let mut acc = NeumaierSum::new();
    for s in support(&spec) {
        let log_h = log_hypergeometric(&spec, &s).expect("enumerated point is in support");
        let log_b = log_multinomial(&spec, &s).expect("reduced spec has no zero colours");
        acc.add(log_h.exp() * (log_h - log_b));
    }
    let d = acc.value();
    // The sum is mathematically ≥ 0; absorb rounding-level negatives.
    Ok(if d < 0.0 && d > -1e-12 { 0.0 } else { d })
}

/// Expected value of `U(ℓᵢ, Sᵢ)` where `Sᵢ` is the colour-`i` count of a
/// `k`-draw, enumerated through the marginal hypergeometric law.
pub(crate) fn expected_u(n: u64, k: u64, ell_i: u64) -> Result<f64> {
    let lo = k.saturating_sub(n - ell_i);
    let hi = k.min(ell_i);
    let mut acc = NeumaierSum::new();
    for s_i in lo..=hi {
        let p = marginal_hypergeometric(n, k, ell_i, s_i)?;
        acc.add(p * u_value(ell_i as f64, s_i as f64)?);
    }
    Ok(acc.value())
}

/// Relative entropy through the identity `D = U(n,k) − Σᵢ E[U(ℓᵢ, Sᵢ)]`,
/// which trades the joint-support sum for `c` marginal sums. Agrees with
/// [`relative_entropy`] to well under 1e−9 on enumerable urns.
///
/// # Errors
/// `Domain` when some `ℓᵢ = 0`; reduce the spec first.
pub fn relative_entropy_via_u(spec: &UrnSpec) -> Result<f64> {
    if spec.ell.contains(&0) {
        return Err(Error::Domain(
            "U-representation needs every colour present; drop zero counts first".into(),
        ));
    }
    let mut acc = NeumaierSum::new();
    acc.add(u_value(spec.n as f64, spec.k as f64)?);
    for &l in &spec.ell {
        acc.add(-expected_u(spec.n, spec.k, l)?);
    }
    Ok(acc.value())
}

/// Total variation distance `(1/2) Σ_s |H − B|`, summed over every
/// composition of `k` (the multinomial support, a superset of the
/// hypergeometric one). Draws of size 0 or 1 give exactly 0.
pub fn total_variation(spec: &UrnSpec) -> Result<f64> {
    let spec = spec.reduced();
    if spec.k <= 1 || spec.c() == 1 {
        return Ok(0.0);
    }
    let mut acc = NeumaierSum::new();
    for s in compositions(spec.k, spec.c()) {
        let h = log_hypergeometric(&spec, &s).map_or(0.0, f64::exp);
        let b = log_multinomial(&spec, &s).expect("reduced spec has no zero colours");
        acc.add((h - b.exp()).abs());
    }
    Ok(0.5 * acc.value())
}

/// Computes all divergence figures for one urn in a single report.
pub fn divergence_report(spec: &UrnSpec) -> Result<DivergenceReport> {
    let reduced = spec.reduced();
    Ok(DivergenceReport {
        kl: relative_entropy(spec)?,
        tv: total_variation(spec)?,
        support_size: support(&reduced).count() as u64,
        kl_via_u: relative_entropy_via_u(&reduced)?,
    })
}
