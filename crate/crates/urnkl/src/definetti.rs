//! Finite exchangeable sequences as mixtures of without-replacement urns:
//! mixing measures over compositions, the induced marginal `P_k` and its
//! with-replacement counterpart `M_{k,μ}`, the chain inequality
//! `D(P_k‖M_{k,μ}) ≤ Σ_ℓ μ(ℓ)·D(n,k,ℓ) ≤ max_ℓ D(n,k,ℓ)`, prior closed-form
//! bounds, and monotonicity experiments.
//!
//! Distributions on length-`k` colour sequences are represented by type
//! classes (vectors of colour counts), never by the `c^k` individual
//! sequences: both `P_k` and `M_{k,μ}` are exchangeable, so per-sequence
//! probabilities are constant on each class and the KL divergence over
//! classes equals the sequence-level one.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::divergence::relative_entropy;
use crate::numerics::log_gamma;
use crate::sum::NeumaierSum;
use crate::urn::{compositions, log_hypergeometric, log_multinomial_parts, support, UrnSpec};
use crate::{Error, Result};

/// A probability measure over urn compositions of a fixed population size:
/// the mixing measure of an exchangeable model. Atoms with zero weight are
/// dropped; keys are compositions of `n` into `c` parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingMeasure {
    pub n: u64,
    pub c: usize,
    weights: BTreeMap<Vec<u64>, f64>,
}

impl MixingMeasure {
    /// Builds a measure from atom weights, requiring the total to be 1
    /// within 1e−12. Every key must be a composition of `n` into `c`
    /// nonnegative parts; weights must be nonnegative and finite.
    pub fn new(n: u64, c: usize, weights: BTreeMap<Vec<u64>, f64>) -> Result<Self> {
        if n == 0 || c < 2 {
            return Err(Error::InvalidSpec(
                "mixing measure needs n ≥ 1 and at least two colours".into(),
            ));
        }
        let mut total = NeumaierSum::new();
        let mut clean = BTreeMap::new();
        for (ell, w) in weights {
            if ell.len() != c {
                return Err(Error::InvalidSpec(format!(
                    "atom {ell:?} has {} parts, expected {c}",
                    ell.len()
                )));
            }
            if ell.iter().sum::<u64>() != n {
                return Err(Error::InvalidSpec(format!(
                    "atom {ell:?} does not sum to n = {n}"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "atom {ell:?} has invalid weight {w}"
                )));
            }
            total.add(w);
            if w > 0.0 {
                clean.insert(ell, w);
            }
        }
        if (total.value() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "atom weights sum to {}, expected 1",
                total.value()
            )));
        }
        if clean.is_empty() {
            return Err(Error::InvalidSpec("mixing measure has no support".into()));
        }
        Ok(Self {
            n,
            c,
            weights: clean,
        })
    }

    /// Like [`MixingMeasure::new`] but forgiving: a total within 1e−9 of 1
    /// is rescaled to exactly 1 (the policy for measures read from text
    /// files); anything further off is rejected.
    pub fn renormalized(n: u64, c: usize, weights: BTreeMap<Vec<u64>, f64>) -> Result<Self> {
        let total: f64 = weights.values().sum();
        if !total.is_finite() || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSpec(format!(
                "atom weights sum to {total}, too far from 1 to renormalize"
            )));
        }
        let rescaled = weights
            .into_iter()
            .map(|(ell, w)| (ell, w / total))
            .collect();
        Self::new(n, c, rescaled)
    }

    /// The measure concentrated on a single composition.
    pub fn point_mass(n: u64, ell: Vec<u64>) -> Result<Self> {
        let c = ell.len();
        let mut weights = BTreeMap::new();
        weights.insert(ell, 1.0);
        Self::new(n, c, weights)
    }

    /// Atom weights, keyed by composition, in lexicographic key order.
    pub fn weights(&self) -> &BTreeMap<Vec<u64>, f64> {
        &self.weights
    }
}

/// An exchangeable distribution on length-`k` colour sequences, stored as
/// total mass per type class (per composition `s` of `k`). The mass of a
/// class is `C(k; s)` times the constant per-sequence probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeClassPmf {
    pub k: u64,
    pub c: usize,
    mass: BTreeMap<Vec<u64>, f64>,
    /// Set when the draw count exceeds the population size of the mixing
    /// measure — meaningful only for the with-replacement side.
    pub beyond_population: bool,
}

impl TypeClassPmf {
    /// Class masses keyed by composition of `k`, in lexicographic key order.
    /// Every composition is present, including zero-mass classes.
    pub fn mass(&self) -> &BTreeMap<Vec<u64>, f64> {
        &self.mass
    }
}

fn empty_classes(k: u64, c: usize) -> BTreeMap<Vec<u64>, f64> {
    compositions(k, c).map(|cv| (cv.0, 0.0)).collect()
}

/// The mixing measure of `n` independent draws from a fixed colour
/// distribution `p`: multinomial weights over compositions. Colours with
/// `pᵢ = 0` simply never occur.
///
/// # Errors
/// `Domain` unless `p` has ≥ 2 entries, all in `[0,1]`, summing to 1 within
/// 1e−12.
pub fn mixing_from_iid(p: &[f64], n: u64) -> Result<MixingMeasure> {
    if p.len() < 2 {
        return Err(Error::Domain("need at least two colours".into()));
    }
    if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::Domain(format!("invalid probability vector {p:?}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    let c = p.len();
    let ln_n_factorial = log_gamma(n as f64 + 1.0)?;
    let mut weights = BTreeMap::new();
    'atoms: for ell in compositions(n, c) {
        let mut log_w = ln_n_factorial;
        for (&li, &pi) in ell.0.iter().zip(p) {
            if li == 0 {
                continue;
            }
            if pi == 0.0 {
                continue 'atoms;
            }
            log_w += li as f64 * pi.ln() - log_gamma(li as f64 + 1.0)?;
        }
        weights.insert(ell.0, log_w.exp());
    }
    MixingMeasure::new(n, c, weights)
}

/// Marginal law of the first `k` coordinates of the exchangeable sequence:
/// `P_k(class s) = Σ_ℓ μ(ℓ)·H(n,k,ℓ;s)`.
///
/// # Errors
/// `Domain` for `k > n` — there is no without-replacement draw that long.
pub fn pk_from_mixture(mu: &MixingMeasure, k: u64) -> Result<TypeClassPmf> {
    if k > mu.n {
        return Err(Error::Domain(format!(
            "cannot draw k = {k} from a population of n = {}",
            mu.n
        )));
    }
    let mut mass = empty_classes(k, mu.c);
    for (ell, &w) in &mu.weights {
        let spec = UrnSpec::new(mu.n, k, ell.clone())?;
        for s in support(&spec) {
            let h = log_hypergeometric(&spec, &s)
                .expect("enumerated point is in support")
                .exp();
            *mass
                .get_mut(&s.0)
                .expect("support is a subset of compositions") += w * h;
        }
    }
    Ok(TypeClassPmf {
        k,
        c: mu.c,
        mass,
        beyond_population: false,
    })
}

/// The with-replacement counterpart: `M_{k,μ}(class s) = Σ_ℓ μ(ℓ)·B(n,k,ℓ;s)`,
/// i.e. each atom contributes the multinomial with cell probabilities
/// `ℓᵢ/n`. Unlike [`pk_from_mixture`] this is meaningful for `k > n` as
/// well; the result is then flagged `beyond_population`.
pub fn mk_from_mixture(mu: &MixingMeasure, k: u64) -> Result<TypeClassPmf> {
    let mut mass = empty_classes(k, mu.c);
    for (ell, &w) in &mu.weights {
        for (s, m) in mass.iter_mut() {
            if let Some(log_b) = log_multinomial_parts(mu.n, k, ell, s) {
                *m += w * log_b.exp();
            }
        }
    }
    Ok(TypeClassPmf {
        k,
        c: mu.c,
        mass,
        beyond_population: k > mu.n,
    })
}

/// The divergence `d = D(P_k ‖ M_{k,μ})` together with the two dominating
/// links of the chain inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefinettiDivergence {
    /// `D(P_k ‖ M_{k,μ})` in nats.
    pub d: f64,
    /// Mixture of per-urn divergences `Σ_ℓ μ(ℓ)·D(n,k,ℓ)`.
    pub chain_mid: f64,
    /// Worst atom `max_ℓ D(n,k,ℓ)` over the support of μ.
    pub chain_max: f64,
}

/// Computes `d ≤ chain_mid ≤ chain_max` for one mixing measure and draw
/// count. Draws of size 0 or 1 give exactly `(0, 0, 0)`.
///
/// # Errors
/// `Domain` for `k > n`.
pub fn definetti_divergence(mu: &MixingMeasure, k: u64) -> Result<DefinettiDivergence> {
    if k > mu.n {
        return Err(Error::Domain(format!(
            "cannot draw k = {k} from a population of n = {}",
            mu.n
        )));
    }
    if k <= 1 {
        return Ok(DefinettiDivergence {
            d: 0.0,
            chain_mid: 0.0,
            chain_max: 0.0,
        });
    }
    let pk = pk_from_mixture(mu, k)?;
    let mk = mk_from_mixture(mu, k)?;
    let mut acc = NeumaierSum::new();
    for (s, &p) in pk.mass() {
        if p == 0.0 {
            continue; // 0·log 0 = 0
        }
        let m = mk.mass()[s];
        acc.add(p * (p.ln() - m.ln()));
    }
    let raw = acc.value();
    let d = if raw < 0.0 && raw > -1e-12 { 0.0 } else { raw };

    let mut mid = NeumaierSum::new();
    let mut max = 0.0_f64;
    for (ell, &w) in &mu.weights {
        let per_urn = relative_entropy(&UrnSpec::new(mu.n, k, ell.clone())?)?;
        mid.add(w * per_urn);
        max = max.max(per_urn);
    }
    Ok(DefinettiDivergence {
        d,
        chain_mid: mid.value(),
        chain_max: max,
    })
}

/// Closed-form guarantees for the exchangeable approximation problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefinettiBounds {
    /// `(c−1)k(k−1)/(2(n−1)(n−k+1))` — the sharp KL bound.
    pub corollary: f64,
    /// `sqrt(corollary/2)` — its total-variation consequence.
    pub pinsker_tv: f64,
    /// `ck/n` — the classical total-variation rate.
    pub df_tv: f64,
    /// `5k²·log n/(n−k)` — the earliest binary-alphabet KL rate; present
    /// only for `c = 2` and `k < n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gk_first: Option<f64>,
    /// `k(k−1)/(2(n−k−1))·log c` — the sharper general-alphabet rate;
    /// present only for `k ≤ n−2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gk_b: Option<f64>,
}

/// Evaluates every applicable closed-form bound for approximating the
/// `k`-marginal of an `n`-exchangeable sequence by a mixture of i.i.d.
/// laws.
///
/// # Errors
/// `Domain` for `k > n` or `c < 2`.
pub fn definetti_bounds(n: u64, k: u64, c: usize) -> Result<DefinettiBounds> {
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    if c < 2 {
        return Err(Error::Domain(format!("need at least two colours, got {c}")));
    }
    let (nf, kf, cf) = (n as f64, k as f64, c as f64);
    let corollary = if n == 1 {
        0.0 // k ≤ 1, so the marginal is exactly mixed-iid
    } else {
        (cf - 1.0) * kf * (kf - 1.0) / (2.0 * (nf - 1.0) * (nf - kf + 1.0))
    };
    let gk_first = (c == 2 && k < n).then(|| 5.0 * kf * kf * nf.ln() / (nf - kf));
    let gk_b = (k + 2 <= n).then(|| kf * (kf - 1.0) / (2.0 * (nf - kf - 1.0)) * cf.ln());
    Ok(DefinettiBounds {
        corollary,
        pinsker_tv: (corollary / 2.0).sqrt(),
        df_tv: cf * kf / nf,
        gk_first,
        gk_b,
    })
}

/// One line of a monotonicity experiment: the chain quantities and bounds
/// at `(n, k)`, plus whether `d` is nondecreasing from `k` to `k+1` for the
/// same measure (reported as `true` when `k = n` leaves nothing to compare).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: u64,
    pub k: u64,
    pub d: f64,
    pub chain_mid: f64,
    pub chain_max: f64,
    pub corollary: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gk_b: Option<f64>,
    pub k_monotone: bool,
}

/// Runs a family of mixing measures (one per population size) through the
/// divergence chain at fixed draw count `k`, one row per `n`. The rows
/// record raw data for the behaviour in `n` — no monotonicity in `n` is
/// asserted — together with the per-row check that `d` does not decrease
/// when the draw grows to `k+1`.
///
/// # Errors
/// `Domain` if `k` exceeds some `n` in the range; construction errors from
/// the family bubble up.
pub fn monotonicity_experiment<F>(family: F, k: u64, n_range: &[u64]) -> Result<Vec<ExperimentRow>>
where
    F: Fn(u64) -> Result<MixingMeasure>,
{
    let mut rows = Vec::with_capacity(n_range.len());
    for &n in n_range {
        if k > n {
            return Err(Error::Domain(format!(
                "draw count k = {k} exceeds population n = {n}"
            )));
        }
        let mu = family(n)?;
        if mu.n != n {
            return Err(Error::InvalidSpec(format!(
                "family produced a measure on n = {}, expected {n}",
                mu.n
            )));
        }
        let here = definetti_divergence(&mu, k)?;
        let k_monotone = if k < n {
            let next = definetti_divergence(&mu, k + 1)?;
            here.d <= next.d + 1e-10
        } else {
            true
        };
        let bounds = definetti_bounds(n, k, mu.c)?;
        rows.push(ExperimentRow {
            n,
            k,
            d: here.d,
            chain_mid: here.chain_mid,
            chain_max: here.chain_max,
            corollary: bounds.corollary,
            gk_b: bounds.gk_b,
            k_monotone,
        });
    }
    Ok(rows)
}
