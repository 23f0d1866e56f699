//! Exact divergences between sampling with and without replacement.
//!
//! Drawing `k` balls from an urn of `n` balls in `c` colours (composition
//! `ℓ = (ℓ_1, …, ℓ_c)`) gives the multivariate hypergeometric law `H` when the
//! draws are made without replacement and the multinomial law `B` (success
//! probabilities `ℓ_i/n`) when they are made with replacement. This crate
//! computes the relative entropy `D(H‖B)` and the total variation distance
//! between the two laws exactly by enumeration, evaluates a family of
//! closed-form upper and lower bounds on `D` together with their proof-step
//! inequalities, and applies the same machinery to finite exchangeable
//! sequences via mixtures of urn laws (finite de Finetti bounds).
//!
//! Modules:
//!
//! * [`numerics`] — log-gamma, digamma/polygamma, certified envelopes, and the
//!   `U`/`A`/`ε` family of Stirling-type approximations.
//! * [`urn`] — urn specifications, support enumeration, both p.m.f.s, and
//!   hypergeometric moment formulas.
//! * [`divergence`] — exact `D(H‖B)` and total variation.
//! * [`bounds`] — every closed-form bound, the limit expressions, and
//!   proof-step diagnostics.
//! * [`definetti`] — mixing measures, `k`-marginals of exchangeable sequences,
//!   and the chain of de Finetti inequalities.
//! * [`oracle`] — an independent exact-arithmetic verifier producing certified
//!   enclosures of `D`.
//!
//! All logarithms are natural; divergences are reported in nats.

#![forbid(unsafe_code)]

use thiserror::Error;

pub mod bounds;
pub mod definetti;
pub mod divergence;
pub mod numerics;
pub mod oracle;
pub mod urn;

mod sum;

/// Errors shared by all modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are valid numbers but violate the hypotheses under which the
    /// requested bound or identity is guaranteed to hold.
    #[error("not applicable: {0}")]
    Applicability(String),

    /// An urn specification, count vector, or mixing measure is malformed.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A sequence is too short for the requested finite-difference order.
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    /// A certified computation could not reach the requested interval width.
    #[error("precision failure: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use bounds::{
    bound_report, crossover_s_star, exact_binary_divergence, hm_bounds, limit_expressions,
    proof_step_diagnostics, prop12_upper, sigma_stats, stam_bounds, thm1_upper, BoundReport,
    LemmaPair, ProofStepDiagnostics,
};
pub use definetti::{
    definetti_bounds, definetti_divergence, mixing_from_iid, mk_from_mixture,
    monotonicity_experiment, pk_from_mixture, DefinettiBounds, DefinettiDivergence, ExperimentRow,
    MixingMeasure, TypeClassPmf,
};
pub use divergence::{
    divergence_report, relative_entropy, relative_entropy_via_u, total_variation, DivergenceReport,
};
pub use numerics::{
    digamma_envelope, digamma_family, forward_differences, log1p_topsoe, log_gamma,
    trigamma_envelope, u_sandwich, u_value, RealInterval,
};
pub use oracle::{certified_divergence, exact_pmfs, ExactProbability};
pub use urn::{
    central_moment, factorial_moment, hypergeometric_pmf, marginal_hypergeometric, multinomial_pmf,
    support, CountVector, UrnSpec,
};
