//! Fractional convolution powers of a Bernoulli ⊛ Gamma distribution.
//!
//! For fixed `r ∈ (0,1)` and `λ > 0`, let `μ` be the law of `X + Y` where
//! `X ~ Bernoulli(r)` and `Y ~ Gamma(·, λ)` are independent. For exponents
//! `x, y > 0` the candidate density of the `(x, y)` convolution power is the
//! signed series
//!
//! ```text
//! f(t) = λ^y (1-r)^x / Γ(y) · Σ_{k≥0} C(x,k) R^k e^{-λt} (t-k)₊^{y-1},
//! R = r/(1-r) · e^λ,
//! ```
//!
//! with generalized binomial coefficients `C(x,k)`. The pair `(x, y)` belongs
//! to the Jørgensen set `Λ_R` exactly when `f ≥ 0` everywhere; the regime
//! splits on `R ≤ 1` versus `R > 1`.
//!
//! This crate evaluates `f` stably (signed log-space terms, compensated
//! summation, alternating-pair grouping), exposes CDF/quantile/sampling and
//! the Laplace transform, classifies `Λ_R` membership, certifies the verdict
//! by positivity scans, and ships independent numerical oracles
//! (quadrature, finite differences, Kolmogorov–Smirnov) for every analytic
//! claim.
//!
//! All numerical kernels are generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the `f64` instantiations are re-exported as aliases at
//! the crate root. The verification oracles in [`verify`] are `f64`-only.

#![forbid(unsafe_code)]

use thiserror::Error;

pub mod distribution;
pub mod jorgensen;
pub mod scalar;
pub mod specfun;
pub mod verify;

pub use scalar::Real;

/// `f64` mixture parameters (the common instantiation).
pub type MixtureParams64 = distribution::MixtureParams<f64>;
/// `f64` exponent pair.
pub type PowerPair64 = distribution::PowerPair<f64>;
/// `f64` evaluation profile.
pub type EvalProfile64 = distribution::EvalProfile<f64>;
/// `f64` signed log-space value.
pub type SignedLogValue64 = specfun::SignedLogValue<f64>;
/// `f64` positivity scan report.
pub type ScanReport64 = jorgensen::ScanReport<f64>;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside a function's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter failed structural validation (`r ∉ (0,1)`, `λ ≤ 0`, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested operation needs `(x, y) ∈ Λ_R`, but the pair is not a member.
    #[error("({x}, {y}) is not a member of the Jorgensen set (branch {branch:?})")]
    NotMember {
        x: f64,
        y: f64,
        branch: jorgensen::MembershipBranch,
    },

    /// A grid or quadrature request exceeds the evaluation budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// An iteration (series, continued fraction, bracketing) failed to converge.
    #[error("failed to converge: {0}")]
    ConvergenceFailure(String),
}

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
