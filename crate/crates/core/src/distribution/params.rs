//! Validated parameter types.

use serde::Serialize;

use crate::scalar::{real, Real};
use crate::{Error, Result};

/// Integer-detection width: `x` is treated as an exact integer when it lies
/// within this distance of one. Membership is discontinuous in `x` at the
/// integers, so the boundary has to be decided deterministically; detected
/// integers are snapped to the exact value so that the coefficient recurrence
/// produces structural zeros.
pub const INTEGER_X_TOLERANCE: f64 = 1e-12;

/// The pair `(r, λ)` defining `μ = Bernoulli(r) ⊛ Gamma(·, λ)`, with the
/// regime-deciding invariant `R = r/(1-r) · e^λ` cached at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureParams<T> {
    r: T,
    lambda: T,
    big_r: T,
    log_big_r: T,
}

impl<T: Real> MixtureParams<T> {
    pub fn new(r: T, lambda: T) -> Result<Self> {
        if !r.is_finite() || r <= T::zero() || r >= T::one() {
            return Err(Error::InvalidParameter(format!(
                "r must lie in (0, 1), got {r}"
            )));
        }
        if !lambda.is_finite() || lambda <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        // log R = ln(r/(1-r)) + λ decides the regime without overflow even
        // when e^λ itself is not representable.
        let log_big_r = (r / (T::one() - r)).ln() + lambda;
        Ok(Self {
            r,
            lambda,
            big_r: log_big_r.exp(),
            log_big_r,
        })
    }

    /// Bernoulli success probability.
    #[inline]
    pub fn r(&self) -> T {
        self.r
    }

    /// Gamma rate; the Laplace domain `Θ(μ) = (-∞, λ)` is implied by it.
    #[inline]
    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// The invariant `R = r/(1-r) · e^λ`.
    #[inline]
    pub fn big_r(&self) -> T {
        self.big_r
    }

    /// `ln R`, the overflow-safe form used by series coefficients.
    #[inline]
    pub fn log_big_r(&self) -> T {
        self.log_big_r
    }

    /// Regime test `R ≤ 1`, decided on the log scale.
    #[inline]
    pub fn r_le_one(&self) -> bool {
        self.log_big_r <= T::zero()
    }
}

/// Candidate exponents `(x, y)` for the convolution power, with the critical
/// index `k₀` (`k₀ - 1 ≤ x < k₀`) derived at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPair<T> {
    x: T,
    y: T,
    k0: u64,
    is_integer_x: bool,
}

impl<T: Real> PowerPair<T> {
    pub fn new(x: T, y: T) -> Result<Self> {
        if !x.is_finite() || x <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "x must be positive, got {x}"
            )));
        }
        if !y.is_finite() || y <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "y must be positive, got {y}"
            )));
        }
        if x > real::<T>(1e12) {
            return Err(Error::InvalidParameter(format!(
                "x = {x} is beyond the supported range (series index would overflow)"
            )));
        }
        let rounded = x.round();
        let is_integer_x = (x - rounded).abs() < real::<T>(INTEGER_X_TOLERANCE)
            && rounded >= T::one();
        let x = if is_integer_x { rounded } else { x };
        let k0 = x.floor().to_u64().unwrap() + 1;
        Ok(Self {
            x,
            y,
            k0,
            is_integer_x,
        })
    }

    /// Bernoulli-factor exponent (snapped to the exact integer when detected).
    #[inline]
    pub fn x(&self) -> T {
        self.x
    }

    /// Gamma shape exponent.
    #[inline]
    pub fn y(&self) -> T {
        self.y
    }

    /// Critical index: the first series coefficient that can turn negative.
    #[inline]
    pub fn k0(&self) -> u64 {
        self.k0
    }

    #[inline]
    pub fn is_integer_x(&self) -> bool {
        self.is_integer_x
    }

    /// `x` as an integer when it is one.
    #[inline]
    pub fn integer_x(&self) -> Option<u64> {
        self.is_integer_x.then(|| self.x.to_u64().unwrap())
    }
}

/// Numerical policy: tolerances, budgets, horizons, seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalProfile<T> {
    /// Absolute tolerance separating roundoff from genuine negativity.
    pub abs_tol: T,
    /// Maximum quadrature function evaluations per integral; grid scans may
    /// spend up to 1000× this in series-term evaluations.
    pub quad_budget: u64,
    /// Upper time bound for scans and integrals.
    pub horizon_t: T,
    /// RNG seed for sampling and randomized checks.
    pub seed: u64,
}

impl<T: Real> EvalProfile<T> {
    pub fn new(abs_tol: T, quad_budget: u64, horizon_t: T, seed: u64) -> Result<Self> {
        if !abs_tol.is_finite() || abs_tol <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        if quad_budget < 64 {
            return Err(Error::InvalidParameter(format!(
                "quad_budget must be at least 64, got {quad_budget}"
            )));
        }
        if !horizon_t.is_finite() || horizon_t <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "horizon_T must be positive, got {horizon_t}"
            )));
        }
        Ok(Self {
            abs_tol,
            quad_budget,
            horizon_t,
            seed,
        })
    }

    /// Default policy for a parameter point: `abs_tol = 1e-12`, a one-million
    /// evaluation budget, and the recommended scan horizon (see
    /// [`recommended_horizon`](crate::distribution::recommended_horizon)).
    pub fn recommended(p: &MixtureParams<T>, pw: &PowerPair<T>) -> Self {
        Self {
            abs_tol: real::<T>(1e-12),
            quad_budget: 1_000_000,
            horizon_t: super::recommended_horizon(p, pw),
            seed: 1,
        }
    }

    /// Same policy with another horizon.
    pub fn with_horizon(mut self, horizon_t: T) -> Self {
        self.horizon_t = horizon_t;
        self
    }

    /// Same policy with another seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
