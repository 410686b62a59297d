//! The fractional convolution power `μ_{x,y}` of Bernoulli(r) ⊛ Gamma(·, λ):
//! density, CDF, quantile, Laplace transform, cumulants, and sampling.
//!
//! `density`, `cdf`, `quantile`, `laplace_transform` and `cumulants` are pure
//! and safe to call concurrently. `sample` is deterministic per `(seed, n)`;
//! parallel callers split work by deriving one seed per stream.

mod params;
mod sample;
mod series;

pub use params::{EvalProfile, MixtureParams, PowerPair, INTEGER_X_TOLERANCE};
pub use sample::sample;
pub use series::{DensityEvaluator, DensityValue};

pub(crate) use sample::derive_seed;
#[cfg(test)]
pub(crate) use sample::Stream;
pub(crate) use series::sign_flip_onset;

use crate::scalar::{real, Real};
use crate::specfun::{gen_binomial_step, reg_lower_gamma, KahanSum, SignedLogValue};
use crate::{jorgensen, Error, Result};

/// Density `f(t)` of the candidate `(x, y)` power.
///
/// Zero for `t ≤ 0`. The value may be negative: negativity is exactly the
/// signal that `(x, y)` is not a Jørgensen member, so no membership gate is
/// applied here. Magnitudes beyond the representable range saturate at
/// `±max` (see [`DensityEvaluator::density_flagged`] for the flag).
pub fn density<T: Real>(t: T, p: &MixtureParams<T>, pw: &PowerPair<T>) -> Result<T> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("density requires finite t, got {t}")));
    }
    if t <= T::zero() {
        return Ok(T::zero());
    }
    let k_max = t.floor().to_u64().unwrap_or(u64::MAX).saturating_add(2);
    let ev = DensityEvaluator::new(p, pw, k_max, real::<T>(series::DEFAULT_ABS_TOL))?;
    Ok(ev.density(t))
}

/// Partial sum `f_n(t)`: the same term evaluation and accumulation path as
/// [`density`], truncated at series index `n`. For `n ≥ ⌊t⌋` this equals
/// `density(t)` bit for bit, and for `n ≤ k₀` it is positive for every
/// `t > 0`.
pub fn density_partial<T: Real>(
    t: T,
    n: u64,
    p: &MixtureParams<T>,
    pw: &PowerPair<T>,
) -> Result<T> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("density requires finite t, got {t}")));
    }
    if t <= T::zero() {
        return Ok(T::zero());
    }
    let k_max = t
        .floor()
        .to_u64()
        .unwrap_or(u64::MAX)
        .min(n)
        .saturating_add(2);
    let ev = DensityEvaluator::new(p, pw, k_max, real::<T>(series::DEFAULT_ABS_TOL))?;
    Ok(ev.partial(t, n))
}

/// Distribution function `F(t) = Σ_k C(x,k) r^k (1-r)^{x-k} P(y, λ(t-k))`,
/// the term-wise integral of the density series.
///
/// Requires `(x, y) ∈ Λ_R` so the result is a genuine CDF; for non-members
/// the identity has no probabilistic meaning and the call fails. The
/// identity itself is validated against adaptive quadrature of the density
/// by the `verify` oracles and the acceptance suite.
pub fn cdf<T: Real>(t: T, p: &MixtureParams<T>, pw: &PowerPair<T>) -> Result<T> {
    ensure_member(p, pw)?;
    if t.is_nan() {
        return Err(Error::Domain("cdf requires a non-NaN t".into()));
    }
    CdfEvaluator::new(p, pw)?.eval(t)
}

/// Smallest `t` with `F(t) ≥ u`, by bracket doubling on `[0, horizon]` and
/// bisection to `|F(t) - u| ≤ 1e-10` or interval width `≤ 1e-12`.
pub fn quantile<T: Real>(
    u: T,
    p: &MixtureParams<T>,
    pw: &PowerPair<T>,
    profile: &EvalProfile<T>,
) -> Result<T> {
    ensure_member(p, pw)?;
    if !(u > T::zero() && u < T::one()) {
        return Err(Error::Domain(format!(
            "quantile requires u in (0, 1), got {u}"
        )));
    }
    let ev = CdfEvaluator::new(p, pw)?;
    quantile_with(&ev, u, profile.horizon_t)
}

pub(crate) struct CdfEvaluator<T> {
    lambda: T,
    y: T,
    coeff: Vec<SignedLogValue<T>>,
}

impl<T: Real> CdfEvaluator<T> {
    /// Coefficients `C(x,k) r^k (1-r)^{x-k}`. Membership (checked by callers)
    /// guarantees geometric decay for non-integer `x`, so the prefix stops
    /// once 45 e-folds below its peak; integer `x` truncates structurally.
    pub(crate) fn new(p: &MixtureParams<T>, pw: &PowerPair<T>) -> Result<Self> {
        let log_q = p.r().ln() - (T::one() - p.r()).ln();
        let log_pref = pw.x() * (T::one() - p.r()).ln();
        let mut coeff = Vec::new();
        let mut raw = SignedLogValue::one();
        let mut peak_log = T::neg_infinity();
        let mut k = 0u64;
        loop {
            let c = raw.mul_log(T::from_u64(k).unwrap() * log_q + log_pref);
            if c.is_zero() && k > 0 {
                break;
            }
            if c.logmag() > peak_log {
                peak_log = c.logmag();
            }
            coeff.push(c);
            if k > pw.k0() + 2 && c.logmag() < peak_log - real::<T>(45.0) {
                break;
            }
            if k >= 1_000_000 {
                return Err(Error::BudgetExceeded(
                    "CDF coefficient series fails to decay".into(),
                ));
            }
            raw = gen_binomial_step(raw, pw.x(), k);
            k += 1;
        }
        Ok(Self {
            lambda: p.lambda(),
            y: pw.y(),
            coeff,
        })
    }

    pub(crate) fn eval(&self, t: T) -> Result<T> {
        if t <= T::zero() {
            return Ok(T::zero());
        }
        let mut acc = KahanSum::new();
        for (k, c) in self.coeff.iter().enumerate() {
            let dt = t - T::from_usize(k).unwrap();
            if dt <= T::zero() {
                break;
            }
            let pk = reg_lower_gamma(self.y, self.lambda * dt)?;
            if pk > T::zero() {
                acc.add(c.mul_log(pk.ln()).value());
            }
        }
        Ok(acc.value().max(T::zero()).min(T::one()))
    }
}

pub(crate) fn quantile_with<T: Real>(ev: &CdfEvaluator<T>, u: T, horizon: T) -> Result<T> {
    let width_tol = real::<T>(1e-12);
    let value_tol = real::<T>(1e-10);
    // Bracket by doubling until F(hi) >= u.
    let mut hi = T::one().min(horizon);
    let mut steps = 0;
    while ev.eval(hi)? < u {
        if hi >= horizon {
            return Err(Error::ConvergenceFailure(format!(
                "F({horizon}) < {u}: horizon too small for the requested quantile"
            )));
        }
        hi = (hi + hi).min(horizon);
        steps += 1;
        if steps > 128 {
            return Err(Error::ConvergenceFailure(
                "quantile bracketing failed to enclose the root".into(),
            ));
        }
    }
    let mut lo = T::zero();
    for _ in 0..500 {
        if hi - lo <= width_tol || (ev.eval(hi)? - u).abs() <= value_tol {
            return Ok(hi);
        }
        let mid = (lo + hi) * real::<T>(0.5);
        if mid <= lo || mid >= hi {
            return Ok(hi); // floating-point resolution reached
        }
        if ev.eval(mid)? >= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::ConvergenceFailure(
        "quantile bisection exhausted its iteration budget".into(),
    ))
}

/// Laplace transform `(1-r+re^z)^x (λ/(λ-z))^y`, evaluated in log-space on
/// the domain `z < λ`.
pub fn laplace_transform<T: Real>(
    z: T,
    p: &MixtureParams<T>,
    pw: &PowerPair<T>,
) -> Result<T> {
    if z.is_nan() || z >= p.lambda() {
        return Err(Error::Domain(format!(
            "laplace_transform requires z < lambda = {}, got z = {z}",
            p.lambda()
        )));
    }
    let r = p.r();
    // ln(1 - r + r e^z) without cancellation: 1 + r(e^z - 1) for moderate z,
    // factored through e^z when e^z alone would overflow.
    let log_bernoulli = if z < real::<T>(350.0) {
        (r * z.exp_m1()).ln_1p()
    } else {
        z + (r + (T::one() - r) * (-z).exp()).ln()
    };
    let log_gamma_factor = pw.y() * (p.lambda().ln() - (p.lambda() - z).ln());
    Ok((pw.x() * log_bernoulli + log_gamma_factor).exp())
}

/// First two cumulants of the `(x, y)` power: `mean = x r + y/λ`,
/// `variance = x r (1-r) + y/λ²` — the derivatives at zero of
/// `ln L(z) = x ln(1-r+re^z) + y ln(λ/(λ-z))`.
pub fn cumulants<T: Real>(p: &MixtureParams<T>, pw: &PowerPair<T>) -> (T, T) {
    let mean = pw.x() * p.r() + pw.y() / p.lambda();
    let variance =
        pw.x() * p.r() * (T::one() - p.r()) + pw.y() / (p.lambda() * p.lambda());
    (mean, variance)
}

/// Default scan/integration horizon for a parameter point:
/// `max(50, 10(x + y/λ))`, extended past the estimated sign-flip onset when
/// `R > 1` with non-integer `x` (the alternating tail of the series grows
/// like `R^k k^{-x-1}`, and for `R` barely above one the first negative
/// value appears only hundreds of units out).
pub fn recommended_horizon<T: Real>(p: &MixtureParams<T>, pw: &PowerPair<T>) -> T {
    let base = real::<T>(50.0).max(real::<T>(10.0) * (pw.x() + pw.y() / p.lambda()));
    if pw.is_integer_x() || p.r_le_one() {
        return base;
    }
    match sign_flip_onset(p, pw, 200_000) {
        Some(m) => base.max(real::<T>(1.5) * T::from_u64(m).unwrap() + real::<T>(10.0)),
        None => base.max(real::<T>(300_000.0)),
    }
}

pub(crate) fn ensure_member<T: Real>(p: &MixtureParams<T>, pw: &PowerPair<T>) -> Result<()> {
    let verdict = jorgensen::classify(p, pw);
    if verdict.member {
        Ok(())
    } else {
        Err(Error::NotMember {
            x: pw.x().to_f64().unwrap_or(f64::NAN),
            y: pw.y().to_f64().unwrap_or(f64::NAN),
            branch: verdict.branch,
        })
    }
}
