//! Seeded sampling from member powers.
//!
//! Integer `x`: the mixture structure `B + G` with `B ~ Binomial(x, r)` by
//! CDF inversion and `G ~ Gamma(y, λ)` by Marsaglia–Tsang. Non-integer
//! members: inverse-CDF draws `quantile(Uᵢ)` — the signed series admits no
//! usable rejection envelope, and the quantile machinery exists anyway.
//!
//! Every draw comes from a counter-based generator seeded once, so a
//! `(seed, n)` pair reproduces the sequence bit for bit. Concurrent callers
//! split by seed, never by sharing a stream.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::params::{EvalProfile, MixtureParams, PowerPair};
use super::{ensure_member, quantile_with, CdfEvaluator};
use crate::scalar::{real, Real};
use crate::{Error, Result};

/// Deterministic uniform/normal/gamma/binomial source.
pub(crate) struct Stream {
    rng: ChaCha12Rng,
}

impl Stream {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for a named consumer.
    #[cfg(test)]
    pub(crate) fn derived(seed: u64, name: &str) -> Self {
        Self::new(derive_seed(seed, name))
    }

    /// Uniform on the open interval (0, 1) at 53-bit resolution.
    #[inline]
    pub(crate) fn uniform_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal by the Marsaglia polar method. The second member of
    /// each accepted pair is discarded: slightly wasteful, but the stream
    /// stays stateless between calls.
    pub(crate) fn standard_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.uniform_open01() - 1.0;
            let v = 2.0 * self.uniform_open01() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    /// Gamma(shape, rate) via Marsaglia–Tsang (2000), with the `U^{1/shape}`
    /// boost for `shape < 1`.
    pub(crate) fn gamma(&mut self, shape: f64, rate: f64) -> f64 {
        if shape < 1.0 {
            let boost = self.uniform_open01().powf(1.0 / shape);
            return self.gamma(shape + 1.0, rate) * boost;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let z = self.standard_normal();
            let cbrt_v = 1.0 + c * z;
            if cbrt_v <= 0.0 {
                continue;
            }
            let v = cbrt_v * cbrt_v * cbrt_v;
            let u = self.uniform_open01();
            let z2 = z * z;
            if u < 1.0 - 0.0331 * z2 * z2 || u.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
                return d * v / rate;
            }
        }
    }

    /// Binomial(n, p) by inversion: walk the pmf recurrence until the
    /// cumulative mass passes a uniform draw.
    pub(crate) fn binomial(&mut self, n: u64, prob: f64) -> u64 {
        let u = self.uniform_open01();
        let ratio = prob / (1.0 - prob);
        let mut pmf = ((n as f64) * (-prob).ln_1p()).exp();
        let mut cum = pmf;
        let mut k = 0u64;
        while k < n && u > cum {
            pmf *= ratio * ((n - k) as f64) / ((k + 1) as f64);
            cum += pmf;
            k += 1;
        }
        k
    }
}

/// Seed for a named consumer: FNV-1a of the name folded into the base seed,
/// so independent checks own independent deterministic streams.
pub(crate) fn derive_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    seed ^ h
}

/// Draw `n` samples from the `(x, y)` power. Membership required;
/// deterministic given `profile.seed`.
pub fn sample<T: Real>(
    n: usize,
    p: &MixtureParams<T>,
    pw: &PowerPair<T>,
    profile: &EvalProfile<T>,
) -> Result<Vec<T>> {
    ensure_member(p, pw)?;
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let mut stream = Stream::new(profile.seed);
    let mut out = Vec::with_capacity(n);
    if let Some(xi) = pw.integer_x() {
        let r = p.r().to_f64().unwrap();
        let lambda = p.lambda().to_f64().unwrap();
        let y = pw.y().to_f64().unwrap();
        if (xi as f64) * (-r).ln_1p() < -700.0 {
            return Err(Error::BudgetExceeded(format!(
                "binomial inversion underflows at x = {xi}, r = {r}"
            )));
        }
        for _ in 0..n {
            let b = stream.binomial(xi, r) as f64;
            let g = stream.gamma(y, lambda);
            out.push(real::<T>(b + g));
        }
    } else {
        let ev = CdfEvaluator::new(p, pw)?;
        // Extend the bracketing horizon so that even the most extreme
        // uniform draw (1 - 2^-54) stays bracketed.
        let horizon = profile.horizon_t.max(
            pw.x() + (real::<T>(50.0) + real::<T>(10.0) * pw.y()) / p.lambda(),
        );
        for _ in 0..n {
            let u = real::<T>(stream.uniform_open01());
            out.push(quantile_with(&ev, u, horizon)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::cumulants;

    fn point(r: f64, lambda: f64, x: f64, y: f64) -> (MixtureParams<f64>, PowerPair<f64>) {
        (
            MixtureParams::new(r, lambda).unwrap(),
            PowerPair::new(x, y).unwrap(),
        )
    }

    #[test]
    fn deterministic_per_seed() {
        let (p, pw) = point(0.2, 1.0, 2.0, 1.0);
        let profile = EvalProfile::recommended(&p, &pw).with_seed(99);
        let a = sample(1000, &p, &pw, &profile).unwrap();
        let b = sample(1000, &p, &pw, &profile).unwrap();
        assert_eq!(a, b);
        let c = sample(1000, &p, &pw, &profile.with_seed(100)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn integer_x_moments_within_monte_carlo_error() {
        // n = 1e5, x = 2, y = 1: empirical mean within 3σ/√n of 1.4.
        let (p, pw) = point(0.2, 1.0, 2.0, 1.0);
        let profile = EvalProfile::recommended(&p, &pw).with_seed(7);
        let n = 100_000usize;
        let xs = sample(n, &p, &pw, &profile).unwrap();
        let (mean, var) = cumulants(&p, &pw);
        let emp_mean = xs.iter().sum::<f64>() / n as f64;
        let tol = 3.0 * var.sqrt() / (n as f64).sqrt();
        assert!(
            (emp_mean - mean).abs() < tol,
            "empirical mean {emp_mean} vs {mean} ± {tol}"
        );
        let emp_var =
            xs.iter().map(|v| (v - emp_mean) * (v - emp_mean)).sum::<f64>() / n as f64;
        assert!((emp_var - var).abs() < 10.0 * var / (n as f64).sqrt() * 3.0);
    }

    #[test]
    fn bernoulli_shift_structure_at_x_one() {
        // x = 1: every sample is a Gamma draw plus a {0, 1} shift, so the
        // sub-population below 1 is pure-Gamma distributed near 0.
        let (p, pw) = point(0.2, 1.0, 1.0, 1.0);
        let profile = EvalProfile::recommended(&p, &pw).with_seed(3);
        let xs = sample(50_000, &p, &pw, &profile).unwrap();
        assert!(xs.iter().all(|&v| v > 0.0));
        // Fraction of samples with shift 0 should be near 1 - r = 0.8;
        // P(G + B < 1) already filters most shifted draws.
        let below = xs.iter().filter(|&&v| v < 1.0).count() as f64 / xs.len() as f64;
        let expected = 0.8 * (1.0 - (-1.0f64).exp()); // (1-r) P(G < 1)..., shifted draws contribute none
        assert!((below - expected).abs() < 0.01, "below-1 mass {below}");
    }

    #[test]
    fn gamma_small_shape_boost_path() {
        let mut s = Stream::new(42);
        let n = 200_000;
        let shape = 0.4;
        let rate = 2.0;
        let mut sum = 0.0;
        for _ in 0..n {
            let g = s.gamma(shape, rate);
            assert!(g > 0.0);
            sum += g;
        }
        let mean = sum / n as f64;
        assert!((mean - shape / rate).abs() < 0.003, "gamma mean {mean}");
    }

    #[test]
    fn binomial_inversion_matches_moments() {
        let mut s = Stream::new(11);
        let (n_trials, prob) = (7u64, 0.3);
        let draws = 100_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let b = s.binomial(n_trials, prob);
            assert!(b <= n_trials);
            sum += b as f64;
        }
        let mean = sum / draws as f64;
        assert!((mean - 2.1).abs() < 0.02, "binomial mean {mean}");
    }

    #[test]
    fn non_integer_member_sampling_stays_in_support() {
        let (p, pw) = point(0.1, 1.0, 0.5, 1.5);
        let profile = EvalProfile::recommended(&p, &pw).with_seed(5);
        let xs = sample(200, &p, &pw, &profile).unwrap();
        assert!(xs.iter().all(|&v| v > 0.0 && v.is_finite()));
        let again = sample(200, &p, &pw, &profile).unwrap();
        assert_eq!(xs, again);
    }

    #[test]
    fn rejects_non_members_and_zero_count() {
        let (p, pw) = point(0.5, 1.0, 2.5, 5.0);
        let profile = EvalProfile::recommended(&p, &pw);
        assert!(matches!(
            sample::<f64>(10, &p, &pw, &profile),
            Err(Error::NotMember { .. })
        ));
        let (p, pw) = point(0.2, 1.0, 1.0, 1.0);
        let profile = EvalProfile::recommended(&p, &pw);
        assert!(sample::<f64>(0, &p, &pw, &profile).is_err());
    }
}
