//! Generalized binomial coefficients `C(x, k) = x(x-1)...(x-k+1) / k!`.

use super::signed_log::SignedLogValue;
use crate::scalar::Real;
use crate::{Error, Result};

/// `C(x, k)` for real `x > 0`, carried in signed log-space.
///
/// Computed exclusively through the multiplicative recurrence
/// `C(x, 0) = 1`, `C(x, k+1) = C(x, k) · (x-k) / (k+1)`, never through
/// Γ-ratios: when `x` is an exact integer the factor `(x - x)` vanishes and
/// every later coefficient is a structural zero rather than a cancellation.
pub fn gen_binomial<T: Real>(x: T, k: u64) -> Result<SignedLogValue<T>> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::Domain(format!(
            "gen_binomial requires x > 0, got {x}"
        )));
    }
    let mut c = SignedLogValue::one();
    for j in 0..k {
        c = step(c, x, j);
        if c.is_zero() {
            break;
        }
    }
    Ok(c)
}

/// The prefix `C(x, 0), ..., C(x, k_max)` in one recurrence pass.
pub fn gen_binomial_seq<T: Real>(x: T, k_max: u64) -> Result<Vec<SignedLogValue<T>>> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::Domain(format!(
            "gen_binomial requires x > 0, got {x}"
        )));
    }
    let mut out = Vec::with_capacity(k_max as usize + 1);
    let mut c = SignedLogValue::one();
    out.push(c);
    for j in 0..k_max {
        c = step(c, x, j);
        out.push(c);
    }
    Ok(out)
}

/// One recurrence step `C(x, j) -> C(x, j+1)`; the single implementation the
/// whole crate multiplies coefficients through.
#[inline]
pub(crate) fn step<T: Real>(c: SignedLogValue<T>, x: T, j: u64) -> SignedLogValue<T> {
    let factor = x - T::from_u64(j).unwrap();
    if factor == T::zero() || c.is_zero() {
        return SignedLogValue::zero();
    }
    let denom = T::from_u64(j + 1).unwrap();
    let sign = if factor > T::zero() { 1 } else { -1 };
    SignedLogValue::new(
        c.sign() * sign,
        c.logmag() + factor.abs().ln() - denom.ln(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::KahanSum;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    /// Exact-rational oracle: C(p/q, k) as a BigRational, then sign and
    /// log-magnitude recovered through high-precision integer arithmetic.
    fn rational_binomial_oracle(num: i64, den: i64, k: u64) -> (i8, f64) {
        let x = BigRational::new(BigInt::from(num), BigInt::from(den));
        let mut c = BigRational::new(BigInt::from(1), BigInt::from(1));
        for j in 0..k {
            let factor = &x - BigRational::from(BigInt::from(j as i64));
            c = c * factor / BigRational::from(BigInt::from(j as i64 + 1));
        }
        if c.numer().sign() == num_bigint::Sign::NoSign {
            return (0, f64::NEG_INFINITY);
        }
        let sign = if c.numer().sign() == num_bigint::Sign::Minus {
            -1
        } else {
            1
        };
        // log|c| from the bit lengths: split off 2^e so both halves fit in f64.
        let log_big = |n: &BigInt| -> f64 {
            let mag = n.magnitude();
            let bits = mag.bits();
            let shift = bits.saturating_sub(500);
            let reduced: BigInt = BigInt::from(mag >> shift);
            let v: f64 = reduced.to_string().parse().unwrap();
            v.ln() + shift as f64 * std::f64::consts::LN_2
        };
        (sign, log_big(c.numer()) - log_big(c.denom()))
    }

    #[test]
    fn trivial_small_values() {
        // C(0.5, 2) = 0.5 * (-0.5) / 2 = -0.125
        let c = gen_binomial(0.5f64, 2).unwrap();
        assert_eq!(c.sign(), -1);
        assert!((c.value() + 0.125).abs() < 1e-15);
        // C(3, 4) has the factor (3-3) = 0: exact structural zero.
        let z = gen_binomial(3.0f64, 4).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.value(), 0.0);
    }

    #[test]
    fn deep_coefficient_against_rational_oracle() {
        // C(2.5, 50): frozen from the exact-rational oracle below.
        let (sign, logmag) = rational_binomial_oracle(5, 2, 50);
        assert_eq!(sign, -1);
        assert!((logmag - (-13.54653392311340845)).abs() < 1e-10);

        let c = gen_binomial(2.5f64, 50).unwrap();
        assert_eq!(c.sign(), sign);
        assert!(
            (c.logmag() - logmag).abs() < 1e-11 * logmag.abs(),
            "logmag {} vs oracle {}",
            c.logmag(),
            logmag
        );
    }

    #[test]
    fn domain_error_for_nonpositive_x() {
        assert!(gen_binomial(0.0f64, 1).is_err());
        assert!(gen_binomial(-2.5f64, 1).is_err());
        assert!(gen_binomial(f64::NAN, 1).is_err());
    }

    #[test]
    fn integer_truncation_and_binomial_theorem() {
        for x in 1..=20u64 {
            let xf = x as f64;
            let coeffs = gen_binomial_seq(xf, x + 10).unwrap();
            for (k, c) in coeffs.iter().enumerate() {
                if k as u64 > x {
                    assert!(c.is_zero(), "C({x},{k}) should be exactly zero");
                }
            }
            for &r in &[0.1f64, 0.5, 0.9] {
                let mut acc = KahanSum::new();
                for (k, c) in coeffs.iter().enumerate().take(x as usize + 1) {
                    let term =
                        c.mul_log((k as f64) * r.ln() + (xf - k as f64) * (1.0 - r).ln());
                    acc.add(term.value());
                }
                assert!(
                    (acc.value() - 1.0).abs() <= 1e-14,
                    "binomial theorem off at x={x}, r={r}: {}",
                    acc.value()
                );
            }
        }
    }

    proptest! {
        /// Recurrence consistency: C(x,k+1)·(k+1) = C(x,k)·(x-k) in log space.
        #[test]
        fn recurrence_consistency(x in 0.01f64..50.0, k in 0u64..120) {
            prop_assume!((x - x.round()).abs() > 1e-6);
            let ck = gen_binomial(x, k).unwrap();
            let ck1 = gen_binomial(x, k + 1).unwrap();
            let lhs = ck1.logmag() + ((k + 1) as f64).ln();
            let rhs = ck.logmag() + (x - k as f64).abs().ln();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
            let factor_sign = if x > k as f64 { 1 } else { -1 };
            prop_assert_eq!(ck1.sign(), ck.sign() * factor_sign);
        }

        /// Sign law: for non-integer x and k ≥ ⌈x⌉ the signs alternate.
        #[test]
        fn sign_alternation_beyond_ceiling(x in 0.1f64..20.0, extra in 0u64..40) {
            prop_assume!((x - x.round()).abs() > 1e-6);
            let ceil = x.ceil() as u64;
            let base = gen_binomial(x, ceil).unwrap();
            let k = ceil + extra;
            let c = gen_binomial(x, k).unwrap();
            let expected = if extra % 2 == 0 { base.sign() } else { -base.sign() };
            prop_assert_eq!(c.sign(), expected);
        }
    }
}
