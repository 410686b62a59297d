//! Sign + log-magnitude representation.

use crate::scalar::Real;

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Products of many factors of wildly different scale (binomial coefficients
/// times `R^k`) neither overflow nor underflow in this form. `sign == 0`
/// represents exactly zero regardless of `logmag`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogValue<T> {
    sign: i8,
    logmag: T,
}

impl<T: Real> SignedLogValue<T> {
    /// Exact zero.
    #[inline]
    pub fn zero() -> Self {
        Self {
            sign: 0,
            logmag: T::neg_infinity(),
        }
    }

    /// Exact one.
    #[inline]
    pub fn one() -> Self {
        Self {
            sign: 1,
            logmag: T::zero(),
        }
    }

    /// Build from a sign and a log-magnitude. A zero sign yields exact zero.
    #[inline]
    pub fn new(sign: i8, logmag: T) -> Self {
        debug_assert!(matches!(sign, -1 | 0 | 1));
        if sign == 0 {
            Self::zero()
        } else {
            Self { sign, logmag }
        }
    }

    /// Convert an ordinary value into signed log form.
    pub fn from_value(v: T) -> Self {
        if v == T::zero() {
            Self::zero()
        } else if v > T::zero() {
            Self {
                sign: 1,
                logmag: v.ln(),
            }
        } else {
            Self {
                sign: -1,
                logmag: (-v).ln(),
            }
        }
    }

    /// Convert back to an ordinary value, saturating at the largest finite
    /// value of the type when the magnitude is not representable.
    pub fn value(&self) -> T {
        if self.sign == 0 {
            return T::zero();
        }
        let sgn = T::from_i8(self.sign).unwrap();
        if self.logmag > T::max_finite().ln() {
            return sgn * T::max_finite();
        }
        sgn * self.logmag.exp()
    }

    /// `sign * exp(logmag - offset)`, for scaled summation of large terms.
    #[inline]
    pub fn scaled_value(&self, offset: T) -> T {
        if self.sign == 0 {
            return T::zero();
        }
        T::from_i8(self.sign).unwrap() * (self.logmag - offset).exp()
    }

    #[inline]
    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` when the value is zero.
    #[inline]
    pub fn logmag(&self) -> T {
        self.logmag
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Multiply two signed log values: signs multiply, log-magnitudes add.
    #[inline]
    pub fn mul(&self, other: &Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::zero();
        }
        Self {
            sign: self.sign * other.sign,
            logmag: self.logmag + other.logmag,
        }
    }

    /// Multiply by `exp(logfactor)` (a positive factor given in log form).
    #[inline]
    pub fn mul_log(&self, logfactor: T) -> Self {
        if self.sign == 0 {
            return Self::zero();
        }
        Self {
            sign: self.sign,
            logmag: self.logmag + logfactor,
        }
    }

    /// Negate.
    #[inline]
    pub fn neg(&self) -> Self {
        Self {
            sign: -self.sign,
            logmag: self.logmag,
        }
    }
}
