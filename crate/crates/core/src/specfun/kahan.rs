//! Kahan compensated summation.

use crate::scalar::Real;

/// Compensated accumulator: the running error of each addition is carried in
/// a correction term, so long alternating sums lose far less than naive
/// accumulation.
#[derive(Debug, Clone, Copy)]
pub struct KahanSum<T> {
    sum: T,
    correction: T,
}

impl<T: Real> Default for KahanSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            correction: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let y = x - self.correction;
        let t = self.sum + y;
        self.correction = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum
    }
}
