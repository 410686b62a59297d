//! Kolmogorov–Smirnov distance between an empirical sample and a CDF.

use crate::Result;

/// Two-sided KS statistic `sup_t |F_n(t) - F(t)|` for a sorted sample.
pub fn ks_statistic<F>(sorted: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        let above = ((i + 1) as f64 / n - f).abs();
        let below = (i as f64 / n - f).abs();
        sup = sup.max(above).max(below);
    }
    Ok(sup)
}
