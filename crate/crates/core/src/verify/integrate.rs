//! Panel quadrature of the (possibly signed, possibly singular) density.

use crate::distribution::DensityEvaluator;
use crate::specfun::adaptive_simpson;
use crate::Result;

pub(crate) struct WeightedIntegral {
    pub value: f64,
    pub evals: u64,
}

/// Integrate `weight(t) · f(t)` over `(0, t_max]` with mandatory panel
/// breaks at every integer: the density has kinks there for `y < 2` and
/// integrable singularities for `y < 1`, either of which destroys naive
/// adaptivity across the breakpoint.
///
/// For `y < 1` the left half of each panel is integrated in the substituted
/// variable `u = (t - m)^y`. The substitution turns the edge behavior
/// `c_m e^{-λt} (t-m)^{y-1}` into a bounded integrand whose `u → 0` limit is
/// `c_m e^{-λm} w(m) / y`, supplied analytically from the stored coefficient.
pub(crate) fn integrate_weighted<F: Fn(f64) -> f64>(
    ev: &DensityEvaluator<f64>,
    y: f64,
    t_max: f64,
    weight: &F,
    tol: f64,
    budget: u64,
) -> Result<WeightedIntegral> {
    let mut evals = 0u64;
    let mut total = 0.0;
    let panel_count = (t_max.ceil() as u64).max(1);
    let panel_tol = tol / panel_count as f64;
    let max_depth = 48;
    let mut m = 0u64;
    while (m as f64) < t_max {
        let a = m as f64;
        let b = (a + 1.0).min(t_max);
        let mid = (a + 0.5).min(b);
        if y < 1.0 {
            let u_top = (mid - a).powf(y);
            let edge = ev.edge_limit(m) * weight(a) / y;
            let g = |u: f64| {
                if u <= 0.0 {
                    edge
                } else {
                    let t = a + u.powf(1.0 / y);
                    weight(t) * ev.density(t) * u.powf(1.0 / y - 1.0) / y
                }
            };
            total +=
                adaptive_simpson(&g, 0.0, u_top, panel_tol * 0.5, max_depth, &mut evals, budget)?;
        } else {
            let direct = |t: f64| weight(t) * ev.density(t);
            total += adaptive_simpson(
                &direct,
                a,
                mid,
                panel_tol * 0.5,
                max_depth,
                &mut evals,
                budget,
            )?;
        }
        let direct = |t: f64| weight(t) * ev.density(t);
        total += adaptive_simpson(
            &direct,
            mid,
            b,
            panel_tol * 0.5,
            max_depth,
            &mut evals,
            budget,
        )?;
        m += 1;
    }
    Ok(WeightedIntegral {
        value: total,
        evals,
    })
}
