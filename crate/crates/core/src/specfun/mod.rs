//! Special functions and stable signed arithmetic.
//!
//! Everything the density/CDF machinery needs and nothing more: log-gamma,
//! the regularized lower incomplete gamma, generalized binomial coefficients
//! carried in signed log-space, compensated summation, and an adaptive
//! Simpson integrator with an evaluation budget.
//!
//! All functions here are pure; concurrent invocation is unrestricted.

mod binomial;
mod gamma;
mod kahan;
mod quad;
mod signed_log;

pub use binomial::{gen_binomial, gen_binomial_seq};
pub use gamma::{log_gamma, reg_lower_gamma, reg_upper_gamma};
pub use kahan::KahanSum;
pub use quad::adaptive_simpson;
pub use signed_log::SignedLogValue;

pub(crate) use binomial::step as gen_binomial_step;
pub(crate) use gamma::log_gamma_unchecked;
