//! Evaluation of the Riemann zeta function and its derivatives, location of
//! the non-real zeros of `ζ^(k)` by the argument principle, and numerical
//! checks of the asymptotic formulas for their number and horizontal
//! distribution.

pub mod argtrack;
pub mod bernoulli;
pub mod cache;
pub mod context;
pub mod error;
pub mod funceq;
pub mod gamma;
pub mod jet;
pub mod quad;
pub mod stats;
pub mod verify;
pub mod zeroscan;
pub mod zeta;

pub use num_complex::Complex64 as Complex;

pub use context::EvalContext;
pub use error::{Error, Result};
