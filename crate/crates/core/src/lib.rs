//! Closed-form solutions, forecasts and moments for time-varying AR(2)
//! processes
//!
//! ```text
//! y_t = phi0(t) + phi1(t) y_{t-1} + phi2(t) y_{t-2} + eps_t,   Var(eps_t) = sigma2(t)
//! ```
//!
//! built on the Green functions `xi_{t,k}`, the determinants of tridiagonal
//! (continuant) matrices in the coefficients.

pub mod blockdet;
pub mod cli;
pub mod error;
pub mod moments;
pub mod schedules;
pub mod simulate;
pub mod solution;
pub mod vs_rep;
pub mod xi;

pub use error::{Error, Result};
pub use schedules::{
    BreakSchedule, CoefficientSchedule, CoefficientTuple, ConstantSchedule, CyclicalSchedule,
    FnSchedule, PeriodicSchedule, Schedule, TabulatedSchedule,
};
pub use xi::{green_functions, xi, XiTable};
