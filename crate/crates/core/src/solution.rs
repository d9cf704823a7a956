//! General solution of the TV-AR(2) recursion over a lookback of `k` steps:
//!
//! ```text
//! y_t = xi_{t,k} y_{t-k} + phi2(t-k+1) xi_{t,k-1} y_{t-k-1}            (homogeneous)
//!     + sum_{i<k} xi_{t,i} phi0(t-i) + sum_{i<k} xi_{t,i} eps_{t-i}      (particular)
//! ```

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::schedules::CoefficientSchedule;
use crate::xi::{check_cap, determinant, green_functions};

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralSolution {
    pub anchor: i64,
    pub lookback: usize,
    /// Weight on `y_{t-k}`: `xi_{t,k}`.
    pub w0: f64,
    /// Weight on `y_{t-k-1}`: `phi2(t-k+1) xi_{t,k-1}`.
    pub w1: f64,
    /// `sum_{i=0}^{k-1} xi_{t,i} phi0(t-i)`.
    pub drift: f64,
    /// `xi_{t,i}` multiplying `eps_{t-i}`, newest first (`i = 0..k`).
    pub innovation_weights: Vec<f64>,
}

pub fn general_solution<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    k: usize,
) -> Result<GeneralSolution> {
    let table = green_functions(schedule, t, k)?;
    let w1 = if k == 0 {
        0.0
    } else {
        schedule.phi2(t - k as i64 + 1)? * table.get(k as isize - 1)
    };
    let mut drift = 0.0;
    for i in 0..k {
        drift += table.get(i as isize) * schedule.phi0(t - i as i64)?;
    }
    Ok(GeneralSolution {
        anchor: t,
        lookback: k,
        w0: table.get(k as isize),
        w1,
        drift,
        innovation_weights: table.values()[..k].to_vec(),
    })
}

impl GeneralSolution {
    /// Homogeneous part for initial values `(y_{t-k}, y_{t-k-1})`.
    pub fn homogeneous(&self, y_init: (f64, f64)) -> f64 {
        self.w0 * y_init.0 + self.w1 * y_init.1
    }

    /// `sum xi_{t,i} eps_{t-i}` with `innovations` ordered oldest first.
    pub fn innovation_part(&self, innovations: &[f64]) -> Result<f64> {
        if innovations.len() != self.lookback {
            return Err(Error::domain(format!(
                "expected {} innovations (eps_{{t-k+1}}..eps_t), got {}",
                self.lookback,
                innovations.len()
            )));
        }
        Ok(self
            .innovation_weights
            .iter()
            .zip(innovations.iter().rev())
            .map(|(w, e)| w * e)
            .sum())
    }

    pub fn particular(&self, innovations: &[f64]) -> Result<f64> {
        Ok(self.drift + self.innovation_part(innovations)?)
    }

    /// `y_t` given `(y_{t-k}, y_{t-k-1})` and `eps_{t-k+1..=t}` (oldest first).
    pub fn evaluate(&self, y_init: (f64, f64), innovations: &[f64]) -> Result<f64> {
        Ok(self.homogeneous(y_init) + self.particular(innovations)?)
    }
}

pub fn evaluate_solution(
    sol: &GeneralSolution,
    y_init: (f64, f64),
    innovations: &[f64],
) -> Result<f64> {
    sol.evaluate(y_init, innovations)
}

/// Iterate the recursion forward from `(y_{t-k}, y_{t-k-1})` over
/// `eps_{t-k+1..=t}` (oldest first) and return `y_t`.
pub fn forward_recursion<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    y_init: (f64, f64),
    innovations: &[f64],
) -> Result<f64> {
    let k = innovations.len() as i64;
    let (mut y1, mut y2) = y_init;
    for (j, e) in innovations.iter().enumerate() {
        let c = schedule.evaluate(t - k + 1 + j as i64)?;
        let y = c.phi0 + c.phi1 * y1 + c.phi2 * y2 + e;
        y2 = y1;
        y1 = y;
    }
    Ok(y1)
}

/// Particular solution as the determinant of the core matrix `C_{t,k}`
/// bordered on the left by the column `phi0(t-k+i) + eps_{t-k+i}`, `i = 1..=k`.
pub fn particular_solution_determinant_oracle<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    innovations: &[f64],
) -> Result<f64> {
    let k = innovations.len();
    if k == 0 {
        return Err(Error::domain("particular-solution oracle requires k >= 1"));
    }
    check_cap(k)?;
    let origin = t - k as i64;
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        let c = schedule.evaluate(origin + i as i64 + 1)?;
        m[(i, 0)] = c.phi0 + innovations[i];
        // core matrix occupies columns 1..k; its column j has -1 at row j-1
        if i + 1 < k {
            m[(i, i + 1)] = -1.0;
        }
        if i >= 1 {
            m[(i, i)] = c.phi1;
        }
        if i >= 2 {
            m[(i, i - 1)] = c.phi2;
        }
    }
    Ok(determinant(&m))
}
