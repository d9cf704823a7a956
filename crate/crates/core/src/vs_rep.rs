//! Vector-of-seasons (VS) form of PAR(2;l): stacking one period into
//! `y_T = (y_{1,T}, ..., y_{l,T})'` gives the constant VAR(1)
//! `Phi0 y_T = Phi1 y_{T-1} + eps_T`, stationary iff the spectral radius of
//! `Phi0^{-1} Phi1` is below one.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::schedules::PeriodicSchedule;

/// Half-width of the band around `rho = 1` reported as indeterminate.
pub const BOUNDARY_BAND: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stationary,
    NonStationary,
    /// `|rho - 1| < BOUNDARY_BAND`.
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationarityVerdict {
    pub verdict: Verdict,
    pub spectral_radius: f64,
    /// `1 - rho`.
    pub margin: f64,
}

impl StationarityVerdict {
    pub fn is_stationary(&self) -> bool {
        self.verdict == Verdict::Stationary
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VSMatrices {
    pub seasons: usize,
    /// Unit lower triangular; `(i, j) = -phi_{i-j, i}` below the diagonal.
    pub phi0: DMatrix<f64>,
    /// `(i, j) = phi_{i+l-j, i}`, zero when the lag exceeds 2.
    pub phi1: DMatrix<f64>,
}

/// `phi_{m,s}` with `m` the lag (0 for lags above 2) and `s` 1-based.
fn coefficient(schedule: &PeriodicSchedule, lag: usize, s: usize) -> f64 {
    let c = schedule.season(s);
    match lag {
        1 => c.phi1,
        2 => c.phi2,
        _ => 0.0,
    }
}

pub fn build_vs(schedule: &PeriodicSchedule) -> Result<VSMatrices> {
    let l = schedule.seasons_per_period();
    if l < 2 {
        return Err(Error::domain(format!(
            "vector-of-seasons form of an order-2 model needs l >= 2, got {l}"
        )));
    }
    let mut phi0 = DMatrix::identity(l, l);
    let mut phi1 = DMatrix::zeros(l, l);
    for i in 1..=l {
        for j in 1..i {
            phi0[(i - 1, j - 1)] = -coefficient(schedule, i - j, i);
        }
        for j in 1..=l {
            phi1[(i - 1, j - 1)] = coefficient(schedule, i + l - j, i);
        }
    }
    Ok(VSMatrices {
        seasons: l,
        phi0,
        phi1,
    })
}

impl VSMatrices {
    /// `Phi0^{-1} Phi1` by forward substitution.
    pub fn companion(&self) -> DMatrix<f64> {
        self.phi0
            .solve_lower_triangular(&self.phi1)
            .expect("Phi0 is unit lower triangular")
    }

    pub fn spectral_radius(&self) -> f64 {
        self.companion()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

pub fn stationarity_check(vs: &VSMatrices) -> StationarityVerdict {
    let rho = vs.spectral_radius();
    let verdict = if (rho - 1.0).abs() < BOUNDARY_BAND {
        Verdict::Indeterminate
    } else if rho < 1.0 {
        Verdict::Stationary
    } else {
        Verdict::NonStationary
    };
    StationarityVerdict {
        verdict,
        spectral_radius: rho,
        margin: 1.0 - rho,
    }
}

/// Closed-form restriction for PAR(2;4).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Par24Restriction {
    /// Absolute value of the eight-term expression.
    pub value: f64,
    pub satisfied: bool,
    /// `A` in `|Phi0 - Phi1 z| = 1 - A z + B z^2`.
    pub linear: f64,
    /// `B = phi_{2,1} phi_{2,2} phi_{2,3} phi_{2,4}`.
    pub quadratic: f64,
}

/// The eight-term restriction
/// `|p22 p13 p14 + p22 p24 + p21 p12 p13 + p21 p23 + p11 p12 p13 p14
///   + p11 p12 p24 + p11 p14 p23 - p21 p22 p23 p24| < 1`
/// (`pms` = `phi_{m,s}`), which reduces to `|p11 p12 p13 p14| < 1` for PAR(1;4).
///
/// The expression is `|A - B|` for the VS characteristic polynomial
/// `1 - A z + B z^2`; see [`par24_exact_condition`] for the complete
/// root condition.
pub fn par24_restriction(schedule: &PeriodicSchedule) -> Result<Par24Restriction> {
    if schedule.seasons_per_period() != 4 {
        return Err(Error::domain(format!(
            "the PAR(2;4) restriction needs l = 4, got {}",
            schedule.seasons_per_period()
        )));
    }
    let p1 = |s| schedule.season(s).phi1;
    let p2 = |s| schedule.season(s).phi2;
    let linear = p2(2) * p1(3) * p1(4)
        + p2(2) * p2(4)
        + p2(1) * p1(2) * p1(3)
        + p2(1) * p2(3)
        + p1(1) * p1(2) * p1(3) * p1(4)
        + p1(1) * p1(2) * p2(4)
        + p1(1) * p1(4) * p2(3);
    let quadratic = p2(1) * p2(2) * p2(3) * p2(4);
    let value = (linear - quadratic).abs();
    Ok(Par24Restriction {
        value,
        satisfied: value < 1.0,
        linear,
        quadratic,
    })
}

/// Both roots of `lambda^2 - A lambda + B` inside the unit circle:
/// `|B| < 1` and `|A| < 1 + B`.
pub fn par24_exact_condition(r: &Par24Restriction) -> bool {
    r.quadratic.abs() < 1.0 && r.linear.abs() < 1.0 + r.quadratic
}
