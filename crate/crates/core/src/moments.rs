//! Multi-step forecasts, unconditional moments and autocovariances.
//!
//! Every quantity is a (possibly infinite) sum over the Green functions
//! `xi_{t,i}`. Infinite sums are truncated by a tail test; non-convergence is
//! reported through a `converged` flag rather than an error so explosive
//! schedules remain usable for finite-horizon forecasting.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::schedules::CoefficientSchedule;
use crate::solution::general_solution;
use crate::xi::{green_functions, GreenFunctions};

/// Tail-test parameters for infinite sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub tol: f64,
    pub n_max: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            n_max: 10_000,
        }
    }
}

impl Truncation {
    pub fn new(tol: f64, n_max: usize) -> Result<Self> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::domain(format!("tol must be > 0, got {tol}")));
        }
        Ok(Self { tol, n_max })
    }

    /// Consecutive small terms required: `max(10, ceil(ln(1/tol)))`.
    pub fn window(&self) -> usize {
        ((1.0 / self.tol).ln().ceil().max(10.0)) as usize
    }
}

/// Result of a truncated series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Number of terms summed.
    pub terms: usize,
    /// Estimated magnitude of the neglected tail.
    pub residual: f64,
    pub converged: bool,
}

struct TailSum {
    trunc: Truncation,
    window: usize,
    sum: f64,
    comp: f64,
    terms: usize,
    small_run: usize,
    recent: Vec<f64>,
}

impl TailSum {
    fn new(trunc: Truncation) -> Self {
        let window = trunc.window();
        Self {
            trunc,
            window,
            sum: 0.0,
            comp: 0.0,
            terms: 0,
            small_run: 0,
            recent: Vec::with_capacity(window),
        }
    }

    /// Add a term; returns `true` once the tail test has passed.
    fn push(&mut self, term: f64) -> bool {
        // Neumaier summation
        let s = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - s) + term;
        } else {
            self.comp += (term - s) + self.sum;
        }
        self.sum = s;
        self.terms += 1;
        if self.recent.len() == self.window {
            self.recent.remove(0);
        }
        self.recent.push(term.abs());
        let scale = self.value().abs().max(1.0);
        if term.abs() < self.trunc.tol * scale {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        self.small_run >= self.window
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }

    fn exhausted(&self) -> bool {
        self.terms >= self.trunc.n_max
    }

    fn finish(self, converged: bool) -> SeriesSum {
        let residual = if converged {
            let first = self.recent.first().copied().unwrap_or(0.0);
            let last = self.recent.last().copied().unwrap_or(0.0);
            let n = self.recent.len().max(2) as f64 - 1.0;
            let ratio = if first > 0.0 {
                (last / first).powf(1.0 / n)
            } else {
                0.0
            };
            if ratio < 1.0 && last > 0.0 {
                last * ratio / (1.0 - ratio)
            } else {
                self.recent.iter().sum()
            }
        } else {
            f64::INFINITY
        };
        SeriesSum {
            value: self.value(),
            terms: self.terms,
            residual,
            converged,
        }
    }
}

fn sum_series(trunc: Truncation, mut term: impl FnMut(usize) -> Result<f64>) -> Result<SeriesSum> {
    let mut acc = TailSum::new(trunc);
    let mut i = 0;
    while !acc.exhausted() {
        if acc.push(term(i)?) {
            return Ok(acc.finish(true));
        }
        i += 1;
    }
    Ok(acc.finish(false))
}

/// k-step-ahead optimal linear predictor of `y_t` from information at `t - k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForecastResult {
    pub anchor: i64,
    pub horizon: usize,
    pub point: f64,
    /// `xi_{t,i}`, `i = 0..k`: the forecast error is `sum_i xi_{t,i} eps_{t-i}`.
    pub error_weights: Vec<f64>,
    /// `sum_i xi_{t,i}^2 sigma2(t-i)`.
    pub mse: f64,
}

/// Forecast of `y_t` given `y_init = (y_{t-k}, y_{t-k-1})`.
pub fn forecast<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    k: usize,
    y_init: (f64, f64),
) -> Result<ForecastResult> {
    if k == 0 {
        return Err(Error::domain("forecast horizon must be >= 1"));
    }
    let sol = general_solution(schedule, t, k)?;
    let mut mse = 0.0;
    for (i, w) in sol.innovation_weights.iter().enumerate() {
        mse += w * w * schedule.sigma2(t - i as i64)?;
    }
    Ok(ForecastResult {
        anchor: t,
        horizon: k,
        point: sol.drift + sol.homogeneous(y_init),
        error_weights: sol.innovation_weights,
        mse,
    })
}

/// `[xi_{t,0}, ..., xi_{t,k-1}]`.
pub fn forecast_error_weights<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    k: usize,
) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::domain("forecast horizon must be >= 1"));
    }
    let mut v = green_functions(schedule, t, k - 1)?.into_values();
    v.truncate(k);
    Ok(v)
}

/// `E(y_t) = sum_i xi_{t,i} phi0(t-i)`.
pub fn unconditional_mean<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    trunc: Truncation,
) -> Result<SeriesSum> {
    let mut xi = GreenFunctions::new(schedule, t);
    sum_series(trunc, |i| {
        Ok(xi.next_value()? * schedule.phi0(t - i as i64)?)
    })
}

/// `Var(y_t) = sum_i xi_{t,i}^2 sigma2(t-i)`.
fn variance_series<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    trunc: Truncation,
) -> Result<SeriesSum> {
    let mut xi = GreenFunctions::new(schedule, t);
    sum_series(trunc, |i| {
        let x = xi.next_value()?;
        Ok(x * x * schedule.sigma2(t - i as i64)?)
    })
}

/// First two unconditional moments of `y_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentSummary {
    pub anchor: i64,
    /// Largest number of terms used by either series.
    pub depth: usize,
    pub mean: f64,
    pub variance: f64,
    /// `E(y_t^2) = E(y_t)^2 + Var(y_t)`.
    pub second_moment: f64,
    pub residual: f64,
    pub mean_converged: bool,
    pub variance_converged: bool,
    pub converged: bool,
}

pub fn unconditional_variance<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    trunc: Truncation,
) -> Result<MomentSummary> {
    let mean = unconditional_mean(schedule, t, trunc)?;
    let var = variance_series(schedule, t, trunc)?;
    Ok(MomentSummary {
        anchor: t,
        depth: mean.terms.max(var.terms),
        mean: mean.value,
        variance: var.value,
        second_moment: mean.value * mean.value + var.value,
        residual: mean.residual.max(var.residual),
        mean_converged: mean.converged,
        variance_converged: var.converged,
        converged: mean.converged && var.converged,
    })
}

/// `gamma_{t,k} = Cov(y_t, y_{t-k}) = sum_i xi_{t,k+i} xi_{t-k,i} sigma2(t-k-i)`.
pub fn autocovariance<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    k: usize,
    trunc: Truncation,
) -> Result<SeriesSum> {
    let tau = t - k as i64;
    let mut lead = GreenFunctions::new(schedule, t);
    for _ in 0..k {
        lead.next_value()?;
    }
    let mut lag = GreenFunctions::new(schedule, tau);
    sum_series(trunc, |i| {
        let a = lead.next_value()?;
        let b = lag.next_value()?;
        Ok(a * b * schedule.sigma2(tau - i as i64)?)
    })
}

/// `gamma_{t,k}` through the general solution:
/// `xi_{t,k} Var(y_{t-k}) + phi2(t-k+1) xi_{t,k-1} Cov(y_{t-k}, y_{t-k-1})`,
/// with both moments on the right taken from their series.
pub fn autocovariance_recursive<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    k: usize,
    trunc: Truncation,
) -> Result<SeriesSum> {
    let tau = t - k as i64;
    let var = variance_series(schedule, tau, trunc)?;
    if k == 0 {
        return Ok(var);
    }
    let table = green_functions(schedule, t, k)?;
    let cov = autocovariance(schedule, tau, 1, trunc)?;
    let w1 = schedule.phi2(tau + 1)? * table.get(k as isize - 1);
    let w0 = table.get(k as isize);
    Ok(SeriesSum {
        value: w0 * var.value + w1 * cov.value,
        terms: var.terms.max(cov.terms),
        residual: w0.abs() * var.residual + w1.abs() * cov.residual,
        converged: var.converged && cov.converged,
    })
}

/// Variances at many anchors, evaluated in parallel; results are in input order.
pub fn variance_profile<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    anchors: &[i64],
    trunc: Truncation,
) -> Result<Vec<MomentSummary>> {
    anchors
        .par_iter()
        .map(|&t| unconditional_variance(schedule, t, trunc))
        .collect()
}

/// Empirical evidence for summability of the Green functions over a window of anchors.
#[derive(Clone, Debug, PartialEq)]
pub struct SummabilityReport {
    pub depth: usize,
    /// `max_t sum_{i<=N} xi_{t,i}^2 sigma2(t-i)`.
    pub max_variance_sum: f64,
    pub argmax_anchor: i64,
    /// `max_t |sum_{N-w<i<=N} xi_{t,i} phi0(t-i)|`, the last drift partial-sum increment.
    pub max_drift_increment: f64,
    pub variance_within_bound: bool,
    pub drift_settled: bool,
}

impl SummabilityReport {
    pub fn passed(&self) -> bool {
        self.variance_within_bound && self.drift_settled
    }
}

/// Heuristic check that the variance partial sums stay under `bound` and the
/// drift partial sums have settled to within `tol` over every anchor in `window`.
/// Finite computation can only sample anchors, so passing is evidence, not proof.
pub fn summability_diagnostic<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    window: std::ops::RangeInclusive<i64>,
    depth: usize,
    bound: f64,
    tol: f64,
) -> Result<SummabilityReport> {
    if depth == 0 {
        return Err(Error::domain("diagnostic depth must be >= 1"));
    }
    let tail = (depth / 10).max(1);
    let mut max_var = f64::NEG_INFINITY;
    let mut argmax = *window.start();
    let mut max_inc: f64 = 0.0;
    for t in window {
        let mut xi = GreenFunctions::new(schedule, t);
        let (mut var, mut inc) = (0.0, 0.0);
        for i in 0..=depth {
            let x = xi.next_value()?;
            let ti = t - i as i64;
            let c = schedule.evaluate(ti)?;
            var += x * x * c.sigma2;
            if i + tail > depth {
                inc += x * c.phi0;
            }
        }
        if var.is_nan() || var > max_var {
            max_var = var;
            argmax = t;
        }
        max_inc = if inc.is_nan() {
            f64::NAN
        } else {
            max_inc.max(inc.abs())
        };
    }
    Ok(SummabilityReport {
        depth,
        max_variance_sum: max_var,
        argmax_anchor: argmax,
        max_drift_increment: max_inc,
        variance_within_bound: max_var < bound,
        drift_settled: max_inc < tol,
    })
}
