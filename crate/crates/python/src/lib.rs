//! Python bindings for `tvar`.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tvar::blockdet::{compare_abar, compare_car, compare_par, ThreeWay};
use tvar::moments::{self, Truncation};
use tvar::schedules::{self as sch, CoefficientSchedule};
use tvar::simulate::{self as sim, Innovation, SimulationConfig};
use tvar::vs_rep;

create_exception!(
    tvar_py,
    TvarError,
    PyValueError,
    "Raised for invalid schedules and out-of-domain arguments."
);
create_exception!(
    tvar_py,
    ConfigError,
    TvarError,
    "Raised for malformed configuration."
);

fn err(e: tvar::Error) -> PyErr {
    match e {
        tvar::Error::Config { .. } => ConfigError::new_err(e.to_string()),
        _ => TvarError::new_err(e.to_string()),
    }
}

type PyRes<T> = PyResult<T>;

/// Coefficients `(phi0, phi1, phi2, sigma2)` for one time step.
#[pyclass(name = "CoefficientTuple", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTuple4 {
    inner: sch::CoefficientTuple,
}

#[pymethods]
impl PyTuple4 {
    #[new]
    #[pyo3(signature = (phi0, phi1, phi2, sigma2 = 1.0))]
    fn new(phi0: f64, phi1: f64, phi2: f64, sigma2: f64) -> Self {
        Self {
            inner: sch::CoefficientTuple::new(phi0, phi1, phi2, sigma2),
        }
    }

    #[getter]
    fn phi0(&self) -> f64 {
        self.inner.phi0
    }
    #[getter]
    fn phi1(&self) -> f64 {
        self.inner.phi1
    }
    #[getter]
    fn phi2(&self) -> f64 {
        self.inner.phi2
    }
    #[getter]
    fn sigma2(&self) -> f64 {
        self.inner.sigma2
    }

    fn __repr__(&self) -> String {
        let c = self.inner;
        format!(
            "CoefficientTuple(phi0={}, phi1={}, phi2={}, sigma2={})",
            c.phi0, c.phi1, c.phi2, c.sigma2
        )
    }
}

fn tuples(rows: Vec<(f64, f64, f64, f64)>) -> Vec<sch::CoefficientTuple> {
    rows.into_iter()
        .map(|(a, b, c, d)| sch::CoefficientTuple::new(a, b, c, d))
        .collect()
}

/// A coefficient schedule of any supported kind.
#[pyclass(name = "Schedule", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySchedule {
    inner: sch::Schedule,
}

#[pymethods]
impl PySchedule {
    /// Time-invariant AR(2).
    #[staticmethod]
    #[pyo3(signature = (phi1, phi2, phi0 = 0.0, sigma2 = 1.0))]
    fn constant(phi1: f64, phi2: f64, phi0: f64, sigma2: f64) -> PyRes<Self> {
        let s = sch::ConstantSchedule::new(sch::CoefficientTuple::new(phi0, phi1, phi2, sigma2))
            .map_err(err)?;
        Ok(Self { inner: s.into() })
    }

    /// One `(phi0, phi1, phi2, sigma2)` row per season.
    #[staticmethod]
    fn periodic(seasons: Vec<(f64, f64, f64, f64)>) -> PyRes<Self> {
        let s = sch::PeriodicSchedule::new(tuples(seasons)).map_err(err)?;
        Ok(Self { inner: s.into() })
    }

    /// `seasons` per period split at the interior `boundaries`, one row per cycle.
    #[staticmethod]
    fn cyclical(
        seasons: usize,
        boundaries: Vec<usize>,
        cycles: Vec<(f64, f64, f64, f64)>,
    ) -> PyRes<Self> {
        let s = sch::CyclicalSchedule::new(seasons, boundaries, tuples(cycles)).map_err(err)?;
        Ok(Self { inner: s.into() })
    }

    /// Regimes newest first, separated at `offsets` steps before `anchor`.
    #[staticmethod]
    fn breaks(
        anchor: i64,
        horizon: usize,
        offsets: Vec<usize>,
        regimes: Vec<(f64, f64, f64, f64)>,
    ) -> PyRes<Self> {
        let s = sch::BreakSchedule::new(anchor, horizon, offsets, tuples(regimes)).map_err(err)?;
        Ok(Self { inner: s.into() })
    }

    /// Rows for consecutive times starting at `start`.
    #[staticmethod]
    fn tabulated(start: i64, rows: Vec<(f64, f64, f64, f64)>) -> PyRes<Self> {
        let s = sch::TabulatedSchedule::new(start, tuples(rows)).map_err(err)?;
        Ok(Self { inner: s.into() })
    }

    /// Parse the `[schedule]` table of a run configuration.
    #[staticmethod]
    fn from_toml(text: &str) -> PyRes<Self> {
        let cfg = tvar::cli::config::RunConfig::from_toml(text).map_err(err)?;
        Ok(Self {
            inner: cfg.schedule,
        })
    }

    fn to_toml(&self) -> String {
        tvar::cli::config::RunConfig::new(self.inner.clone()).to_toml()
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    fn __call__(&self, t: i64) -> PyRes<PyTuple4> {
        Ok(PyTuple4 {
            inner: self.inner.evaluate(t).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Schedule(kind={:?})", self.kind())
    }
}

/// `xi_{t,k}`.
#[pyfunction]
fn xi(schedule: &PySchedule, t: i64, k: isize) -> PyRes<f64> {
    tvar::xi::xi(&schedule.inner, t, k).map_err(err)
}

/// `[xi_{t,0}, ..., xi_{t,k}]`.
#[pyfunction]
fn green_functions(schedule: &PySchedule, t: i64, k: usize) -> PyRes<Vec<f64>> {
    Ok(tvar::xi::green_functions(&schedule.inner, t, k)
        .map_err(err)?
        .into_values())
}

/// `xi_{t,k}` as a dense determinant.
#[pyfunction]
fn xi_determinant(schedule: &PySchedule, t: i64, k: usize) -> PyRes<f64> {
    tvar::xi::xi_determinant_oracle(&schedule.inner, t, k).map_err(err)
}

#[pyclass(name = "GeneralSolution", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PySolution {
    anchor: i64,
    lookback: usize,
    w0: f64,
    w1: f64,
    drift: f64,
    innovation_weights: Vec<f64>,
}

#[pymethods]
impl PySolution {
    /// `y_t` from `(y_{t-k}, y_{t-k-1})` and innovations ordered oldest first.
    fn evaluate(&self, y_init: (f64, f64), innovations: Vec<f64>) -> PyRes<f64> {
        self.to_rust().evaluate(y_init, &innovations).map_err(err)
    }
}

impl PySolution {
    fn to_rust(&self) -> tvar::solution::GeneralSolution {
        tvar::solution::GeneralSolution {
            anchor: self.anchor,
            lookback: self.lookback,
            w0: self.w0,
            w1: self.w1,
            drift: self.drift,
            innovation_weights: self.innovation_weights.clone(),
        }
    }
}

#[pyfunction]
fn general_solution(schedule: &PySchedule, t: i64, k: usize) -> PyRes<PySolution> {
    let s = tvar::solution::general_solution(&schedule.inner, t, k).map_err(err)?;
    Ok(PySolution {
        anchor: s.anchor,
        lookback: s.lookback,
        w0: s.w0,
        w1: s.w1,
        drift: s.drift,
        innovation_weights: s.innovation_weights,
    })
}

/// Iterate the recursion up to `t`; returns `y_t`.
#[pyfunction]
fn forward_recursion(
    schedule: &PySchedule,
    t: i64,
    y_init: (f64, f64),
    innovations: Vec<f64>,
) -> PyRes<f64> {
    tvar::solution::forward_recursion(&schedule.inner, t, y_init, &innovations).map_err(err)
}

/// `(point, mse)` of the k-step forecast of `y_t`.
#[pyfunction]
#[pyo3(signature = (schedule, t, k, y_init = (0.0, 0.0)))]
fn forecast(schedule: &PySchedule, t: i64, k: usize, y_init: (f64, f64)) -> PyRes<(f64, f64)> {
    let f = moments::forecast(&schedule.inner, t, k, y_init).map_err(err)?;
    Ok((f.point, f.mse))
}

fn trunc(tol: f64, nmax: usize) -> PyRes<Truncation> {
    Truncation::new(tol, nmax).map_err(err)
}

/// `(mean, variance, converged)` of `y_t`.
#[pyfunction]
#[pyo3(signature = (schedule, t, tol = 1e-12, nmax = 10_000))]
fn unconditional_moments(
    schedule: &PySchedule,
    t: i64,
    tol: f64,
    nmax: usize,
) -> PyRes<(f64, f64, bool)> {
    let m = moments::unconditional_variance(&schedule.inner, t, trunc(tol, nmax)?).map_err(err)?;
    Ok((m.mean, m.variance, m.converged))
}

/// `(gamma_{t,k}, converged)`.
#[pyfunction]
#[pyo3(signature = (schedule, t, k, tol = 1e-12, nmax = 10_000))]
fn autocovariance(
    schedule: &PySchedule,
    t: i64,
    k: usize,
    tol: f64,
    nmax: usize,
) -> PyRes<(f64, bool)> {
    let g = moments::autocovariance(&schedule.inner, t, k, trunc(tol, nmax)?).map_err(err)?;
    Ok((g.value, g.converged))
}

fn periodic_of(schedule: &PySchedule) -> PyRes<sch::PeriodicSchedule> {
    match &schedule.inner {
        sch::Schedule::Periodic(p) => Ok(p.clone()),
        sch::Schedule::Cyclical(c) => c.to_periodic().map_err(err),
        other => Err(TvarError::new_err(format!(
            "expected a periodic or cyclical schedule, got {}",
            other.kind()
        ))),
    }
}

/// `(verdict, spectral_radius, margin)` from the vector-of-seasons form.
#[pyfunction]
fn stationarity(schedule: &PySchedule) -> PyRes<(String, f64, f64)> {
    let vs = vs_rep::build_vs(&periodic_of(schedule)?).map_err(err)?;
    let v = vs_rep::stationarity_check(&vs);
    let verdict = match v.verdict {
        vs_rep::Verdict::Stationary => "stationary",
        vs_rep::Verdict::NonStationary => "nonstationary",
        vs_rep::Verdict::Indeterminate => "indeterminate",
    };
    Ok((verdict.into(), v.spectral_radius, v.margin))
}

/// `(value, satisfied, exact)` for a four-season schedule: the eight-term
/// expression, its `< 1` flag and the exact two-root condition.
#[pyfunction]
fn par24_restriction(schedule: &PySchedule) -> PyRes<(f64, bool, bool)> {
    let r = vs_rep::par24_restriction(&periodic_of(schedule)?).map_err(err)?;
    Ok((r.value, r.satisfied, vs_rep::par24_exact_condition(&r)))
}

/// `(recurrence, decomposed, block_determinant, terms)`.
#[pyfunction]
#[pyo3(signature = (schedule, t = None, n = 2))]
fn decompose(schedule: &PySchedule, t: Option<i64>, n: usize) -> PyRes<(f64, f64, f64, usize)> {
    let r: ThreeWay = match &schedule.inner {
        sch::Schedule::Periodic(p) => compare_par(p, t.unwrap_or(0), n),
        sch::Schedule::Cyclical(c) => compare_car(c, t.unwrap_or(c.seasons as i64)),
        sch::Schedule::Breaks(b) => compare_abar(b),
        other => {
            return Err(TvarError::new_err(format!(
                "no block decomposition for {} schedules",
                other.kind()
            )))
        }
    }
    .map_err(err)?;
    Ok((r.recurrence, r.decomposed, r.block_determinant, r.terms))
}

fn sim_config(
    start: i64,
    length: usize,
    paths: usize,
    burn_in: usize,
    seed: u64,
    uniform: bool,
) -> SimulationConfig {
    SimulationConfig {
        start,
        burn_in,
        length,
        paths,
        seed,
        innovation: if uniform {
            Innovation::Uniform
        } else {
            Innovation::Gaussian
        },
    }
}

/// Simulated paths as a list of lists, one per path, covering `start..start + length`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (schedule, start, length, paths, seed = 0, burn_in = 500, uniform = false))]
fn simulate(
    py: Python<'_>,
    schedule: &PySchedule,
    start: i64,
    length: usize,
    paths: usize,
    seed: u64,
    burn_in: usize,
    uniform: bool,
) -> PyRes<Vec<Vec<f64>>> {
    let cfg = sim_config(start, length, paths, burn_in, seed, uniform);
    let inner = &schedule.inner;
    let e = py
        .detach(|| sim::simulate_paths(inner, &cfg))
        .map_err(err)?;
    Ok(e.paths)
}

/// `(variance, se, mean, mean_se)` of realized k-step forecast errors at `t`.
#[pyfunction]
#[pyo3(signature = (schedule, t, k, paths, seed = 0, burn_in = 500))]
fn empirical_forecast_error(
    py: Python<'_>,
    schedule: &PySchedule,
    t: i64,
    k: usize,
    paths: usize,
    seed: u64,
    burn_in: usize,
) -> PyRes<(f64, f64, f64, f64)> {
    let cfg = sim_config(t - k as i64 - 1, k + 2, paths, burn_in, seed, false);
    let inner = &schedule.inner;
    let fe = py
        .detach(|| sim::empirical_forecast_error(inner, &cfg, t, k))
        .map_err(err)?;
    Ok((fe.variance.value, fe.variance.se, fe.mean.value, fe.mean.se))
}

#[pymodule]
fn tvar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TvarError", m.py().get_type::<TvarError>())?;
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add_class::<PyTuple4>()?;
    m.add_class::<PySchedule>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(xi, m)?)?;
    m.add_function(wrap_pyfunction!(green_functions, m)?)?;
    m.add_function(wrap_pyfunction!(xi_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(general_solution, m)?)?;
    m.add_function(wrap_pyfunction!(forward_recursion, m)?)?;
    m.add_function(wrap_pyfunction!(forecast, m)?)?;
    m.add_function(wrap_pyfunction!(unconditional_moments, m)?)?;
    m.add_function(wrap_pyfunction!(autocovariance, m)?)?;
    m.add_function(wrap_pyfunction!(stationarity, m)?)?;
    m.add_function(wrap_pyfunction!(par24_restriction, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_forecast_error, m)?)?;
    Ok(())
}
