//! Monte Carlo paths of the TV-AR(2) recursion.
//!
//! Each path is driven by its own ChaCha8 stream (`stream = path index`) of
//! the master seed, so an ensemble is a pure function of the configuration
//! and never of the number of worker threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedules::CoefficientSchedule;
use crate::xi::green_functions;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Innovation {
    /// `sigma_t * N(0, 1)`.
    #[default]
    Gaussian,
    /// Uniform on `[-sqrt(3) sigma_t, sqrt(3) sigma_t]`.
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    /// First recorded time.
    pub start: i64,
    /// Steps simulated before `start`, from `y = 0`.
    pub burn_in: usize,
    /// Number of recorded times.
    pub length: usize,
    pub paths: usize,
    pub seed: u64,
    pub innovation: Innovation,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            start: 0,
            burn_in: 500,
            length: 1,
            paths: 1000,
            seed: 0,
            innovation: Innovation::Gaussian,
        }
    }
}

impl SimulationConfig {
    pub fn end(&self) -> i64 {
        self.start + self.length as i64 - 1
    }

    fn check(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::domain("simulation needs at least one path"));
        }
        if self.length == 0 {
            return Err(Error::domain("simulation needs at least one recorded time"));
        }
        Ok(())
    }
}

/// Simulated values, one row per path over `start..=end`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    pub start: i64,
    pub paths: Vec<Vec<f64>>,
}

impl PathEnsemble {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn end(&self) -> i64 {
        self.start + self.paths.first().map_or(0, |p| p.len()) as i64 - 1
    }

    /// Values of every path at time `t`.
    pub fn at(&self, t: i64) -> Result<Vec<f64>> {
        if t < self.start || t > self.end() {
            return Err(Error::OutOfWindow {
                t,
                lo: self.start,
                hi: self.end(),
            });
        }
        let i = (t - self.start) as usize;
        Ok(self.paths.iter().map(|p| p[i]).collect())
    }
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn draw(rng: &mut ChaCha8Rng, innovation: Innovation, sigma: f64) -> f64 {
    match innovation {
        Innovation::Gaussian => sigma * rng.sample::<f64, _>(StandardNormal),
        Innovation::Uniform => sigma * 3f64.sqrt() * rng.random_range(-1.0..1.0),
    }
}

fn simulate_one<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    config: &SimulationConfig,
    coeffs: &[crate::schedules::CoefficientTuple],
    index: usize,
) -> Vec<f64> {
    let mut rng = path_rng(config.seed, index);
    let (mut y1, mut y2) = (0.0, 0.0);
    let mut out = Vec::with_capacity(config.length);
    for (step, c) in coeffs.iter().enumerate() {
        let e = draw(&mut rng, config.innovation, c.sigma2.sqrt());
        let y = c.phi0 + c.phi1 * y1 + c.phi2 * y2 + e;
        y2 = y1;
        y1 = y;
        if step >= config.burn_in {
            out.push(y);
        }
    }
    let _ = schedule;
    out
}

/// Simulate `config.paths` independent paths in parallel.
pub fn simulate_paths<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    config: &SimulationConfig,
) -> Result<PathEnsemble> {
    config.check()?;
    let first = config.start - config.burn_in as i64;
    let coeffs = (first..=config.end())
        .map(|t| schedule.evaluate(t))
        .collect::<Result<Vec<_>>>()?;
    let paths = (0..config.paths)
        .into_par_iter()
        .map(|i| simulate_one(schedule, config, &coeffs, i))
        .collect();
    Ok(PathEnsemble {
        start: config.start,
        paths,
    })
}

/// Sample estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// `|value - target| / se`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.se
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean of `xs` with `sd / sqrt(n)`.
pub fn mean_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    Estimate {
        value: m,
        se: (var / n).sqrt(),
    }
}

/// Sample covariance of paired draws; the SE is that of the mean of the
/// centred products.
pub fn covariance_estimate(xs: &[f64], ys: &[f64]) -> Estimate {
    let (mx, my) = (mean(xs), mean(ys));
    let products: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .collect();
    let n = xs.len() as f64;
    let est = mean_estimate(&products);
    Estimate {
        value: est.value * n / (n - 1.0).max(1.0),
        se: est.se,
    }
}

/// Cross-sectional moments of the ensemble at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMoments {
    pub anchor: i64,
    pub mean: Estimate,
    pub variance: Estimate,
    /// `autocovariances[k] = Cov(y_t, y_{t-k})`, `k = 0..=max_lag` (as far as recorded).
    pub autocovariances: Vec<Estimate>,
}

pub fn empirical_moments(
    ensemble: &PathEnsemble,
    t: i64,
    max_lag: usize,
) -> Result<EmpiricalMoments> {
    let now = ensemble.at(t)?;
    let variance = covariance_estimate(&now, &now);
    let mut autocovariances = Vec::new();
    for k in 0..=max_lag {
        let lagged = t - k as i64;
        if lagged < ensemble.start {
            break;
        }
        autocovariances.push(covariance_estimate(&now, &ensemble.at(lagged)?));
    }
    Ok(EmpiricalMoments {
        anchor: t,
        mean: mean_estimate(&now),
        variance,
        autocovariances,
    })
}

/// Realized k-step forecast errors at `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForecastErrorStats {
    pub mean: Estimate,
    pub variance: Estimate,
}

/// Simulate and compare each path's `y_t` with the analytic predictor built
/// from the same path's `(y_{t-k}, y_{t-k-1})`.
pub fn empirical_forecast_error<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    config: &SimulationConfig,
    t: i64,
    k: usize,
) -> Result<ForecastErrorStats> {
    if k == 0 {
        return Err(Error::domain("forecast horizon must be >= 1"));
    }
    if config.paths < 100 {
        return Err(Error::domain(format!(
            "empirical forecast error needs at least 100 paths, got {}",
            config.paths
        )));
    }
    let first_needed = t - k as i64 - 1;
    let mut cfg = config.clone();
    if cfg.start > first_needed || cfg.end() < t {
        cfg.start = first_needed;
        cfg.length = k + 2;
    }
    let ensemble = simulate_paths(schedule, &cfg)?;
    let sol = crate::solution::general_solution(schedule, t, k)?;
    let (y_t, y_k, y_k1) = (
        ensemble.at(t)?,
        ensemble.at(t - k as i64)?,
        ensemble.at(first_needed)?,
    );
    let errors: Vec<f64> = (0..ensemble.len())
        .map(|p| y_t[p] - (sol.drift + sol.homogeneous((y_k[p], y_k1[p]))))
        .collect();
    Ok(ForecastErrorStats {
        mean: mean_estimate(&errors),
        variance: covariance_estimate(&errors, &errors),
    })
}

/// Analytic k-step forecast MSE for comparison with [`empirical_forecast_error`].
pub fn analytic_forecast_mse<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    t: i64,
    k: usize,
) -> Result<f64> {
    let xi = green_functions(schedule, t, k)?;
    let mut mse = 0.0;
    for i in 0..k {
        let w = xi.get(i as isize);
        mse += w * w * schedule.sigma2(t - i as i64)?;
    }
    Ok(mse)
}
