//! TOML run configuration.
//!
//! ```toml
//! schema_version = 1
//!
//! [schedule]
//! kind = "constant"
//! coefficients = { phi0 = 0.0, phi1 = 1.2, phi2 = -0.32, sigma2 = 1.0 }
//!
//! [run]
//! t = 0
//! k = 4
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedules::{CoefficientSchedule, CoefficientTuple, Schedule, VarianceBounds};
use crate::simulate::Innovation;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub schedule: Schedule,
    #[serde(default)]
    pub run: RunParams,
}

/// Command parameters; command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunParams {
    /// Anchor time (forecast origin for `forecast`, first recorded time for `simulate`).
    pub t: Option<i64>,
    /// Depth, horizon or maximum lag.
    pub k: Option<usize>,
    /// Number of periods for periodic block decompositions.
    pub n: Option<usize>,
    /// `(y_t, y_{t-1})` at the forecast origin.
    pub y_init: Option<[f64; 2]>,
    pub tol: Option<f64>,
    pub nmax: Option<usize>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub burn_in: Option<usize>,
    /// Recorded times per simulated path.
    pub length: Option<usize>,
    pub innovation: Option<Innovation>,
}

impl RunConfig {
    pub fn new(schedule: Schedule) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            schedule,
            run: RunParams::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(toml_error)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config("--config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }

    fn check(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        check_schedule(&self.schedule)?;
        if let Some(tol) = self.run.tol {
            if tol.is_nan() || tol <= 0.0 {
                return Err(Error::config("run.tol", format!("must be > 0, got {tol}")));
            }
        }
        if self.run.paths == Some(0) {
            return Err(Error::config("run.paths", "must be >= 1"));
        }
        Ok(())
    }
}

fn toml_error(e: toml::de::Error) -> Error {
    let msg = e.message().to_string();
    // serde reports unknown and missing keys by name inside backticks
    let key = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.contains("field"))
        .unwrap_or("config")
        .to_string();
    Error::config(key, e.to_string().trim_end().replace('\n', " | "))
}

fn check_tuples(
    prefix: &str,
    tuples: &[CoefficientTuple],
    bounds: &VarianceBounds,
    indexed: bool,
) -> Result<()> {
    if !(bounds.lower >= 0.0 && bounds.lower < bounds.upper) {
        return Err(Error::config(
            "schedule.sigma2_bounds",
            format!(
                "need 0 <= lower < upper, got ({}, {})",
                bounds.lower, bounds.upper
            ),
        ));
    }
    for (i, c) in tuples.iter().enumerate() {
        let at = |field: &str| {
            if indexed {
                format!("schedule.{prefix}[{i}].{field}")
            } else {
                format!("schedule.{prefix}.{field}")
            }
        };
        for (name, v) in [("phi0", c.phi0), ("phi1", c.phi1), ("phi2", c.phi2)] {
            if !v.is_finite() {
                return Err(Error::config(at(name), format!("must be finite, got {v}")));
            }
        }
        if !bounds.contains(c.sigma2) {
            return Err(Error::config(
                at("sigma2"),
                format!(
                    "sigma2 must be > 0 and within ({}, {}), got {}",
                    bounds.lower, bounds.upper, c.sigma2
                ),
            ));
        }
    }
    Ok(())
}

/// Field-level checks with precise key paths, then the structural invariants.
pub fn check_schedule(schedule: &Schedule) -> Result<()> {
    let b = schedule.bounds();
    match schedule {
        Schedule::Constant(s) => check_tuples("coefficients", &[s.coefficients], &b, false)?,
        Schedule::Periodic(s) => check_tuples("seasons", &s.seasons, &b, true)?,
        Schedule::Cyclical(s) => check_tuples("cycles", &s.cycles, &b, true)?,
        Schedule::Breaks(s) => check_tuples("regimes", &s.regimes, &b, true)?,
        Schedule::Generic(s) => check_tuples("rows", &s.rows, &b, true)?,
    }
    let findings = schedule.structural_findings();
    if findings.is_empty() {
        Ok(())
    } else {
        Err(Error::config("schedule", findings.join("; ")))
    }
}
