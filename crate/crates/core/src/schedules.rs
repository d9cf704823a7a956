//! Coefficient schedules for the time-varying AR(2) recursion
//!
//! ```text
//! y_t = phi0(t) + phi1(t) y_{t-1} + phi2(t) y_{t-2} + eps_t,   Var(eps_t) = sigma2(t)
//! ```
//!
//! A schedule maps an absolute integer time index to the tuple
//! `(phi0, phi1, phi2, sigma2)` governing that time. All model families
//! (constant AR(2), periodic PAR(2;l), cyclical CAR(2;l;d), abrupt-break
//! ABAR(2;r) and arbitrary tabulated coefficients) implement
//! [`CoefficientSchedule`]; every algorithm in the crate is generic over it.
//!
//! Seasons are numbered `1..=l` with `t = T*l + s`, i.e. `s = ((t - 1) mod l) + 1`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The coefficients governing a single time step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientTuple {
    pub phi0: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub sigma2: f64,
}

impl CoefficientTuple {
    pub const fn new(phi0: f64, phi1: f64, phi2: f64, sigma2: f64) -> Self {
        Self {
            phi0,
            phi1,
            phi2,
            sigma2,
        }
    }

    /// Zero drift, unit innovation variance.
    pub const fn ar(phi1: f64, phi2: f64) -> Self {
        Self::new(0.0, phi1, phi2, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Generic,
    Constant,
    Periodic,
    Cyclical,
    AbruptBreaks,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScheduleKind::Generic => "generic",
            ScheduleKind::Constant => "constant",
            ScheduleKind::Periodic => "periodic",
            ScheduleKind::Cyclical => "cyclical",
            ScheduleKind::AbruptBreaks => "abrupt-breaks",
        };
        f.write_str(s)
    }
}

/// Open interval `(lower, upper)` that every innovation variance must lie in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceBounds {
    pub lower: f64,
    pub upper: f64,
}

impl Default for VarianceBounds {
    fn default() -> Self {
        Self {
            lower: 1e-12,
            upper: 1e12,
        }
    }
}

impl VarianceBounds {
    pub fn contains(&self, sigma2: f64) -> bool {
        self.lower < sigma2 && sigma2 < self.upper
    }

    fn check(&self, t: i64, sigma2: f64) -> Result<()> {
        if self.contains(sigma2) {
            Ok(())
        } else {
            Err(Error::VarianceBounds {
                t,
                value: sigma2,
                lo: self.lower,
                hi: self.upper,
            })
        }
    }

    fn is_default(&self) -> bool {
        *self == Self::default()
    }
}

/// A deterministic map from time index to [`CoefficientTuple`].
///
/// Implementors provide [`lookup`](Self::lookup); callers should use
/// [`evaluate`](Self::evaluate), which also enforces the variance bounds.
pub trait CoefficientSchedule: Send + Sync {
    fn kind(&self) -> ScheduleKind;

    /// Raw coefficients at `t`, failing only for out-of-window queries.
    fn lookup(&self, t: i64) -> Result<CoefficientTuple>;

    fn bounds(&self) -> VarianceBounds {
        VarianceBounds::default()
    }

    /// Inclusive range of valid query times, `None` when unbounded.
    fn window(&self) -> Option<(i64, i64)> {
        None
    }

    /// Period in time steps for periodic and cyclical schedules.
    fn period(&self) -> Option<usize> {
        None
    }

    /// Violations of construction invariants that do not depend on `t`.
    fn structural_findings(&self) -> Vec<String> {
        Vec::new()
    }

    fn evaluate(&self, t: i64) -> Result<CoefficientTuple> {
        let c = self.lookup(t)?;
        self.bounds().check(t, c.sigma2)?;
        Ok(c)
    }

    fn phi0(&self, t: i64) -> Result<f64> {
        self.evaluate(t).map(|c| c.phi0)
    }

    fn phi1(&self, t: i64) -> Result<f64> {
        self.evaluate(t).map(|c| c.phi1)
    }

    fn phi2(&self, t: i64) -> Result<f64> {
        self.evaluate(t).map(|c| c.phi2)
    }

    fn sigma2(&self, t: i64) -> Result<f64> {
        self.evaluate(t).map(|c| c.sigma2)
    }
}

impl<S: CoefficientSchedule + ?Sized> CoefficientSchedule for &S {
    fn kind(&self) -> ScheduleKind {
        (**self).kind()
    }
    fn lookup(&self, t: i64) -> Result<CoefficientTuple> {
        (**self).lookup(t)
    }
    fn bounds(&self) -> VarianceBounds {
        (**self).bounds()
    }
    fn window(&self) -> Option<(i64, i64)> {
        (**self).window()
    }
    fn period(&self) -> Option<usize> {
        (**self).period()
    }
    fn structural_findings(&self) -> Vec<String> {
        (**self).structural_findings()
    }
}

/// Season `s in 1..=l` of time `t`.
pub fn season_of(t: i64, l: usize) -> usize {
    (t - 1).rem_euclid(l as i64) as usize + 1
}

fn tuple_findings(
    label: &str,
    tuples: &[CoefficientTuple],
    bounds: &VarianceBounds,
) -> Vec<String> {
    let mut out = Vec::new();
    for (i, c) in tuples.iter().enumerate() {
        if !(c.phi0.is_finite() && c.phi1.is_finite() && c.phi2.is_finite()) {
            out.push(format!("{label} {}: coefficients must be finite", i + 1));
        }
        if !bounds.contains(c.sigma2) {
            out.push(format!(
                "{label} {}: sigma2 must be > 0 and within ({}, {}), got {}",
                i + 1,
                bounds.lower,
                bounds.upper,
                c.sigma2
            ));
        }
    }
    out
}

fn bounds_findings(bounds: &VarianceBounds) -> Vec<String> {
    if bounds.lower >= 0.0 && bounds.lower < bounds.upper {
        Vec::new()
    } else {
        vec![format!(
            "sigma2 bounds must satisfy 0 <= lower < upper, got ({}, {})",
            bounds.lower, bounds.upper
        )]
    }
}

fn into_result<T>(value: T, findings: Vec<String>) -> Result<T> {
    if findings.is_empty() {
        Ok(value)
    } else {
        Err(Error::invalid(findings.join("; ")))
    }
}

/// Time-invariant AR(2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantSchedule {
    pub coefficients: CoefficientTuple,
    #[serde(
        default,
        skip_serializing_if = "VarianceBounds::is_default",
        rename = "sigma2_bounds"
    )]
    pub bounds: VarianceBounds,
}

impl ConstantSchedule {
    pub fn new(coefficients: CoefficientTuple) -> Result<Self> {
        Self::with_bounds(coefficients, VarianceBounds::default())
    }

    pub fn with_bounds(coefficients: CoefficientTuple, bounds: VarianceBounds) -> Result<Self> {
        let s = Self {
            coefficients,
            bounds,
        };
        let f = s.structural_findings();
        into_result(s, f)
    }
}

impl CoefficientSchedule for ConstantSchedule {
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::Constant
    }
    fn lookup(&self, _t: i64) -> Result<CoefficientTuple> {
        Ok(self.coefficients)
    }
    fn bounds(&self) -> VarianceBounds {
        self.bounds
    }
    fn structural_findings(&self) -> Vec<String> {
        let mut f = bounds_findings(&self.bounds);
        f.extend(tuple_findings(
            "coefficients",
            &[self.coefficients],
            &self.bounds,
        ));
        f
    }
}

/// PAR(2;l): one coefficient tuple per season, repeating with period `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicSchedule {
    /// `seasons[s - 1]` governs every `t` with `season_of(t, l) == s`.
    pub seasons: Vec<CoefficientTuple>,
    #[serde(
        default,
        skip_serializing_if = "VarianceBounds::is_default",
        rename = "sigma2_bounds"
    )]
    pub bounds: VarianceBounds,
}

impl PeriodicSchedule {
    pub fn new(seasons: Vec<CoefficientTuple>) -> Result<Self> {
        Self::with_bounds(seasons, VarianceBounds::default())
    }

    pub fn with_bounds(seasons: Vec<CoefficientTuple>, bounds: VarianceBounds) -> Result<Self> {
        let s = Self { seasons, bounds };
        let f = s.structural_findings();
        into_result(s, f)
    }

    /// Build from per-season `phi1` and `phi2` with zero drift and unit variance.
    pub fn from_ar(phi1: &[f64], phi2: &[f64]) -> Result<Self> {
        if phi1.len() != phi2.len() {
            return Err(Error::invalid(
                "phi1 and phi2 must have one entry per season",
            ));
        }
        Self::new(
            phi1.iter()
                .zip(phi2)
                .map(|(&a, &b)| CoefficientTuple::ar(a, b))
                .collect(),
        )
    }

    pub fn seasons_per_period(&self) -> usize {
        self.seasons.len()
    }

    /// Coefficients of season `s in 1..=l`.
    pub fn season(&self, s: usize) -> &CoefficientTuple {
        &self.seasons[s - 1]
    }
}

impl CoefficientSchedule for PeriodicSchedule {
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::Periodic
    }
    fn lookup(&self, t: i64) -> Result<CoefficientTuple> {
        if self.seasons.is_empty() {
            return Err(Error::invalid("periodic schedule has no seasons"));
        }
        Ok(self.seasons[season_of(t, self.seasons.len()) - 1])
    }
    fn bounds(&self) -> VarianceBounds {
        self.bounds
    }
    fn period(&self) -> Option<usize> {
        Some(self.seasons.len())
    }
    fn structural_findings(&self) -> Vec<String> {
        let mut f = bounds_findings(&self.bounds);
        if self.seasons.is_empty() {
            f.push("periodic schedule needs at least one season".into());
        }
        f.extend(tuple_findings("season", &self.seasons, &self.bounds));
        f
    }
}

/// CAR(2;l;d): `d + 1` cycles inside a period of `l` seasons.
///
/// Cycle `j` (1-based) covers seasons `l_{j-1} + 1 ..= l_j` with
/// `0 = l_0 < l_1 < ... < l_d < l_{d+1} = l`; `boundaries` holds the interior
/// points `l_1..l_d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclicalSchedule {
    pub seasons: usize,
    #[serde(default)]
    pub boundaries: Vec<usize>,
    pub cycles: Vec<CoefficientTuple>,
    #[serde(
        default,
        skip_serializing_if = "VarianceBounds::is_default",
        rename = "sigma2_bounds"
    )]
    pub bounds: VarianceBounds,
}

impl CyclicalSchedule {
    pub fn new(
        seasons: usize,
        boundaries: Vec<usize>,
        cycles: Vec<CoefficientTuple>,
    ) -> Result<Self> {
        let s = Self {
            seasons,
            boundaries,
            cycles,
            bounds: VarianceBounds::default(),
        };
        let f = s.structural_findings();
        into_result(s, f)
    }

    /// Number of interior boundaries `d`.
    pub fn breaks(&self) -> usize {
        self.boundaries.len()
    }

    /// `[0, l_1, ..., l_d, l]`.
    pub fn full_boundaries(&self) -> Vec<usize> {
        let mut b = Vec::with_capacity(self.boundaries.len() + 2);
        b.push(0);
        b.extend_from_slice(&self.boundaries);
        b.push(self.seasons);
        b
    }

    /// Cycle `j in 1..=d+1` containing season `s`.
    pub fn cycle_of_season(&self, s: usize) -> usize {
        1 + self.boundaries.iter().filter(|&&b| b < s).count()
    }

    /// Expand to the equivalent per-season table.
    pub fn to_periodic(&self) -> Result<PeriodicSchedule> {
        let seasons = (1..=self.seasons)
            .map(|s| self.cycles[self.cycle_of_season(s) - 1])
            .collect();
        PeriodicSchedule::with_bounds(seasons, self.bounds)
    }
}

impl CoefficientSchedule for CyclicalSchedule {
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::Cyclical
    }
    fn lookup(&self, t: i64) -> Result<CoefficientTuple> {
        if self.seasons == 0 {
            return Err(Error::invalid("cyclical schedule has zero seasons"));
        }
        let j = self.cycle_of_season(season_of(t, self.seasons));
        self.cycles
            .get(j - 1)
            .copied()
            .ok_or_else(|| Error::invalid(format!("no coefficients for cycle {j}")))
    }
    fn bounds(&self) -> VarianceBounds {
        self.bounds
    }
    fn period(&self) -> Option<usize> {
        Some(self.seasons)
    }
    fn structural_findings(&self) -> Vec<String> {
        let mut f = bounds_findings(&self.bounds);
        if self.seasons == 0 {
            f.push("cyclical schedule needs at least one season".into());
        }
        let full = self.full_boundaries();
        if full.windows(2).any(|w| w[0] >= w[1]) {
            f.push("cycle boundaries must be strictly increasing within (0, l)".into());
        }
        if self.cycles.len() != self.boundaries.len() + 1 {
            f.push(format!(
                "expected {} cycle tuples for {} boundaries, got {}",
                self.boundaries.len() + 1,
                self.boundaries.len(),
                self.cycles.len()
            ));
        }
        f.extend(tuple_findings("cycle", &self.cycles, &self.bounds));
        f
    }
}

/// ABAR(2;r): `r` abrupt breaks between `anchor - horizon` and `anchor`.
///
/// With offsets `0 = k_0 < k_1 < ... < k_r < k_{r+1} = horizon`, regime `j`
/// (1-based) governs `tau = anchor - k_{j-1}` down to `anchor - k_j + 1`.
/// The initial-condition time `anchor - horizon` is assigned to the oldest regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakSchedule {
    pub anchor: i64,
    pub horizon: usize,
    #[serde(default)]
    pub offsets: Vec<usize>,
    pub regimes: Vec<CoefficientTuple>,
    #[serde(
        default,
        skip_serializing_if = "VarianceBounds::is_default",
        rename = "sigma2_bounds"
    )]
    pub bounds: VarianceBounds,
}

impl BreakSchedule {
    pub fn new(
        anchor: i64,
        horizon: usize,
        offsets: Vec<usize>,
        regimes: Vec<CoefficientTuple>,
    ) -> Result<Self> {
        let s = Self {
            anchor,
            horizon,
            offsets,
            regimes,
            bounds: VarianceBounds::default(),
        };
        let f = s.structural_findings();
        into_result(s, f)
    }

    pub fn breaks(&self) -> usize {
        self.offsets.len()
    }

    /// `[0, k_1, ..., k_r, k]`.
    pub fn full_offsets(&self) -> Vec<usize> {
        let mut b = Vec::with_capacity(self.offsets.len() + 2);
        b.push(0);
        b.extend_from_slice(&self.offsets);
        b.push(self.horizon);
        b
    }

    /// Regime `j in 1..=r+1` governing time `tau`.
    pub fn regime_of(&self, tau: i64) -> Result<usize> {
        let lo = self.anchor - self.horizon as i64;
        if tau > self.anchor || tau < lo {
            return Err(Error::OutOfWindow {
                t: tau,
                lo,
                hi: self.anchor,
            });
        }
        let back = (self.anchor - tau) as usize;
        Ok(1 + self.offsets.iter().filter(|&&k| k <= back).count())
    }

    /// Same regimes and offsets, anchored at a different present time.
    pub fn reanchored(&self, anchor: i64) -> Self {
        Self {
            anchor,
            ..self.clone()
        }
    }
}

impl CoefficientSchedule for BreakSchedule {
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::AbruptBreaks
    }
    fn lookup(&self, t: i64) -> Result<CoefficientTuple> {
        let j = self.regime_of(t)?;
        self.regimes
            .get(j - 1)
            .copied()
            .ok_or_else(|| Error::invalid(format!("no coefficients for regime {j}")))
    }
    fn bounds(&self) -> VarianceBounds {
        self.bounds
    }
    fn window(&self) -> Option<(i64, i64)> {
        Some((self.anchor - self.horizon as i64, self.anchor))
    }
    fn structural_findings(&self) -> Vec<String> {
        let mut f = bounds_findings(&self.bounds);
        if self.full_offsets().windows(2).any(|w| w[0] >= w[1]) {
            f.push("break offsets must be strictly increasing within (0, horizon)".into());
        }
        if self.regimes.len() != self.offsets.len() + 1 {
            f.push(format!(
                "expected {} regime tuples for {} breaks, got {}",
                self.offsets.len() + 1,
                self.offsets.len(),
                self.regimes.len()
            ));
        }
        f.extend(tuple_findings("regime", &self.regimes, &self.bounds));
        f
    }
}

/// Arbitrary coefficients listed for consecutive times starting at `start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedSchedule {
    pub start: i64,
    pub rows: Vec<CoefficientTuple>,
    #[serde(
        default,
        skip_serializing_if = "VarianceBounds::is_default",
        rename = "sigma2_bounds"
    )]
    pub bounds: VarianceBounds,
}

impl TabulatedSchedule {
    pub fn new(start: i64, rows: Vec<CoefficientTuple>) -> Result<Self> {
        let s = Self {
            start,
            rows,
            bounds: VarianceBounds::default(),
        };
        let f = s.structural_findings();
        into_result(s, f)
    }

    /// Tabulate any schedule over `range`.
    pub fn sample<S: CoefficientSchedule + ?Sized>(
        schedule: &S,
        range: RangeInclusive<i64>,
    ) -> Result<Self> {
        let start = *range.start();
        let rows = range
            .map(|t| schedule.evaluate(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            start,
            rows,
            bounds: schedule.bounds(),
        })
    }

    pub fn end(&self) -> i64 {
        self.start + self.rows.len() as i64 - 1
    }
}

impl CoefficientSchedule for TabulatedSchedule {
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::Generic
    }
    fn lookup(&self, t: i64) -> Result<CoefficientTuple> {
        if t < self.start || t > self.end() {
            return Err(Error::OutOfWindow {
                t,
                lo: self.start,
                hi: self.end(),
            });
        }
        Ok(self.rows[(t - self.start) as usize])
    }
    fn bounds(&self) -> VarianceBounds {
        self.bounds
    }
    fn window(&self) -> Option<(i64, i64)> {
        Some((self.start, self.end()))
    }
    fn structural_findings(&self) -> Vec<String> {
        let mut f = bounds_findings(&self.bounds);
        if self.rows.is_empty() {
            f.push("tabulated schedule has no rows".into());
        }
        f.extend(tuple_findings("row", &self.rows, &self.bounds));
        f
    }
}

/// Coefficients given by a closure over time.
pub struct FnSchedule<F> {
    f: F,
    bounds: VarianceBounds,
}

impl<F> FnSchedule<F>
where
    F: Fn(i64) -> CoefficientTuple + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self {
            f,
            bounds: VarianceBounds::default(),
        }
    }

    pub fn with_bounds(f: F, bounds: VarianceBounds) -> Self {
        Self { f, bounds }
    }
}

impl<F> CoefficientSchedule for FnSchedule<F>
where
    F: Fn(i64) -> CoefficientTuple + Send + Sync,
{
    fn kind(&self) -> ScheduleKind {
        ScheduleKind::Generic
    }
    fn lookup(&self, t: i64) -> Result<CoefficientTuple> {
        Ok((self.f)(t))
    }
    fn bounds(&self) -> VarianceBounds {
        self.bounds
    }
}

impl<F> fmt::Debug for FnSchedule<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSchedule")
            .field("bounds", &self.bounds)
            .finish_non_exhaustive()
    }
}

/// Any of the serializable schedule families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    Constant(ConstantSchedule),
    Periodic(PeriodicSchedule),
    Cyclical(CyclicalSchedule),
    Breaks(BreakSchedule),
    Generic(TabulatedSchedule),
}

macro_rules! dispatch {
    ($self:ident, $s:ident => $e:expr) => {
        match $self {
            Schedule::Constant($s) => $e,
            Schedule::Periodic($s) => $e,
            Schedule::Cyclical($s) => $e,
            Schedule::Breaks($s) => $e,
            Schedule::Generic($s) => $e,
        }
    };
}

impl CoefficientSchedule for Schedule {
    fn kind(&self) -> ScheduleKind {
        dispatch!(self, s => s.kind())
    }
    fn lookup(&self, t: i64) -> Result<CoefficientTuple> {
        dispatch!(self, s => s.lookup(t))
    }
    fn bounds(&self) -> VarianceBounds {
        dispatch!(self, s => s.bounds())
    }
    fn window(&self) -> Option<(i64, i64)> {
        dispatch!(self, s => s.window())
    }
    fn period(&self) -> Option<usize> {
        dispatch!(self, s => s.period())
    }
    fn structural_findings(&self) -> Vec<String> {
        dispatch!(self, s => s.structural_findings())
    }
}

impl From<ConstantSchedule> for Schedule {
    fn from(s: ConstantSchedule) -> Self {
        Schedule::Constant(s)
    }
}
impl From<PeriodicSchedule> for Schedule {
    fn from(s: PeriodicSchedule) -> Self {
        Schedule::Periodic(s)
    }
}
impl From<CyclicalSchedule> for Schedule {
    fn from(s: CyclicalSchedule) -> Self {
        Schedule::Cyclical(s)
    }
}
impl From<BreakSchedule> for Schedule {
    fn from(s: BreakSchedule) -> Self {
        Schedule::Breaks(s)
    }
}
impl From<TabulatedSchedule> for Schedule {
    fn from(s: TabulatedSchedule) -> Self {
        Schedule::Generic(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Check a schedule over `window`: structural invariants, variance bounds at
/// every time in the window and, for periodic kinds, `schedule(t) == schedule(t + l)`.
pub fn validate<S: CoefficientSchedule + ?Sized>(
    schedule: &S,
    window: RangeInclusive<i64>,
) -> ValidationReport {
    let mut findings = schedule.structural_findings();
    let mut seen: BTreeSet<String> = findings.iter().cloned().collect();
    let mut push = |msg: String, findings: &mut Vec<String>| {
        if seen.insert(msg.clone()) {
            findings.push(msg);
        }
    };
    if window.is_empty() {
        push("validation window is empty".into(), &mut findings);
    }
    for t in window {
        match schedule.evaluate(t) {
            Ok(c) => {
                if let Some(l) = schedule.period() {
                    match schedule.lookup(t + l as i64) {
                        Ok(shifted) if shifted != c => push(
                            format!(
                                "periodicity violated: schedule({t}) != schedule({})",
                                t + l as i64
                            ),
                            &mut findings,
                        ),
                        Err(e) => push(e.to_string(), &mut findings),
                        _ => {}
                    }
                }
            }
            Err(Error::VarianceBounds { .. }) => {
                let season = schedule
                    .period()
                    .map(|l| format!(" (season {})", season_of(t, l)))
                    .unwrap_or_default();
                push(
                    format!("sigma2 must be > 0 and within bounds{season}"),
                    &mut findings,
                );
            }
            Err(e) => push(e.to_string(), &mut findings),
        }
    }
    ValidationReport { findings }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn par4() -> PeriodicSchedule {
        PeriodicSchedule::from_ar(&[0.5, 1.2, 0.9, 1.8], &[0.0; 4]).unwrap()
    }

    #[test]
    fn constant_evaluates_everywhere() {
        let s = ConstantSchedule::new(CoefficientTuple::new(0.0, 1.2, -0.32, 1.0)).unwrap();
        for t in [-1000, 0, 7, 123_456] {
            assert_eq!(
                s.evaluate(t).unwrap(),
                CoefficientTuple::new(0.0, 1.2, -0.32, 1.0)
            );
        }
    }

    #[test]
    fn season_convention() {
        assert_eq!(season_of(7, 4), 3);
        assert_eq!(season_of(4, 4), 4);
        assert_eq!(season_of(1, 4), 1);
        assert_eq!(season_of(0, 4), 4);
        assert_eq!(season_of(-3, 4), 1);
        assert_eq!(par4().phi1(7).unwrap(), 0.9);
    }

    #[test]
    fn break_regime_ranges() {
        let s = BreakSchedule::new(
            100,
            6,
            vec![3],
            vec![
                CoefficientTuple::ar(0.5, 0.0),
                CoefficientTuple::ar(-0.5, 0.0),
            ],
        )
        .unwrap();
        for back in 0..=2 {
            assert_eq!(s.phi1(100 - back).unwrap(), 0.5);
        }
        for back in 3..=6 {
            assert_eq!(s.phi1(100 - back).unwrap(), -0.5);
        }
        match s.evaluate(93) {
            Err(Error::OutOfWindow { lo, hi, .. }) => assert_eq!((lo, hi), (94, 100)),
            other => panic!("expected window error, got {other:?}"),
        }
        assert!(s.evaluate(101).is_err());
    }

    #[test]
    fn reanchor_shifts_window() {
        let s = BreakSchedule::new(
            10,
            4,
            vec![2],
            vec![
                CoefficientTuple::ar(0.1, 0.0),
                CoefficientTuple::ar(0.2, 0.0),
            ],
        )
        .unwrap();
        let r = s.reanchored(20);
        assert_eq!(r.window(), Some((16, 20)));
        assert_eq!(r.phi1(18).unwrap(), 0.2);
        assert_eq!(s.window(), Some((6, 10)));
    }

    #[test]
    fn validate_clean_par() {
        let report = validate(&par4(), 1..=40);
        assert!(report.is_valid(), "{:?}", report.findings);
    }

    #[test]
    fn validate_zero_variance_season() {
        let mut s = par4();
        s.seasons[2].sigma2 = 0.0;
        let report = validate(&s, 1..=40);
        assert!(report
            .findings
            .iter()
            .any(|f| f.contains("sigma2 must be > 0")));
        assert!(PeriodicSchedule::new(s.seasons.clone()).is_err());
    }

    #[test]
    fn validate_non_monotone_breaks() {
        let s = BreakSchedule {
            anchor: 0,
            horizon: 10,
            offsets: vec![4, 4],
            regimes: vec![CoefficientTuple::ar(0.1, 0.0); 3],
            bounds: VarianceBounds::default(),
        };
        let report = validate(&s, -10..=0);
        assert!(report
            .findings
            .iter()
            .any(|f| f.contains("break offsets must be strictly increasing")));
    }

    #[test]
    fn validate_cyclical_boundaries() {
        let s = CyclicalSchedule {
            seasons: 4,
            boundaries: vec![3, 2],
            cycles: vec![CoefficientTuple::ar(0.1, 0.0); 3],
            bounds: VarianceBounds::default(),
        };
        assert!(!validate(&s, 1..=8).is_valid());
    }

    #[test]
    fn cyclical_with_every_season_its_own_cycle_is_periodic() {
        let tuples: Vec<_> = (0..5)
            .map(|i| {
                CoefficientTuple::new(0.1 * i as f64, 0.3, -0.2 + 0.05 * i as f64, 1.0 + i as f64)
            })
            .collect();
        let car = CyclicalSchedule::new(5, vec![1, 2, 3, 4], tuples.clone()).unwrap();
        let par = PeriodicSchedule::new(tuples).unwrap();
        for t in -20..40 {
            assert_eq!(car.evaluate(t).unwrap(), par.evaluate(t).unwrap());
        }
    }

    #[test]
    fn break_schedule_without_breaks_is_constant() {
        let c = CoefficientTuple::new(0.3, 0.9, -0.1, 2.0);
        let b = BreakSchedule::new(50, 12, vec![], vec![c]).unwrap();
        let k = ConstantSchedule::new(c).unwrap();
        for t in 38..=50 {
            assert_eq!(b.evaluate(t).unwrap(), k.evaluate(t).unwrap());
        }
    }

    #[test]
    fn equal_tuples_nest_constant_ar2() {
        let c = CoefficientTuple::new(1.0, 1.2, -0.32, 1.0);
        let par = PeriodicSchedule::new(vec![c; 4]).unwrap();
        let car = CyclicalSchedule::new(4, vec![2], vec![c; 2]).unwrap();
        let brk = BreakSchedule::new(0, 9, vec![2, 5], vec![c; 3]).unwrap();
        for t in -9..=0 {
            assert_eq!(par.evaluate(t).unwrap(), c);
            assert_eq!(car.evaluate(t).unwrap(), c);
            assert_eq!(brk.evaluate(t).unwrap(), c);
        }
    }

    #[test]
    fn variance_bounds_checked_on_evaluation() {
        let s = TabulatedSchedule {
            start: 0,
            rows: vec![CoefficientTuple::new(0.0, 0.0, 0.0, 1e13)],
            bounds: VarianceBounds::default(),
        };
        assert!(matches!(s.evaluate(0), Err(Error::VarianceBounds { .. })));
        assert!(s.lookup(0).is_ok());
    }

    #[test]
    fn schedule_toml_round_trip() {
        let s: Schedule = par4().into();
        let text = toml::to_string(&s).unwrap();
        let back: Schedule = toml::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
