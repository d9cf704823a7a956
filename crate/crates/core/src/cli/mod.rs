//! The `tvar` command-line tool.
//!
//! Exit codes: 0 on success, 2 for configuration errors (the message names the
//! offending key), 1 for errors raised by a computation.

pub mod config;
pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blockdet::{compare_abar, compare_car, compare_par, ThreeWay};
use crate::error::{Error, Result};
use crate::moments::{autocovariance, forecast, Truncation};
use crate::schedules::{
    CoefficientSchedule, CoefficientTuple, PeriodicSchedule, Schedule, TabulatedSchedule,
};
use crate::simulate::{empirical_moments, simulate_paths, SimulationConfig};
use crate::solution::{
    forward_recursion, general_solution, particular_solution_determinant_oracle,
};
use crate::vs_rep::{
    build_vs, par24_exact_condition, par24_restriction, stationarity_check, Verdict,
};
use crate::xi::{green_functions, xi, xi_determinant_oracle, ORACLE_CAP};

use self::config::RunConfig;
use self::format::{Csv, Field};

#[derive(Debug, Parser)]
#[command(
    name = "tvar",
    version,
    about = "Green functions, forecasts and moments of time-varying AR(2) processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (standard output if omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Truncation tolerance for infinite sums.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Maximum number of terms in infinite sums.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Depth, forecast horizon or maximum lag, depending on the command.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Anchor time (overrides `run.t`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub anchor: Option<i64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Green functions xi_{t,0..=k}.
    Green,
    /// Forecasts for horizons 1..=k from origin t.
    Forecast,
    /// Autocovariances gamma_{t,0..=k}.
    Acf,
    /// Monte Carlo paths or their cross-sectional moments.
    Simulate {
        #[arg(long, value_enum, default_value_t = SimFormat::Summary)]
        format: SimFormat,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Spectral radius of the vector-of-seasons form.
    Stationarity {
        /// Also print the entries of Phi0 and Phi1.
        #[arg(long)]
        matrices: bool,
    },
    /// Block decomposition vs block-matrix determinant vs recurrence.
    DecomposeVerify,
    /// Recurrence vs determinant oracles on a configured or random instance.
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimFormat {
    /// `t,stat,value,se`.
    Summary,
    /// `path,t,y`.
    Paths,
}

/// Relative tolerance reported by `verify`.
pub const VERIFY_TOL: f64 = 1e-10;
/// Relative tolerance reported by `decompose-verify`.
pub const DECOMPOSE_TOL: f64 = 1e-11;

/// Parse `std::env::args_os` and run.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        _ => 1,
    }
}

/// Run a parsed command and write its output.
pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = match &cli.common.config {
        Some(p) => Some(RunConfig::load(p)?),
        None => None,
    };
    let ctx = Context::new(&cli.common, cfg)?;
    let text = match &cli.command {
        Command::Green => green(&ctx)?,
        Command::Forecast => forecast_cmd(&ctx)?,
        Command::Acf => acf(&ctx)?,
        Command::Simulate { format, threads } => match threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(*n)
                .build()
                .map_err(|e| Error::config("--threads", e.to_string()))?
                .install(|| simulate_cmd(&ctx, *format))?,
            None => simulate_cmd(&ctx, *format)?,
        },
        Command::Stationarity { matrices } => stationarity(&ctx, *matrices)?,
        Command::DecomposeVerify => decompose_verify(&ctx)?,
        Command::Verify => verify(&ctx)?,
    };
    write_output(cli.common.out.as_deref(), &text)
}

fn write_output(path: Option<&std::path::Path>, text: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::config("--out", e.to_string());
    match path {
        Some(p) => std::fs::write(p, text).map_err(io),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(io)?;
            out.flush().map_err(io)
        }
    }
}

/// Flags merged over the config's `[run]` table.
struct Context {
    schedule: Option<Schedule>,
    t: Option<i64>,
    k: Option<usize>,
    n: Option<usize>,
    y_init: [f64; 2],
    trunc: Truncation,
    seed: u64,
    paths: Option<usize>,
    burn_in: Option<usize>,
    length: Option<usize>,
    innovation: crate::simulate::Innovation,
}

impl Context {
    fn new(flags: &Common, cfg: Option<RunConfig>) -> Result<Self> {
        let (schedule, run) = match cfg {
            Some(c) => (Some(c.schedule), c.run),
            None => (None, Default::default()),
        };
        let tol = flags.tol.or(run.tol).unwrap_or(Truncation::default().tol);
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::config("--tol", format!("must be > 0, got {tol}")));
        }
        let paths = flags.paths.or(run.paths);
        if paths == Some(0) {
            return Err(Error::config("--paths", "must be >= 1"));
        }
        Ok(Self {
            schedule,
            t: flags.anchor.or(run.t),
            k: flags.horizon.or(run.k),
            n: run.n,
            y_init: run.y_init.unwrap_or([0.0, 0.0]),
            trunc: Truncation {
                tol,
                n_max: flags
                    .nmax
                    .or(run.nmax)
                    .unwrap_or(Truncation::default().n_max),
            },
            seed: flags.seed.or(run.seed).unwrap_or(0),
            paths,
            burn_in: run.burn_in,
            length: run.length,
            innovation: run.innovation.unwrap_or_default(),
        })
    }

    fn schedule(&self) -> Result<&Schedule> {
        self.schedule.as_ref().ok_or_else(|| {
            Error::config(
                "--config",
                "this command needs a schedule; pass --config <path>",
            )
        })
    }

    /// `run.t`, or a natural anchor for the schedule kind.
    fn anchor(&self) -> Result<i64> {
        if let Some(t) = self.t {
            return Ok(t);
        }
        Ok(match self.schedule()? {
            Schedule::Breaks(b) => b.anchor,
            Schedule::Generic(g) => g.end(),
            Schedule::Cyclical(c) => c.seasons as i64,
            _ => 0,
        })
    }

    /// `run.k`, or `default` capped to what a finite schedule window supports.
    fn depth(&self, default: usize) -> usize {
        if let Some(k) = self.k {
            return k;
        }
        match &self.schedule {
            Some(Schedule::Breaks(b)) => b.horizon,
            Some(Schedule::Generic(g)) => default.min(g.rows.len().saturating_sub(1)),
            _ => default,
        }
    }
}

fn green(ctx: &Context) -> Result<String> {
    let s = ctx.schedule()?;
    let t = ctx.anchor()?;
    let table = green_functions(s, t, ctx.depth(10))?;
    let mut csv = Csv::new(&["t", "i", "xi"]);
    for (i, v) in table.values().iter().enumerate() {
        csv.row([Field::from(t), i.into(), (*v).into()]);
    }
    Ok(csv.into_string())
}

fn forecast_cmd(ctx: &Context) -> Result<String> {
    let s = ctx.schedule()?;
    let origin = ctx.anchor()?;
    let k = ctx.depth(1);
    if k == 0 {
        return Err(Error::config("--horizon", "forecast horizon must be >= 1"));
    }
    let y_init = (ctx.y_init[0], ctx.y_init[1]);
    let mut csv = Csv::new(&["t", "k", "point", "mse"]);
    for h in 1..=k {
        let target = origin + h as i64;
        let f = forecast(s, target, h, y_init)?;
        csv.row([Field::from(target), h.into(), f.point.into(), f.mse.into()]);
    }
    Ok(csv.into_string())
}

fn acf(ctx: &Context) -> Result<String> {
    let s = ctx.schedule()?;
    let t = ctx.anchor()?;
    let mut csv = Csv::new(&["t", "k", "gamma", "converged"]);
    for k in 0..=ctx.depth(6) {
        let g = autocovariance(s, t, k, ctx.trunc)?;
        csv.row([Field::from(t), k.into(), g.value.into(), g.converged.into()]);
    }
    Ok(csv.into_string())
}

fn simulate_cmd(ctx: &Context, format: SimFormat) -> Result<String> {
    let s = ctx.schedule()?;
    let defaults = SimulationConfig::default();
    let cfg = SimulationConfig {
        start: ctx.anchor()?,
        burn_in: ctx.burn_in.unwrap_or(defaults.burn_in),
        length: ctx.length.unwrap_or(1),
        paths: ctx.paths.unwrap_or(defaults.paths),
        seed: ctx.seed,
        innovation: ctx.innovation,
    };
    let ensemble = simulate_paths(s, &cfg)?;
    match format {
        SimFormat::Paths => {
            let mut csv = Csv::new(&["path", "t", "y"]);
            for (p, path) in ensemble.paths.iter().enumerate() {
                for (i, y) in path.iter().enumerate() {
                    csv.row([Field::from(p), (cfg.start + i as i64).into(), (*y).into()]);
                }
            }
            Ok(csv.into_string())
        }
        SimFormat::Summary => {
            let max_lag = ctx.depth(4);
            let mut csv = Csv::new(&["t", "stat", "value", "se"]);
            for t in cfg.start..=cfg.end() {
                let m = empirical_moments(&ensemble, t, max_lag)?;
                csv.row([
                    Field::from(t),
                    "mean".into(),
                    m.mean.value.into(),
                    m.mean.se.into(),
                ]);
                csv.row([
                    Field::from(t),
                    "variance".into(),
                    m.variance.value.into(),
                    m.variance.se.into(),
                ]);
                for (lag, a) in m.autocovariances.iter().enumerate().skip(1) {
                    csv.row([
                        Field::from(t),
                        format!("acov_{lag}").into(),
                        a.value.into(),
                        a.se.into(),
                    ]);
                }
            }
            Ok(csv.into_string())
        }
    }
}

fn periodic_view(s: &Schedule) -> Result<PeriodicSchedule> {
    match s {
        Schedule::Periodic(p) => Ok(p.clone()),
        Schedule::Cyclical(c) => c.to_periodic(),
        Schedule::Constant(c) => PeriodicSchedule::with_bounds(vec![c.coefficients; 2], c.bounds),
        _ => Err(Error::domain(format!(
            "stationarity needs a periodic, cyclical or constant schedule, got {}",
            s.kind()
        ))),
    }
}

fn stationarity(ctx: &Context, matrices: bool) -> Result<String> {
    let p = periodic_view(ctx.schedule()?)?;
    let vs = build_vs(&p)?;
    let v = stationarity_check(&vs);
    let verdict = match v.verdict {
        Verdict::Stationary => "stationary",
        Verdict::NonStationary => "nonstationary",
        Verdict::Indeterminate => "indeterminate",
    };
    let mut csv = Csv::new(&["quantity", "value"]);
    csv.row([Field::from("seasons"), vs.seasons.into()]);
    csv.row([Field::from("spectral_radius"), v.spectral_radius.into()]);
    csv.row([Field::from("margin"), v.margin.into()]);
    csv.row([Field::from("verdict"), verdict.into()]);
    if vs.seasons == 4 {
        let r = par24_restriction(&p)?;
        csv.row([Field::from("restriction_value"), r.value.into()]);
        csv.row([Field::from("restriction_satisfied"), r.satisfied.into()]);
        csv.row([
            Field::from("exact_root_condition"),
            par24_exact_condition(&r).into(),
        ]);
    }
    if matrices {
        for (name, m) in [("phi0", &vs.phi0), ("phi1", &vs.phi1)] {
            for i in 0..vs.seasons {
                for j in 0..vs.seasons {
                    csv.row([
                        Field(format!("{name}_{}_{}", i + 1, j + 1)),
                        m[(i, j)].into(),
                    ]);
                }
            }
        }
    }
    Ok(csv.into_string())
}

fn decompose_verify(ctx: &Context) -> Result<String> {
    let s = ctx.schedule()?;
    let r: ThreeWay = match s {
        Schedule::Periodic(p) => compare_par(p, ctx.anchor()?, ctx.n.unwrap_or(2))?,
        Schedule::Cyclical(c) => compare_car(c, ctx.anchor()?)?,
        Schedule::Breaks(b) => compare_abar(b)?,
        _ => {
            return Err(Error::domain(format!(
                "decompose-verify needs a periodic, cyclical or breaks schedule, got {}",
                s.kind()
            )))
        }
    };
    let scale = r.recurrence.abs().max(1.0);
    let mut csv = Csv::new(&["method", "value", "rel_deviation"]);
    csv.row([Field::from("recurrence"), r.recurrence.into(), 0.0.into()]);
    for (name, v) in [
        ("decomposed", r.decomposed),
        ("block_determinant", r.block_determinant),
    ] {
        csv.row([
            Field::from(name),
            v.into(),
            ((v - r.recurrence).abs() / scale).into(),
        ]);
    }
    csv.row([Field::from("terms"), r.terms.into(), Field::from("")]);
    csv.row([
        Field::from("passed"),
        (r.max_deviation() <= DECOMPOSE_TOL).into(),
        r.max_deviation().into(),
    ]);
    Ok(csv.into_string())
}

/// Random generic schedule covering `[start, start + len)`.
fn random_schedule(rng: &mut ChaCha8Rng, start: i64, len: usize) -> Result<TabulatedSchedule> {
    let rows = (0..len)
        .map(|_| {
            CoefficientTuple::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..2.0),
            )
        })
        .collect();
    TabulatedSchedule::new(start, rows)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn verify(ctx: &Context) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let k = ctx.depth(12);
    if k == 0 || k > ORACLE_CAP {
        return Err(Error::config(
            "--horizon",
            format!("verify needs 1 <= k <= {ORACLE_CAP}, got {k}"),
        ));
    }
    let (schedule, t): (Schedule, i64) = match &ctx.schedule {
        Some(s) => (s.clone(), ctx.anchor()?),
        None => {
            let t = ctx.t.unwrap_or(0);
            (
                random_schedule(&mut rng, t - k as i64 - 1, k + 2)?.into(),
                t,
            )
        }
    };
    let y_init = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let eps: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();

    let mut xi_dev: f64 = 0.0;
    for j in 1..=k {
        let r = xi(&schedule, t, j as isize)?;
        xi_dev = xi_dev.max(rel(r, xi_determinant_oracle(&schedule, t, j)?));
    }
    let sol = general_solution(&schedule, t, k)?;
    let closed = sol.evaluate(y_init, &eps)?;
    let recursion = forward_recursion(&schedule, t, y_init, &eps)?;
    let oracle =
        sol.homogeneous(y_init) + particular_solution_determinant_oracle(&schedule, t, &eps)?;

    let mut csv = Csv::new(&["check", "max_rel_deviation", "tolerance", "passed"]);
    for (name, dev) in [
        ("xi_recurrence_vs_determinant", xi_dev),
        ("solution_vs_recursion", rel(closed, recursion)),
        ("solution_vs_determinant", rel(closed, oracle)),
        ("recursion_vs_determinant", rel(recursion, oracle)),
    ] {
        csv.row([
            Field::from(name),
            dev.into(),
            VERIFY_TOL.into(),
            (dev <= VERIFY_TOL).into(),
        ]);
    }
    Ok(csv.into_string())
}
