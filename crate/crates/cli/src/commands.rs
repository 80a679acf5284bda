//! Subcommands. Each writes human output to `out` and returns the process exit code.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use valiant_core::harness::{self, InstanceSampler, Suite};
use valiant_core::{
    arm_solve, cyclic_solve, fejer_check, OperatorKind, Point, RunTrace, SnapshotPolicy,
    SolverConfig, TauSchedule,
};

use crate::output::{residual_svg, trace_csv, Summary};
use crate::problem::{LoadedProblem, ProblemFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_UNCONVERGED: u8 = 2;

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "VALIANT_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "valiant",
    version,
    about = "Valiant projection solvers for convex feasibility"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file and write its trace and summary.
    Solve(SolveArgs),
    /// Run the seeded operator property suites.
    Verify(VerifyArgs),
    /// Run every applicable method from the same start and compare.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Vpm,
    Bik,
    Geometric,
    Relaxed,
    Arm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Vpm => "vpm",
            Method::Bik => "bik",
            Method::Geometric => "geometric",
            Method::Relaxed => "relaxed",
            Method::Arm => "arm",
        }
    }

    fn operator_kind(self) -> Option<OperatorKind> {
        match self {
            Method::Vpm => Some(OperatorKind::Valiant),
            Method::Bik => Some(OperatorKind::BikIntrepid),
            Method::Geometric => Some(OperatorKind::GeometricIntrepid),
            Method::Relaxed => Some(OperatorKind::Relaxed),
            Method::Arm => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vpm" | "valiant" => Ok(Method::Vpm),
            "bik" => Ok(Method::Bik),
            "geometric" => Ok(Method::Geometric),
            "relaxed" => Ok(Method::Relaxed),
            "arm" => Ok(Method::Arm),
            _ => Err(format!(
                "unknown method `{s}` (expected vpm, bik, geometric, relaxed or arm)"
            )),
        }
    }
}

/// Starting point: `zeros`, `random:SEED` (uniform in `[-10, 10]^n`) or a
/// comma-separated literal such as `1,2.5`.
#[derive(Debug, Clone, PartialEq)]
pub enum StartPoint {
    Zeros,
    Random(u64),
    Literal(Vec<f64>),
}

impl FromStr for StartPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "zeros" {
            return Ok(StartPoint::Zeros);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .trim()
                .parse()
                .map(StartPoint::Random)
                .map_err(|e| format!("bad seed `{seed}`: {e}"));
        }
        s.split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad coordinate `{c}`: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(StartPoint::Literal)
    }
}

impl StartPoint {
    pub fn resolve(&self, dim: usize) -> anyhow::Result<Point> {
        match self {
            StartPoint::Zeros => Ok(Point::zeros(dim)),
            StartPoint::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let v = (0..dim).map(|_| rng.random_range(-10.0..=10.0)).collect();
                Ok(Point::new(v)?)
            }
            StartPoint::Literal(v) => {
                if v.len() != dim {
                    bail!("--x0 has {} coordinates, problem has dim = {dim}", v.len());
                }
                Ok(Point::new(v.clone())?)
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Problem file (TOML).
    pub problem: PathBuf,
    /// Relaxation τ in (0, 2); the relaxed method uses it as λ.
    #[arg(long, conflicts_with = "step_factor")]
    pub tau: Option<f64>,
    /// Step factor in (0, 1), equal to τ/2.
    #[arg(long)]
    pub step_factor: Option<f64>,
    /// Stop when the residual is at most this.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,
    /// Declare a stall when a whole sweep moves no more than this.
    #[arg(long, default_value_t = 0.0)]
    pub step_tol: f64,
    #[arg(long, default_value = "zeros")]
    pub x0: StartPoint,
    /// Output directory [default: $VALIANT_OUT_DIR or `out`].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot of the residual.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = "vpm")]
    pub method: Method,
    /// Keep every N-th trace row.
    #[arg(long, default_value_t = 1)]
    pub trace_every: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// One of ne, sqne, fix, relaxed, reflection, projection, continuity, all.
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report table as CSV to this path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Solve(a) => solve(&a, out),
        Command::Verify(a) => verify(&a, out),
        Command::Compare(a) => compare(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into())
}

fn out_dir(run: &RunArgs) -> PathBuf {
    run.out.clone().unwrap_or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"))
    })
}

fn tau_of(run: &RunArgs) -> anyhow::Result<f64> {
    let tau = match (run.tau, run.step_factor) {
        (Some(t), _) => t,
        (None, Some(s)) => 2.0 * s,
        (None, None) => 1.0,
    };
    if !(tau > 0.0 && tau < 2.0) {
        bail!("tau must lie in (0, 2), got {tau}");
    }
    Ok(tau)
}

fn load(path: &Path) -> anyhow::Result<LoadedProblem> {
    ProblemFile::load(path).with_context(|| format!("invalid problem file {}", path.display()))
}

struct Outcome {
    trace: RunTrace,
    fejer: Option<bool>,
    elapsed: std::time::Duration,
}

fn execute(
    loaded: &LoadedProblem,
    method: Method,
    run: &RunArgs,
    x0: &Point,
) -> anyhow::Result<Outcome> {
    let cfg = SolverConfig {
        tau: TauSchedule::Constant(tau_of(run)?),
        max_sweeps: run.max_sweeps,
        residual_tol: run.tol,
        step_tol: run.step_tol,
        operator_kind: method.operator_kind().unwrap_or(OperatorKind::Valiant),
        record_trace: true,
        snapshots: if loaded.feasible_point.is_some() {
            SnapshotPolicy::EverySweep
        } else {
            SnapshotPolicy::None
        },
        fejer_reference: loaded.feasible_point.clone(),
        ..SolverConfig::default()
    };
    let start = Instant::now();
    let (_, trace) = match method {
        Method::Arm => {
            let slabs = loaded
                .slabs
                .as_deref()
                .context("--method arm needs a problem made only of hyperslabs without `beta`")?;
            arm_solve(slabs, &cfg, x0)?
        }
        _ => cyclic_solve(&loaded.problem, &cfg, x0)?,
    };
    let elapsed = start.elapsed();
    let fejer = match &loaded.feasible_point {
        Some(z) => Some(fejer_check(&trace, z)?),
        None => None,
    };
    Ok(Outcome {
        trace,
        fejer,
        elapsed,
    })
}

fn solve(args: &SolveArgs, out: &mut dyn Write) -> anyhow::Result<u8> {
    let loaded = load(&args.run.problem)?;
    let x0 = args.run.x0.resolve(loaded.problem.dim())?;
    let outcome = execute(&loaded, args.method, &args.run, &x0)?;

    let dir = out_dir(&args.run);
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let base = format!("{}.{}", stem(&args.run.problem), args.method);
    let trace_path = dir.join(format!("{base}.trace.csv"));
    let summary_path = dir.join(format!("{base}.summary.txt"));
    fs::write(&trace_path, trace_csv(&outcome.trace, args.trace_every))?;
    let summary = Summary {
        method: args.method.name(),
        trace: &outcome.trace,
        wall_time: outcome.elapsed,
        fejer: outcome.fejer,
    }
    .render();
    fs::write(&summary_path, &summary)?;
    if args.run.plot {
        let svg = residual_svg(&[(args.method.name(), &outcome.trace)]);
        fs::write(dir.join(format!("{base}.residual.svg")), svg)?;
    }

    out.write_all(summary.as_bytes())?;
    writeln!(out, "trace: {}", trace_path.display())?;
    Ok(if outcome.trace.status.is_converged() {
        EXIT_OK
    } else {
        EXIT_UNCONVERGED
    })
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> anyhow::Result<u8> {
    if args.trials == 0 {
        bail!("--trials must be positive");
    }
    let sampler = InstanceSampler::default();
    let reports = args.suite.run(&sampler, args.trials, args.seed);
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    if let Some(path) = &args.csv {
        let mut csv = String::from(harness::CSV_HEADER);
        csv.push('\n');
        for r in &reports {
            csv.push_str(&r.csv_row());
            csv.push('\n');
        }
        fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let ok = harness::all_passed(&reports);
    writeln!(
        out,
        "{}",
        if ok {
            "all asserted properties hold"
        } else {
            "FAILURES"
        }
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_UNCONVERGED })
}

fn compare(args: &CompareArgs, out: &mut dyn Write) -> anyhow::Result<u8> {
    let loaded = load(&args.run.problem)?;
    let x0 = args.run.x0.resolve(loaded.problem.dim())?;
    let mut methods = vec![Method::Vpm, Method::Bik, Method::Relaxed];
    if loaded.slabs.is_some() {
        methods.push(Method::Arm);
    }

    let mut outcomes = Vec::with_capacity(methods.len());
    for &m in &methods {
        outcomes.push((m, execute(&loaded, m, &args.run, &x0)?));
    }

    writeln!(
        out,
        "{:<10} {:>12} {:>8} {:>12} {:>14} {:>7}",
        "method", "status", "sweeps", "iterations", "residual", "fejer"
    )?;
    let mut csv = String::from("method,k,residual\n");
    let mut all_converged = true;
    for (m, o) in &outcomes {
        let fejer = match o.fejer {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "n/a",
        };
        writeln!(
            out,
            "{:<10} {:>12} {:>8} {:>12} {:>14.6e} {:>7}",
            m.name(),
            o.trace.status.name(),
            o.trace.sweeps,
            o.trace.iterations,
            o.trace.final_residual,
            fejer
        )?;
        all_converged &= o.trace.status.is_converged();
        for r in &o.trace.records {
            csv.push_str(&format!("{},{},{}\n", m.name(), r.k, r.residual));
        }
    }

    let dir = out_dir(&args.run);
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let stem = stem(&args.run.problem);
    let csv_path = dir.join(format!("{stem}.compare.csv"));
    fs::write(&csv_path, csv)?;
    if args.run.plot {
        let series: Vec<(&str, &RunTrace)> =
            outcomes.iter().map(|(m, o)| (m.name(), &o.trace)).collect();
        fs::write(
            dir.join(format!("{stem}.compare.svg")),
            residual_svg(&series),
        )?;
    }
    writeln!(out, "residuals: {}", csv_path.display())?;
    Ok(if all_converged {
        EXIT_OK
    } else {
        EXIT_UNCONVERGED
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_points_parse() {
        assert_eq!("zeros".parse::<StartPoint>().unwrap(), StartPoint::Zeros);
        assert_eq!(
            "random:7".parse::<StartPoint>().unwrap(),
            StartPoint::Random(7)
        );
        assert_eq!(
            "1, -2.5".parse::<StartPoint>().unwrap(),
            StartPoint::Literal(vec![1.0, -2.5])
        );
        assert!("random:x".parse::<StartPoint>().is_err());
        assert!("1,,2".parse::<StartPoint>().is_err());
    }

    #[test]
    fn random_start_is_seeded_and_bounded() {
        let a = StartPoint::Random(3).resolve(8).unwrap();
        let b = StartPoint::Random(3).resolve(8).unwrap();
        assert_eq!(a, b);
        assert!(a.coords().iter().all(|v| v.abs() <= 10.0));
        assert!(StartPoint::Literal(vec![1.0]).resolve(2).is_err());
    }

    #[test]
    fn methods_round_trip() {
        for m in [
            Method::Vpm,
            Method::Bik,
            Method::Geometric,
            Method::Relaxed,
            Method::Arm,
        ] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("newton".parse::<Method>().is_err());
    }

    #[test]
    fn step_factor_doubles() {
        let cli =
            Cli::try_parse_from(["valiant", "solve", "p.toml", "--step-factor", "0.25"]).unwrap();
        let Command::Solve(a) = cli.command else {
            panic!()
        };
        assert_eq!(tau_of(&a.run).unwrap(), 0.5);
        assert!(Cli::try_parse_from([
            "valiant",
            "solve",
            "p.toml",
            "--tau",
            "1",
            "--step-factor",
            "0.5"
        ])
        .is_err());
    }
}
