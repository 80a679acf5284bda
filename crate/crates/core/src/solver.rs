//! Cyclic projection-type solvers for `find x ∈ ⋂ C_i`, `C_i = (Z_i)_[β_i]`.
//!
//! [`cyclic_solve`] runs `x^{k+1} = T_{i_k}(x^k)` with `i_k = k mod m` for the
//! operator family chosen in [`SolverConfig::operator_kind`]; [`vpm_solve`] is
//! the same driver pinned to the valiant projector. [`arm_solve`] evaluates the
//! classical ARM hyperslab step directly from slab data and produces the same
//! iterates as [`vpm_solve`] on the induced median-hyperplane problem.
//!
//! Relaxation values are stored with `τ ∈ (0, 2)` and enter the step as `τ/2`.
//! A schedule written with a step factor in `(0, 1)` converts by doubling.
//!
//! Stopping happens at sweep boundaries only: when the residual
//! `max_i max(0, d_{Z_i}(x) − β_i)` is at most `residual_tol` (inclusive), or when
//! every step of the sweep had norm at most `step_tol`, or after `max_sweeps`.
//! Nonemptiness of the intersection is assumed, never checked; an infeasible
//! problem simply ends unconverged.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Point};
use crate::operators::{OperatorKind, StepOperator};
use crate::sets::{check_beta, ConvexSet, Hyperslab};

/// One set of the problem: `C = Z_[β]`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub set: Arc<dyn ConvexSet>,
    pub beta: f64,
}

impl Constraint {
    pub fn new(set: Arc<dyn ConvexSet>, beta: f64) -> Result<Self> {
        Ok(Constraint {
            set,
            beta: check_beta(beta)?,
        })
    }

    /// `max(0, d_Z(x) − β)`, the distance from `x` to the enlargement.
    pub fn violation(&self, x: &Point) -> f64 {
        (self.set.distance(x) - self.beta).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    constraints: Vec<Constraint>,
    dim: usize,
}

impl FeasibilityProblem {
    pub fn new(constraints: Vec<Constraint>) -> Result<Self> {
        let dim = constraints.first().ok_or(Error::EmptyProblem)?.set.dim();
        for c in &constraints {
            if c.set.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.set.dim(),
                });
            }
            check_beta(c.beta)?;
        }
        Ok(FeasibilityProblem { constraints, dim })
    }

    /// Each slab read as the half-width enlargement of its median hyperplane.
    pub fn from_slabs(slabs: &[Hyperslab]) -> Result<Self> {
        let constraints = slabs
            .iter()
            .enumerate()
            .map(|(index, slab)| {
                if slab.upper() <= slab.lower() {
                    return Err(Error::ZeroWidthSlab { index });
                }
                let (plane, beta) = slab.median();
                Constraint::new(Arc::new(plane), beta)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(constraints)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// `max_i max(0, d_{Z_i}(x) − β_i)`.
    pub fn residual(&self, x: &Point) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max)
    }
}

/// Round-robin index schedule over `m` sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicControl {
    m: usize,
}

impl CyclicControl {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyProblem);
        }
        Ok(CyclicControl { m })
    }

    pub fn period(&self) -> usize {
        self.m
    }

    /// Zero-based set index used at iteration `k`.
    pub fn index(&self, k: usize) -> usize {
        k % self.m
    }

    /// One-based label `i_k = (k mod m) + 1`.
    pub fn label(&self, k: usize) -> usize {
        self.index(k) + 1
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        (0..).map(|k| self.label(k))
    }
}

/// Relaxation per iteration, in the `τ ∈ (0, 2)` convention.
#[derive(Clone)]
pub enum TauSchedule {
    Constant(f64),
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl TauSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            TauSchedule::Constant(t) => *t,
            TauSchedule::Custom(f) => f(k),
        }
    }
}

impl fmt::Debug for TauSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauSchedule::Constant(t) => write!(f, "Constant({t})"),
            TauSchedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Which iterates are kept in [`RunTrace::snapshots`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SnapshotPolicy {
    None,
    EverySweep,
    EveryIteration,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub tau: TauSchedule,
    /// `τ_k` must lie in `[tau_margin, 2 − tau_margin]`.
    pub tau_margin: f64,
    pub max_sweeps: usize,
    pub residual_tol: f64,
    pub step_tol: f64,
    pub operator_kind: OperatorKind,
    pub record_trace: bool,
    pub snapshots: SnapshotPolicy,
    pub fejer_reference: Option<Point>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau: TauSchedule::Constant(1.0),
            tau_margin: 1e-3,
            max_sweeps: 10_000,
            residual_tol: 1e-8,
            step_tol: 0.0,
            operator_kind: OperatorKind::Valiant,
            record_trace: true,
            snapshots: SnapshotPolicy::EverySweep,
            fejer_reference: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let invalid = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.residual_tol > 0.0) {
            return invalid("residual_tol", self.residual_tol, "must be positive");
        }
        if !(self.step_tol >= 0.0) {
            return invalid("step_tol", self.step_tol, "must be nonnegative");
        }
        if !(self.tau_margin > 0.0 && self.tau_margin < 1.0) {
            return invalid("tau_margin", self.tau_margin, "must lie in (0, 1)");
        }
        if self.max_sweeps == 0 {
            return invalid("max_sweeps", 0.0, "must be positive");
        }
        if let Some(z) = &self.fejer_reference {
            z.check_dim(dim)?;
        }
        Ok(())
    }

    fn tau_at(&self, k: usize) -> Result<f64> {
        let tau = self.tau.at(k);
        if tau >= self.tau_margin && tau <= 2.0 - self.tau_margin {
            Ok(tau)
        } else {
            Err(Error::InvalidTau {
                k,
                tau,
                margin: self.tau_margin,
            })
        }
    }
}

/// The step `x^k → x^{k+1}`. `residual` and `fejer_dist` are measured at `x^{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub k: usize,
    /// One-based index of the set used.
    pub index: usize,
    pub step_norm: f64,
    pub residual: f64,
    pub fejer_dist: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    /// Steps fell below `step_tol` over a whole sweep without meeting `residual_tol`.
    Stalled,
    MaxSweeps,
}

impl RunStatus {
    pub fn is_converged(self) -> bool {
        self == RunStatus::Converged
    }

    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::Stalled => "stalled",
            RunStatus::MaxSweeps => "unconverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    /// One record per iteration when tracing is on, ordered by `k`.
    pub records: Vec<IterRecord>,
    /// `(k, x^k)` pairs, ordered by `k`.
    pub snapshots: Vec<(usize, Point)>,
    pub status: RunStatus,
    pub sweeps: usize,
    pub iterations: usize,
    pub final_residual: f64,
}

impl RunTrace {
    pub fn step_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.step_norm)
    }
}

fn drive(
    m: usize,
    dim: usize,
    cfg: &SolverConfig,
    x0: &Point,
    residual: impl Fn(&Point) -> f64,
    mut step: impl FnMut(usize, usize, f64, &Point) -> Result<Point>,
) -> Result<(Point, RunTrace)> {
    x0.check_dim(dim)?;
    cfg.validate(dim)?;
    let control = CyclicControl::new(m)?;

    let mut trace = RunTrace {
        records: Vec::new(),
        snapshots: Vec::new(),
        status: RunStatus::MaxSweeps,
        sweeps: 0,
        iterations: 0,
        final_residual: f64::NAN,
    };
    if cfg.snapshots != SnapshotPolicy::None {
        trace.snapshots.push((0, x0.clone()));
    }

    let mut x = x0.clone();
    let mut k = 0usize;
    for sweep in 1..=cfg.max_sweeps {
        let mut sweep_max_step = 0.0f64;
        for _ in 0..m {
            let i = control.index(k);
            let tau = cfg.tau_at(k)?;
            let next = step(k, i, tau, &x)?;
            if !next.is_finite() {
                return Err(Error::NonFiniteIterate { k });
            }
            let step_norm = next.distance(&x);
            sweep_max_step = sweep_max_step.max(step_norm);
            x = next;
            k += 1;
            if cfg.record_trace {
                trace.records.push(IterRecord {
                    k: k - 1,
                    index: i + 1,
                    step_norm,
                    residual: residual(&x),
                    fejer_dist: cfg.fejer_reference.as_ref().map(|z| x.distance(z)),
                });
            }
            if cfg.snapshots == SnapshotPolicy::EveryIteration {
                trace.snapshots.push((k, x.clone()));
            }
        }
        if cfg.snapshots == SnapshotPolicy::EverySweep {
            trace.snapshots.push((k, x.clone()));
        }
        trace.sweeps = sweep;
        trace.iterations = k;

        let r = match trace.records.last() {
            Some(last) if cfg.record_trace => last.residual,
            _ => residual(&x),
        };
        trace.final_residual = r;
        if r <= cfg.residual_tol {
            trace.status = RunStatus::Converged;
            return Ok((x, trace));
        }
        if sweep_max_step <= cfg.step_tol {
            trace.status = RunStatus::Stalled;
            return Ok((x, trace));
        }
    }
    Ok((x, trace))
}

/// Cyclic iteration with the operator family of `cfg.operator_kind`.
pub fn cyclic_solve(
    problem: &FeasibilityProblem,
    cfg: &SolverConfig,
    x0: &Point,
) -> Result<(Point, RunTrace)> {
    let kind = cfg.operator_kind;
    let cached: Option<Vec<Arc<dyn StepOperator>>> = match &cfg.tau {
        TauSchedule::Constant(tau) if *tau > 0.0 && *tau < 2.0 => Some(
            problem
                .constraints()
                .iter()
                .map(|c| kind.build(c.set.clone(), c.beta, *tau))
                .collect::<Result<_>>()?,
        ),
        _ => None,
    };
    drive(
        problem.len(),
        problem.dim(),
        cfg,
        x0,
        |x| problem.residual(x),
        |_, i, tau, x| match &cached {
            Some(ops) => Ok(ops[i].apply(x)),
            None => {
                let c = &problem.constraints()[i];
                Ok(kind.build(c.set.clone(), c.beta, tau)?.apply(x))
            }
        },
    )
}

/// The valiant projection method: [`cyclic_solve`] with valiant projectors,
/// whatever `cfg.operator_kind` says.
pub fn vpm_solve(
    problem: &FeasibilityProblem,
    cfg: &SolverConfig,
    x0: &Point,
) -> Result<(Point, RunTrace)> {
    let cfg = SolverConfig {
        operator_kind: OperatorKind::Valiant,
        ..cfg.clone()
    };
    cyclic_solve(problem, &cfg, x0)
}

struct ArmRow<'a> {
    normal: &'a Point,
    norm_sq: f64,
    norm: f64,
    mid: f64,
    half: f64,
}

/// ARM on hyperslabs `lo_i ≤ ⟨a_i, x⟩ ≤ hi_i`, evaluated from slab data:
/// with `r = ⟨a, x⟩ − (lo + hi)/2` and `h = (hi − lo)/2`, the step is skipped when
/// `|r| ≤ h` and otherwise is `x − (τ/2)(1 − (h/r)²)(r/‖a‖²) a`.
pub fn arm_solve(slabs: &[Hyperslab], cfg: &SolverConfig, x0: &Point) -> Result<(Point, RunTrace)> {
    let first = slabs.first().ok_or(Error::EmptyProblem)?;
    let dim = first.dim();
    let rows = slabs
        .iter()
        .enumerate()
        .map(|(index, s)| {
            s.normal().check_dim(dim)?;
            if s.upper() <= s.lower() {
                return Err(Error::ZeroWidthSlab { index });
            }
            let norm_sq = dot(s.normal().coords(), s.normal().coords());
            Ok(ArmRow {
                normal: s.normal(),
                norm_sq,
                norm: norm_sq.sqrt(),
                mid: 0.5 * (s.lower() + s.upper()),
                half: 0.5 * (s.upper() - s.lower()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let residual = |x: &Point| {
        rows.iter()
            .map(|row| {
                let r = dot(row.normal.coords(), x.coords()) - row.mid;
                ((r.abs() - row.half) / row.norm).max(0.0)
            })
            .fold(0.0, f64::max)
    };
    drive(rows.len(), dim, cfg, x0, residual, |_, i, tau, x| {
        let row = &rows[i];
        let r = dot(row.normal.coords(), x.coords()) - row.mid;
        if r.abs() <= row.half {
            return Ok(x.clone());
        }
        let ratio = row.half / r;
        let factor = 0.5 * tau * (1.0 - ratio * ratio) * r / row.norm_sq;
        Ok(x.add_scaled(-factor, row.normal))
    })
}

const FEJER_DIST_SLACK: f64 = 1e-10;
const FEJER_SQ_SLACK: f64 = 1e-8;

/// Fejér monotonicity of the snapshots with respect to `z`, in the strong form
/// `‖x^{j} − z‖² ≤ ‖x^{i} − z‖² − Σ_{k=i}^{j−1} ‖x^{k+1} − x^k‖²` between consecutive
/// snapshots `i < j`, together with `‖x^j − z‖ ≤ ‖x^i − z‖`. With per-iteration
/// snapshots this is the one-step inequality. The squared form is guaranteed for
/// the valiant projector when `τ ≤ 1` and `z` is feasible, or for any `τ` when
/// `z` lies in every base set `Z_i`.
pub fn fejer_check(trace: &RunTrace, z: &Point) -> Result<bool> {
    if trace.snapshots.len() < 2 {
        return Err(Error::MissingSnapshots("iterate snapshots"));
    }
    let (_, last) = trace.snapshots.last().expect("nonempty");
    z.check_dim(last.dim())?;
    let needed = trace.snapshots.last().map(|(k, _)| *k).unwrap_or(0);
    if trace.records.len() < needed {
        return Err(Error::MissingSnapshots("per-iteration step records"));
    }

    for pair in trace.snapshots.windows(2) {
        let (ka, xa) = (&pair[0].0, &pair[0].1);
        let (kb, xb) = (&pair[1].0, &pair[1].1);
        let da = xa.distance(z);
        let db = xb.distance(z);
        if db > da + FEJER_DIST_SLACK {
            return Ok(false);
        }
        let steps_sq: f64 = trace.records[*ka..*kb]
            .iter()
            .map(|r| r.step_norm * r.step_norm)
            .sum();
        if db * db > da * da - steps_sq + FEJER_SQ_SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Step norms die out: the largest step in the last `window` records is at most
/// `threshold`, and is smaller than the largest step in the first `window`
/// records unless both are zero.
pub fn asymptotic_regularity_check(
    trace: &RunTrace,
    window: usize,
    threshold: f64,
) -> Result<bool> {
    let len = trace.records.len();
    if window == 0 || len <= 2 * window {
        return Err(Error::TraceTooShort {
            len,
            needed: 2 * window.max(1),
        });
    }
    let max_of = |rs: &[IterRecord]| rs.iter().map(|r| r.step_norm).fold(0.0, f64::max);
    let first = max_of(&trace.records[..window]);
    let last = max_of(&trace.records[len - window..]);
    Ok(last <= threshold && (last < first || last == 0.0))
}
