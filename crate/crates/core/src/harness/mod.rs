//! Seeded property suites for the operators and the scalar distance oracle.
//!
//! Each suite runs `trials` independent trials. Trial `t` draws from a ChaCha8
//! stream seeded with `seed` on stream `t`, so a report is reproducible from its
//! seed regardless of how rayon schedules the trials.
//!
//! Reports marked `asserted` gate [`all_passed`]; the others are exploratory
//! (BIK and geometric intrepid nonexpansivity, which are not claimed).

mod sampler;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::Point;
use crate::operators::{valiant_gamma, OperatorKind, RelaxedProjector, StepOperator};
use crate::sets::{ConvexSet, Enlargement};

pub use sampler::{InstanceSampler, SetFamily};

/// Slack for distance inequalities.
pub const NE_SLACK: f64 = 1e-10;
/// Slack for squared-distance inequalities.
pub const SQNE_SLACK: f64 = 1e-9;

pub const CSV_HEADER: &str = "property,trials,violations,worst_margin,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Smallest observed `bound − value`; negative beyond the slack means a violation.
    pub worst_margin: f64,
    pub seed: u64,
    pub elapsed: Duration,
    pub asserted: bool,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{}",
            self.name, self.trials, self.violations, self.worst_margin, self.seed
        )
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match (self.asserted, self.passed()) {
            (true, true) => "PASS",
            (true, false) => "FAIL",
            (false, true) => "ok  ",
            (false, false) => "note",
        };
        write!(
            f,
            "{verdict} {:<28} trials={:<7} violations={:<6} worst_margin={:<12.3e} seed={} elapsed={:.2?}",
            self.name, self.trials, self.violations, self.worst_margin, self.seed, self.elapsed
        )
    }
}

/// True iff every asserted report has zero violations.
pub fn all_passed(reports: &[PropertyReport]) -> bool {
    reports.iter().all(|r| !r.asserted || r.passed())
}

struct Outcome {
    margin: f64,
    violated: bool,
}

impl Outcome {
    fn bound(value: f64, bound: f64, slack: f64) -> Self {
        let margin = bound - value;
        Outcome {
            margin,
            violated: !(margin >= -slack),
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trials<F>(name: String, trials: usize, seed: u64, asserted: bool, trial: F) -> PropertyReport
where
    F: Fn(usize, &mut ChaCha8Rng) -> Outcome + Sync,
{
    let start = Instant::now();
    let (violations, worst_margin) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let o = trial(t, &mut trial_rng(seed, t));
            (o.violated as usize, o.margin)
        })
        .reduce(|| (0, f64::INFINITY), |a, b| (a.0 + b.0, a.1.min(b.1)));
    PropertyReport {
        name,
        trials,
        violations,
        worst_margin,
        seed,
        elapsed: start.elapsed(),
        asserted,
    }
}

/// Where a sampled point sits relative to `Z_[β]`, as a multiple `u` of `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stratum {
    Inside,
    Band,
    Far,
}

impl Stratum {
    fn depth(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Stratum::Inside => rng.random_range(0.0..=1.0),
            Stratum::Band => rng.random_range(1.0..2.0),
            Stratum::Far => rng.random_range(2.0..10.0),
        }
    }

    fn random(rng: &mut ChaCha8Rng) -> Self {
        [Stratum::Inside, Stratum::Band, Stratum::Far][rng.random_range(0..3)]
    }
}

struct OperatorInstance {
    base: Arc<dyn ConvexSet>,
    beta: f64,
    op: Arc<dyn StepOperator>,
}

fn operator_instance(
    kind: OperatorKind,
    sampler: &InstanceSampler,
    rng: &mut ChaCha8Rng,
) -> OperatorInstance {
    let dim = sampler.dim(rng);
    let family = sampler.family(rng);
    let base = sampler.set(rng, family, dim);
    let beta = sampler.beta(rng);
    let tau = sampler.tau(rng);
    let op = kind
        .build(base.clone(), beta, tau)
        .expect("sampler parameters are valid");
    OperatorInstance { base, beta, op }
}

fn planted(
    sampler: &InstanceSampler,
    rng: &mut ChaCha8Rng,
    inst: &OperatorInstance,
    stratum: Stratum,
) -> Point {
    let u = stratum.depth(rng);
    sampler.point_at_distance(rng, inst.base.as_ref(), inst.beta * u)
}

/// Nonexpansivity `‖T(x) − T(y)‖ ≤ ‖x − y‖`, with pairs stratified over
/// both-inside, both-outside (band/far combinations), mixed, and close pairs
/// straddling the enlargement boundary.
pub fn check_ne(
    kind: OperatorKind,
    sampler: &InstanceSampler,
    trials: usize,
    seed: u64,
) -> PropertyReport {
    let asserted = matches!(kind, OperatorKind::Valiant | OperatorKind::Relaxed);
    run_trials(format!("ne/{kind}"), trials, seed, asserted, |t, rng| {
        let inst = operator_instance(kind, sampler, rng);
        let (x, y) = match t % 8 {
            0 => {
                let x = planted(sampler, rng, &inst, Stratum::Inside);
                let y = planted(sampler, rng, &inst, Stratum::Inside);
                (x, y)
            }
            1..=3 => {
                let (sx, sy) = [
                    (Stratum::Band, Stratum::Band),
                    (Stratum::Band, Stratum::Far),
                    (Stratum::Far, Stratum::Far),
                ][t % 8 - 1];
                (
                    planted(sampler, rng, &inst, sx),
                    planted(sampler, rng, &inst, sy),
                )
            }
            4 | 5 => {
                let outer = if t % 8 == 4 {
                    Stratum::Band
                } else {
                    Stratum::Far
                };
                let x = planted(sampler, rng, &inst, Stratum::Inside);
                (x, planted(sampler, rng, &inst, outer))
            }
            _ => {
                let stratum = Stratum::random(rng);
                let x = planted(sampler, rng, &inst, stratum);
                let r = inst.beta * 10f64.powf(rng.random_range(-6.0..0.0));
                let dir = sampler.cloud_point(rng, x.dim(), 1.0);
                let n = dir.distance(&Point::zeros(x.dim())).max(1e-300);
                (x.clone(), x.add_scaled(r / n, &dir))
            }
        };
        let lhs = inst.op.apply(&x).distance(&inst.op.apply(&y));
        Outcome::bound(lhs, x.distance(&y), NE_SLACK)
    })
}

/// `‖x − c‖² − ‖T(x) − c‖² ≥ α(x) ‖x − T(x)‖²` for `c ∈ Z`, where `α = 1` and, for the
/// valiant projector outside the enlargement, also `α = (2 − γ(x))/γ(x)`.
pub fn check_sqne(
    kind: OperatorKind,
    sampler: &InstanceSampler,
    trials: usize,
    seed: u64,
) -> PropertyReport {
    let asserted = kind == OperatorKind::Valiant;
    run_trials(format!("sqne/{kind}"), trials, seed, asserted, |_, rng| {
        let dim = sampler.dim(rng);
        let family = sampler.family(rng);
        let base = sampler.set(rng, family, dim);
        let beta = sampler.beta(rng);
        let tau = sampler.tau(rng);
        let op = kind
            .build(base.clone(), beta, tau)
            .expect("valid parameters");
        let u = Stratum::random(rng).depth(rng);
        let x = sampler.point_at_distance(rng, base.as_ref(), beta * u);
        let c = sampler.point_in_set(rng, base.as_ref());

        let tx = op.apply(&x);
        let lhs = x.distance(&c).powi(2) - tx.distance(&c).powi(2);
        let step_sq = x.distance(&tx).powi(2);
        let mut coefficient: f64 = 1.0;
        if kind == OperatorKind::Valiant {
            if let Ok(gamma) = valiant_gamma(tau, beta, base.distance(&x)) {
                coefficient = coefficient.max((2.0 - gamma) / gamma);
            }
        }
        // Written as value ≤ bound: α‖x − T(x)‖² ≤ lhs.
        Outcome::bound(coefficient * step_sq, lhs, SQNE_SLACK)
    })
}

/// `‖x − c‖² − ‖R(x) − c‖² ≥ ((2 − λ)/λ) ‖x − R(x)‖²` for `R = (1 − λ)Id + λP_Ω`, `c ∈ Ω`.
pub fn check_relaxed(sampler: &InstanceSampler, trials: usize, seed: u64) -> PropertyReport {
    run_trials("relaxed/descent".into(), trials, seed, true, |_, rng| {
        let dim = sampler.dim(rng);
        let family = sampler.family(rng);
        let omega = sampler.set(rng, family, dim);
        let lambda = rng.random_range(0.01..1.99);
        let r = RelaxedProjector::new(omega.clone(), lambda).expect("lambda in (0, 2)");
        let d = rng.random_range(0.0..10.0);
        let x = sampler.point_at_distance(rng, omega.as_ref(), d);
        let c = sampler.point_in_set(rng, omega.as_ref());
        let rx = r.apply(&x);
        let lhs = x.distance(&c).powi(2) - rx.distance(&c).powi(2);
        let rhs = (2.0 - lambda) / lambda * x.distance(&rx).powi(2);
        Outcome::bound(rhs, lhs, SQNE_SLACK)
    })
}

/// Depth multipliers `u` (distance `β·u`) visited by [`check_fixed_point_set`].
pub const FIXED_POINT_DEPTHS: [f64; 7] = [0.0, 0.5, 0.999, 1.0, 1.001, 1.5, 10.0];

/// `Fix T = Z_[β]`: points at depth `u ≤ 1` come back bitwise unchanged, points
/// at `u ≥ 1.001` move. For the valiant projector the step must also equal
/// `γ(x) d_Z(x)` to relative precision `1e-9`.
pub fn check_fixed_point_set(
    kind: OperatorKind,
    sampler: &InstanceSampler,
    trials: usize,
    seed: u64,
) -> PropertyReport {
    run_trials(format!("fix/{kind}"), trials, seed, true, |t, rng| {
        let dim = sampler.dim(rng);
        let family = sampler.family(rng);
        let base = sampler.set(rng, family, dim);
        let beta = sampler.beta(rng);
        let tau = sampler.tau(rng);
        let op = kind
            .build(base.clone(), beta, tau)
            .expect("valid parameters");
        let u = FIXED_POINT_DEPTHS[t % FIXED_POINT_DEPTHS.len()];

        if u <= 1.0 {
            let x = inside_point(sampler, rng, base.as_ref(), beta, u);
            let moved = op.apply(&x).distance(&x);
            Outcome {
                margin: -moved,
                violated: op.apply(&x) != x,
            }
        } else {
            let x = sampler.point_at_distance(rng, base.as_ref(), beta * u);
            let tx = op.apply(&x);
            let moved = tx.distance(&x);
            let mut violated = tx == x || !(moved > 0.0);
            if kind == OperatorKind::Valiant {
                let d = base.distance(&x);
                let expected = valiant_gamma(tau, beta, d).map(|g| g * d).unwrap_or(0.0);
                violated |= (moved - expected).abs() > 1e-9 * expected.max(1e-300);
            }
            Outcome {
                margin: moved,
                violated,
            }
        }
    })
}

/// A point at depth `u·β`, pulled inward by a few ulps if rounding would put it
/// outside the enlargement under the set's own distance evaluation.
fn inside_point(
    sampler: &InstanceSampler,
    rng: &mut ChaCha8Rng,
    base: &dyn ConvexSet,
    beta: f64,
    u: f64,
) -> Point {
    let x = sampler.point_at_distance(rng, base, beta * u);
    if u == 0.0 {
        return base.project(&x);
    }
    let (p, _) = base.project_with_distance(&x);
    let mut shrink = 1.0;
    let mut y = x;
    while base.project_with_distance(&y).1 > beta {
        shrink *= 1.0 - 1e-15;
        y = p.add_scaled(shrink, &y.sub(&p));
    }
    y
}

/// Geometric intrepid middle branch: for `β < d_Z(x) < 2β`, `d_Z(G(x)) = 2β − d_Z(x)`.
pub fn check_reflection(sampler: &InstanceSampler, trials: usize, seed: u64) -> PropertyReport {
    run_trials(
        "reflection/geometric".into(),
        trials,
        seed,
        true,
        |_, rng| {
            let inst = operator_instance(OperatorKind::GeometricIntrepid, sampler, rng);
            let mut x;
            let mut d;
            loop {
                let u = rng.random_range(1.0 + 1e-6..2.0 - 1e-6);
                x = sampler.point_at_distance(rng, inst.base.as_ref(), inst.beta * u);
                d = inst.base.distance(&x);
                if inst.beta < d && d < 2.0 * inst.beta {
                    break;
                }
            }
            let landed = inst.base.distance(&inst.op.apply(&x));
            let err = (landed - (2.0 * inst.beta - d)).abs();
            Outcome::bound(err, 0.0, NE_SLACK)
        },
    )
}

/// Firm nonexpansivity of the metric projectors, including enlargements:
/// `‖P(x) − P(y)‖² + ‖(x − P(x)) − (y − P(y))‖² ≤ ‖x − y‖²`.
pub fn check_projection(sampler: &InstanceSampler, trials: usize, seed: u64) -> PropertyReport {
    run_trials("projection/fne".into(), trials, seed, true, |_, rng| {
        let dim = sampler.dim(rng);
        let family = sampler.family(rng);
        let mut set = sampler.set(rng, family, dim);
        if rng.random_bool(0.3) {
            set = Arc::new(Enlargement::new(set, sampler.beta(rng)).expect("positive beta"));
        }
        let x = sampler.cloud_point(rng, dim, 3.0 * sampler.scale);
        let y = if rng.random_bool(0.5) {
            sampler.cloud_point(rng, dim, 3.0 * sampler.scale)
        } else {
            x.add_scaled(1.0, &sampler.cloud_point(rng, dim, 0.1))
        };
        let (px, py) = (set.project(&x), set.project(&y));
        let lhs = px.distance(&py).powi(2) + x.sub(&px).distance(&y.sub(&py)).powi(2);
        Outcome::bound(lhs, x.distance(&y).powi(2), NE_SLACK)
    })
}

/// `‖V(x) − x‖` at `d_Z(x) = β(1 + 10^{-k})`, `k = 1..=6`.
pub fn valiant_boundary_steps(
    base: Arc<dyn ConvexSet>,
    beta: f64,
    tau: f64,
    boundary_point: &Point,
    outward: &Point,
) -> Vec<f64> {
    let op = OperatorKind::Valiant
        .build(base, beta, tau)
        .expect("valid parameters");
    let n = outward.distance(&Point::zeros(outward.dim()));
    (1..=6)
        .map(|k| {
            let x = boundary_point.add_scaled(beta * (1.0 + 10f64.powi(-k)) / n, outward);
            op.apply(&x).distance(&x)
        })
        .collect()
}

/// The valiant step shrinks monotonically to below `1e-5·β` as `d_Z(x) ↓ β`.
pub fn check_continuity(sampler: &InstanceSampler, trials: usize, seed: u64) -> PropertyReport {
    run_trials("continuity/valiant".into(), trials, seed, true, |_, rng| {
        let dim = sampler.dim(rng);
        let family = sampler.family(rng);
        let base = sampler.set(rng, family, dim);
        let beta = sampler.beta(rng);
        let tau = sampler.tau(rng);
        let x = sampler.point_at_distance(rng, base.as_ref(), 1.0);
        let p = base.project(&x);
        let steps = valiant_boundary_steps(base, beta, tau, &p, &x.sub(&p));
        let monotone = steps.windows(2).all(|w| w[1] < w[0]);
        let last = steps[steps.len() - 1];
        Outcome {
            margin: 1e-5 * beta - last,
            violated: !monotone || !(last < 1e-5 * beta),
        }
    })
}

/// Distances of the valiant projection method on a single unit-normal
/// hyperplane: `d_{k+1} = d_k (1 − (τ/2)(1 − (β/d_k)²))` while `d_k > β`, then constant.
/// Returns `steps + 1` values starting with `d0`.
pub fn scalar_oracle(d0: f64, beta: f64, tau: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut d = d0;
    out.push(d);
    for _ in 0..steps {
        if d > beta {
            let r = beta / d;
            d *= 1.0 - 0.5 * tau * (1.0 - r * r);
        }
        out.push(d);
    }
    out
}

/// Named groups of reports for the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Ne,
    Sqne,
    Fix,
    Relaxed,
    Reflection,
    Projection,
    Continuity,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 8] = [
        "ne",
        "sqne",
        "fix",
        "relaxed",
        "reflection",
        "projection",
        "continuity",
        "all",
    ];

    pub fn run(self, sampler: &InstanceSampler, trials: usize, seed: u64) -> Vec<PropertyReport> {
        use OperatorKind::*;
        match self {
            Suite::Ne => [Valiant, Relaxed, BikIntrepid, GeometricIntrepid]
                .into_iter()
                .map(|k| check_ne(k, sampler, trials, seed))
                .collect(),
            Suite::Sqne => [Valiant, BikIntrepid, GeometricIntrepid]
                .into_iter()
                .map(|k| check_sqne(k, sampler, trials, seed))
                .collect(),
            Suite::Fix => OperatorKind::ALL
                .into_iter()
                .map(|k| check_fixed_point_set(k, sampler, trials, seed))
                .collect(),
            Suite::Relaxed => vec![check_relaxed(sampler, trials, seed)],
            Suite::Reflection => vec![check_reflection(sampler, trials, seed)],
            Suite::Projection => vec![check_projection(sampler, trials, seed)],
            Suite::Continuity => vec![check_continuity(sampler, trials, seed)],
            Suite::All => [
                Suite::Projection,
                Suite::Relaxed,
                Suite::Sqne,
                Suite::Ne,
                Suite::Fix,
                Suite::Reflection,
                Suite::Continuity,
            ]
            .into_iter()
            .flat_map(|s| s.run(sampler, trials, seed))
            .collect(),
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ne" => Suite::Ne,
            "sqne" => Suite::Sqne,
            "fix" => Suite::Fix,
            "relaxed" => Suite::Relaxed,
            "reflection" => Suite::Reflection,
            "projection" => Suite::Projection,
            "continuity" => Suite::Continuity,
            "all" => Suite::All,
            other => {
                return Err(format!(
                    "unknown suite `{other}` (expected one of {})",
                    Suite::NAMES.join(", ")
                ))
            }
        })
    }
}
