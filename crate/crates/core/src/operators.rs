//! Step operators built on enlargements.
//!
//! All operators take a base set `Z` and a depth `β > 0`, leave the enlargement
//! `C = Z_[β]` pointwise fixed, and differ in what they do outside it:
//!
//! | operator | `d_Z(x) ≤ β` | `β < d_Z(x) < 2β` | `d_Z(x) ≥ 2β` |
//! |---|---|---|---|
//! | [`ValiantOperator`] | `x` | `x + γ(x)(P_Z(x) − x)` | same |
//! | [`BikIntrepidOperator`] | `x` | `x + (1 − d/β)(x − P_Z(x))` | `P_Z(x)` |
//! | [`GeometricIntrepidOperator`] | `x` | `x + 2(β/d − 1)(x − P_Z(x))` | `P_Z(x)` |
//!
//! with `γ(x) = (τ/2)(1 − (β/d_Z(x))²)`, `τ ∈ (0, 2)`.
//!
//! Branch selection uses the exact comparison `d <= β`, so inside points come
//! back bitwise unchanged.

use std::fmt::{self, Debug};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::sets::{check_beta, ConvexSet, Enlargement};

/// Tolerance on `d_Z(x) - β` used by fixed-point oracles when none is given.
pub const DEFAULT_FIXED_TOL: f64 = 1e-9;

/// A map `x ↦ T(x)` on `R^n` together with a membership oracle for `Fix T`.
pub trait StepOperator: Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &Point) -> Point;

    /// Whether `x` is a fixed point, up to `tol` on the defining distance.
    fn is_fixed(&self, x: &Point, tol: f64) -> bool;
}

impl<T: StepOperator + ?Sized> StepOperator for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &Point) -> Point {
        (**self).apply(x)
    }
    fn is_fixed(&self, x: &Point, tol: f64) -> bool {
        (**self).is_fixed(x, tol)
    }
}

fn check_open_interval(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 2.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in the open interval (0, 2)",
        })
    }
}

/// Step factor `γ = (τ/2)(1 − (β/d)²)` of the valiant projector at distance `d > β`.
pub fn valiant_gamma(tau: f64, beta: f64, distance: f64) -> Result<f64> {
    if distance > beta {
        let ratio = beta / distance;
        Ok(0.5 * tau * (1.0 - ratio * ratio))
    } else {
        Err(Error::GammaUndefined { distance, beta })
    }
}

/// The valiant projector onto `Z_[β]` with relaxation `τ ∈ (0, 2)`.
#[derive(Debug, Clone)]
pub struct ValiantOperator {
    base: Arc<dyn ConvexSet>,
    beta: f64,
    tau: f64,
}

impl ValiantOperator {
    pub fn new(base: Arc<dyn ConvexSet>, beta: f64, tau: f64) -> Result<Self> {
        Ok(ValiantOperator {
            base,
            beta: check_beta(beta)?,
            tau: check_open_interval("tau", tau)?,
        })
    }

    pub fn base(&self) -> &Arc<dyn ConvexSet> {
        &self.base
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `γ(x)`; an error when `x` lies in the enlargement, where the step is not taken.
    pub fn gamma(&self, x: &Point) -> Result<f64> {
        valiant_gamma(self.tau, self.beta, self.base.distance(x))
    }
}

impl StepOperator for ValiantOperator {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, x: &Point) -> Point {
        let (p, d) = self.base.project_with_distance(x);
        if d <= self.beta {
            return x.clone();
        }
        let ratio = self.beta / d;
        let gamma = 0.5 * self.tau * (1.0 - ratio * ratio);
        x.add_scaled(gamma, &p.sub(x))
    }

    fn is_fixed(&self, x: &Point, tol: f64) -> bool {
        self.base.distance(x) - self.beta <= tol
    }
}

/// The Bauschke–Iorio–Koch intrepid projector onto `Z_[β]`.
#[derive(Debug, Clone)]
pub struct BikIntrepidOperator {
    base: Arc<dyn ConvexSet>,
    beta: f64,
}

impl BikIntrepidOperator {
    pub fn new(base: Arc<dyn ConvexSet>, beta: f64) -> Result<Self> {
        Ok(BikIntrepidOperator {
            base,
            beta: check_beta(beta)?,
        })
    }
}

impl StepOperator for BikIntrepidOperator {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, x: &Point) -> Point {
        let (p, d) = self.base.project_with_distance(x);
        if d >= 2.0 * self.beta {
            p
        } else if d <= self.beta {
            x.clone()
        } else {
            x.add_scaled(1.0 - d / self.beta, &x.sub(&p))
        }
    }

    fn is_fixed(&self, x: &Point, tol: f64) -> bool {
        self.base.distance(x) - self.beta <= tol
    }
}

/// The geometric intrepid projector: points in the band `β < d < 2β` are
/// reflected across the boundary of `Z_[β]`, landing at distance `2β − d`.
///
/// Experimental: it carries no convergence guarantee and is excluded from the
/// guaranteed solver presets.
#[derive(Debug, Clone)]
pub struct GeometricIntrepidOperator {
    base: Arc<dyn ConvexSet>,
    beta: f64,
}

impl GeometricIntrepidOperator {
    pub fn new(base: Arc<dyn ConvexSet>, beta: f64) -> Result<Self> {
        Ok(GeometricIntrepidOperator {
            base,
            beta: check_beta(beta)?,
        })
    }
}

impl StepOperator for GeometricIntrepidOperator {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn apply(&self, x: &Point) -> Point {
        let (p, d) = self.base.project_with_distance(x);
        if d >= 2.0 * self.beta {
            p
        } else if d <= self.beta {
            x.clone()
        } else {
            x.add_scaled(2.0 * (self.beta / d - 1.0), &x.sub(&p))
        }
    }

    fn is_fixed(&self, x: &Point, tol: f64) -> bool {
        self.base.distance(x) - self.beta <= tol
    }
}

/// `R = (1 − λ) Id + λ P_Ω`, `λ ∈ (0, 2)`.
#[derive(Debug, Clone)]
pub struct RelaxedProjector {
    target: Arc<dyn ConvexSet>,
    lambda: f64,
}

impl RelaxedProjector {
    pub fn new(target: Arc<dyn ConvexSet>, lambda: f64) -> Result<Self> {
        Ok(RelaxedProjector {
            target,
            lambda: check_open_interval("lambda", lambda)?,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl StepOperator for RelaxedProjector {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn apply(&self, x: &Point) -> Point {
        let p = self.target.project(x);
        if p == *x {
            return p;
        }
        x.add_scaled(self.lambda, &p.sub(x))
    }

    fn is_fixed(&self, x: &Point, tol: f64) -> bool {
        self.target.distance(x) <= tol
    }
}

/// `ops[n-1] ∘ … ∘ ops[0]`: the first operator in the list is applied first.
#[derive(Debug, Clone)]
pub struct CompositionOperator {
    ops: Vec<Arc<dyn StepOperator>>,
}

impl CompositionOperator {
    pub fn new(ops: Vec<Arc<dyn StepOperator>>) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyComposition)?;
        let dim = first.dim();
        if let Some(op) = ops.iter().find(|op| op.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.dim(),
            });
        }
        Ok(CompositionOperator { ops })
    }

    pub fn operators(&self) -> &[Arc<dyn StepOperator>] {
        &self.ops
    }
}

impl StepOperator for CompositionOperator {
    fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    fn apply(&self, x: &Point) -> Point {
        let mut y = self.ops[0].apply(x);
        for op in &self.ops[1..] {
            y = op.apply(&y);
        }
        y
    }

    /// Common fixed points of the members. For strictly quasi-nonexpansive
    /// members with a common fixed point this is exactly `Fix` of the composition.
    fn is_fixed(&self, x: &Point, tol: f64) -> bool {
        self.ops.iter().all(|op| op.is_fixed(x, tol))
    }
}

/// Operator family driven by the cyclic solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Valiant,
    BikIntrepid,
    GeometricIntrepid,
    /// Relaxed projection onto the enlargement itself, with `λ = τ`.
    Relaxed,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [
        OperatorKind::Valiant,
        OperatorKind::BikIntrepid,
        OperatorKind::GeometricIntrepid,
        OperatorKind::Relaxed,
    ];

    /// The step operator for `C = Z_[β]`. `tau` is ignored by the intrepid families.
    pub fn build(
        self,
        base: Arc<dyn ConvexSet>,
        beta: f64,
        tau: f64,
    ) -> Result<Arc<dyn StepOperator>> {
        Ok(match self {
            OperatorKind::Valiant => Arc::new(ValiantOperator::new(base, beta, tau)?),
            OperatorKind::BikIntrepid => Arc::new(BikIntrepidOperator::new(base, beta)?),
            OperatorKind::GeometricIntrepid => {
                Arc::new(GeometricIntrepidOperator::new(base, beta)?)
            }
            OperatorKind::Relaxed => {
                let target: Arc<dyn ConvexSet> = Arc::new(Enlargement::new(base, beta)?);
                Arc::new(RelaxedProjector::new(target, tau)?)
            }
        })
    }

    pub fn uses_tau(self) -> bool {
        matches!(self, OperatorKind::Valiant | OperatorKind::Relaxed)
    }

    pub fn is_experimental(self) -> bool {
        self == OperatorKind::GeometricIntrepid
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Valiant => "valiant",
            OperatorKind::BikIntrepid => "bik",
            OperatorKind::GeometricIntrepid => "geometric",
            OperatorKind::Relaxed => "relaxed",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "valiant" | "vpm" => Ok(OperatorKind::Valiant),
            "bik" | "bik_intrepid" => Ok(OperatorKind::BikIntrepid),
            "geometric" | "geometric_intrepid" => Ok(OperatorKind::GeometricIntrepid),
            "relaxed" => Ok(OperatorKind::Relaxed),
            other => Err(format!("unknown operator family `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{Ball, BoxSet, Halfspace, Hyperplane, Hyperslab};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn unit_ball() -> Arc<dyn ConvexSet> {
        Arc::new(Ball::new(Point::zeros(2), 1.0).unwrap())
    }

    fn axis_plane() -> Arc<dyn ConvexSet> {
        Arc::new(Hyperplane::new(p(&[1.0, 0.0]), 0.0).unwrap())
    }

    fn random_point(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Point {
        p(&(0..dim)
            .map(|_| rng.random_range(-scale..scale))
            .collect::<Vec<_>>())
    }

    fn random_set(rng: &mut ChaCha8Rng, dim: usize) -> Arc<dyn ConvexSet> {
        let a = random_point(rng, dim, 1.0);
        match rng.random_range(0..5) {
            0 => Arc::new(Halfspace::new(a, rng.random_range(-1.0..1.0)).unwrap()),
            1 => Arc::new(Hyperplane::new(a, rng.random_range(-1.0..1.0)).unwrap()),
            2 => Arc::new(Hyperslab::new(a, -0.5, rng.random_range(-0.5..1.0)).unwrap()),
            3 => Arc::new(Ball::new(a, rng.random_range(0.0..2.0)).unwrap()),
            _ => {
                let hi = p(&a.coords().iter().map(|v| v + 1.0).collect::<Vec<_>>());
                Arc::new(BoxSet::new(a, hi).unwrap())
            }
        }
    }

    #[test]
    fn valiant_examples() {
        let v = ValiantOperator::new(unit_ball(), 0.5, 1.0).unwrap();
        assert_eq!(v.apply(&p(&[0.6, 0.0])), p(&[0.6, 0.0]));
        assert_eq!(v.apply(&p(&[3.0, 0.0])), p(&[2.0625, 0.0]));
        let v = ValiantOperator::new(axis_plane(), 1.0, 1.0).unwrap();
        assert_eq!(v.apply(&p(&[2.0, 0.0])), p(&[1.25, 0.0]));
    }

    #[test]
    fn valiant_rejects_bad_parameters() {
        assert!(ValiantOperator::new(unit_ball(), 0.5, 0.0).is_err());
        assert!(ValiantOperator::new(unit_ball(), 0.5, 2.0).is_err());
        assert!(ValiantOperator::new(unit_ball(), 0.0, 1.0).is_err());
        assert!(RelaxedProjector::new(unit_ball(), 2.5).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(valiant_gamma(1.0, 0.5, 2.0).unwrap(), 0.46875);
        assert!((valiant_gamma(1.0, 1.0, 1.0001).unwrap() - 1.0e-4).abs() < 1e-5);
        assert!((valiant_gamma(1.5, 1.0, 1e6).unwrap() - 0.75).abs() < 1e-9);
        let v = ValiantOperator::new(unit_ball(), 0.5, 1.0).unwrap();
        assert_eq!(v.gamma(&p(&[3.0, 0.0])).unwrap(), 0.46875);
        assert!(matches!(
            v.gamma(&p(&[1.5, 0.0])),
            Err(Error::GammaUndefined { .. })
        ));
    }

    #[test]
    fn bik_examples() {
        let q = BikIntrepidOperator::new(axis_plane(), 1.0).unwrap();
        assert_eq!(q.apply(&p(&[3.0, 0.0])), p(&[0.0, 0.0]));
        assert_eq!(q.apply(&p(&[0.5, 2.0])), p(&[0.5, 2.0]));
        assert_eq!(q.apply(&p(&[1.5, 0.0])), p(&[0.75, 0.0]));
    }

    #[test]
    fn geometric_examples() {
        let g = GeometricIntrepidOperator::new(axis_plane(), 1.0).unwrap();
        assert_eq!(g.apply(&p(&[1.5, 0.0])), p(&[0.5, 0.0]));
        assert_eq!(g.apply(&p(&[0.2, 4.0])), p(&[0.2, 4.0]));
        assert_eq!(g.apply(&p(&[5.0, 0.0])), p(&[0.0, 0.0]));
    }

    #[test]
    fn relaxed_examples() {
        let r = RelaxedProjector::new(unit_ball(), 1.0).unwrap();
        assert_eq!(r.apply(&p(&[2.0, 0.0])), p(&[1.0, 0.0]));
        let r = RelaxedProjector::new(unit_ball(), 0.5).unwrap();
        assert_eq!(r.apply(&p(&[3.0, 0.0])), p(&[2.0, 0.0]));
        let r = RelaxedProjector::new(axis_plane(), 1.5).unwrap();
        assert_eq!(r.apply(&p(&[2.0, 0.0])), p(&[-1.0, 0.0]));
    }

    fn median_plane(axis: usize) -> Arc<dyn ConvexSet> {
        Arc::new(Hyperplane::new(Point::unit(2, axis), 0.5).unwrap())
    }

    #[test]
    fn composition_examples() {
        let v: Arc<dyn StepOperator> =
            Arc::new(ValiantOperator::new(unit_ball(), 0.5, 1.3).unwrap());
        let single = CompositionOperator::new(vec![v.clone()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = random_point(&mut rng, 2, 5.0);
            assert_eq!(single.apply(&x), v.apply(&x));
        }

        let op1: Arc<dyn StepOperator> =
            Arc::new(ValiantOperator::new(median_plane(0), 0.5, 1.0).unwrap());
        let op2: Arc<dyn StepOperator> =
            Arc::new(ValiantOperator::new(median_plane(1), 0.5, 1.0).unwrap());
        let both = CompositionOperator::new(vec![op1, op2]).unwrap();
        // Per axis: d = 1.5, gamma = 0.5 * (1 - 1/9) = 4/9, coordinate 2 - (4/9) * 1.5 = 4/3.
        let y = both.apply(&p(&[2.0, 2.0]));
        assert!((y[0] - 4.0 / 3.0).abs() < 1e-15 && (y[1] - 4.0 / 3.0).abs() < 1e-15);
        let inside = p(&[0.25, 0.9]);
        assert_eq!(both.apply(&inside), inside);
        assert!(both.is_fixed(&inside, DEFAULT_FIXED_TOL));
        assert!(!both.is_fixed(&p(&[2.0, 2.0]), DEFAULT_FIXED_TOL));
    }

    #[test]
    fn composition_validates_members() {
        assert_eq!(
            CompositionOperator::new(vec![]).unwrap_err(),
            Error::EmptyComposition
        );
        let a: Arc<dyn StepOperator> =
            Arc::new(ValiantOperator::new(unit_ball(), 0.5, 1.0).unwrap());
        let b: Arc<dyn StepOperator> = Arc::new(
            ValiantOperator::new(Arc::new(Ball::new(Point::zeros(3), 1.0).unwrap()), 0.5, 1.0)
                .unwrap(),
        );
        assert!(CompositionOperator::new(vec![a, b]).is_err());
    }

    #[test]
    fn fixed_set_is_the_enlargement() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let dim = rng.random_range(1..6);
            let z = random_set(&mut rng, dim);
            let beta = rng.random_range(0.1..1.5);
            let v = ValiantOperator::new(z.clone(), beta, rng.random_range(0.05..1.95)).unwrap();
            let x = random_point(&mut rng, dim, 4.0);
            let d = z.distance(&x);
            if d <= beta {
                assert_eq!(v.apply(&x), x);
                assert!(v.is_fixed(&x, DEFAULT_FIXED_TOL));
            } else if d > beta + 1e-9 {
                assert!(v.apply(&x).distance(&x) > 0.0);
                assert!(!v.is_fixed(&x, DEFAULT_FIXED_TOL));
            }
        }
    }

    #[test]
    fn valiant_is_one_strongly_quasi_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let dim = rng.random_range(1..6);
            let z = random_set(&mut rng, dim);
            let v = ValiantOperator::new(z.clone(), rng.random_range(0.1..1.5), 1.9).unwrap();
            let x = random_point(&mut rng, dim, 6.0);
            let c = z.project(&random_point(&mut rng, dim, 6.0));
            let vx = v.apply(&x);
            let lhs = x.distance(&c).powi(2) - vx.distance(&c).powi(2);
            assert!(lhs >= x.distance(&vx).powi(2) - 1e-9);
        }
    }

    #[test]
    fn valiant_is_nonexpansive_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5000 {
            let dim = rng.random_range(1..6);
            let z = random_set(&mut rng, dim);
            let tau = [0.2, 1.0, 1.8][rng.random_range(0..3)];
            let v = ValiantOperator::new(z, rng.random_range(0.1..1.5), tau).unwrap();
            let x = random_point(&mut rng, dim, 3.0);
            let y = x.add_scaled(1.0, &random_point(&mut rng, dim, 0.5));
            assert!(v.apply(&x).distance(&v.apply(&y)) <= x.distance(&y) + 1e-10);
        }
    }

    #[test]
    fn relaxed_projector_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let dim = rng.random_range(1..6);
            let omega = random_set(&mut rng, dim);
            let lambda = rng.random_range(0.01..1.99);
            let r = RelaxedProjector::new(omega.clone(), lambda).unwrap();
            let x = random_point(&mut rng, dim, 6.0);
            let c = omega.project(&random_point(&mut rng, dim, 6.0));
            let rx = r.apply(&x);
            let lhs = x.distance(&c).powi(2) - rx.distance(&c).powi(2);
            assert!(lhs >= (2.0 - lambda) / lambda * x.distance(&rx).powi(2) - 1e-9);
        }
    }

    #[test]
    fn geometric_reflects_into_the_enlargement_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..2000 {
            let dim = rng.random_range(1..6);
            let z = random_set(&mut rng, dim);
            let beta = rng.random_range(0.1..1.5);
            let g = GeometricIntrepidOperator::new(z.clone(), beta).unwrap();
            let x = random_point(&mut rng, dim, 4.0);
            let d = z.distance(&x);
            if beta < d && d < 2.0 * beta {
                assert!((z.distance(&g.apply(&x)) - (2.0 * beta - d)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn valiant_step_vanishes_continuously_at_the_boundary() {
        let beta = 0.8;
        let v = ValiantOperator::new(axis_plane(), beta, 1.0).unwrap();
        let steps: Vec<f64> = (1..=6)
            .map(|k| {
                let x = p(&[beta * (1.0 + 10f64.powi(-k)), 0.3]);
                v.apply(&x).distance(&x)
            })
            .collect();
        assert!(steps.windows(2).all(|w| w[1] < w[0]));
        assert!(steps[5] < 1e-5 * beta);
    }

    // The BIK middle branch lands at distance d(2 - d/β), which tends to 0 as
    // d → 2β, so the map is continuous across the far-branch threshold.
    #[test]
    fn bik_distance_is_continuous_at_twice_beta() {
        let q = BikIntrepidOperator::new(axis_plane(), 1.0).unwrap();
        let z = axis_plane();
        let at = |d: f64| z.distance(&q.apply(&p(&[d, 0.0])));
        assert_eq!(at(2.0), 0.0);
        assert!(at(2.0 - 1e-9) < 3e-9);
        assert!((at(1.0 + 1e-12) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kind_round_trips_through_names() {
        for kind in OperatorKind::ALL {
            assert_eq!(kind.name().parse::<OperatorKind>().unwrap(), kind);
            let op = kind.build(unit_ball(), 0.5, 1.0).unwrap();
            let inside = p(&[0.2, 0.1]);
            assert_eq!(op.apply(&inside), inside);
        }
        assert!("nope".parse::<OperatorKind>().is_err());
        assert!(OperatorKind::GeometricIntrepid.is_experimental());
    }
}
