//! Closed convex sets as exact projection oracles.
//!
//! Every set implements [`ConvexSet`]: an exact metric projection `P_Z`, the
//! distance `d_Z(x) = ‖x - P_Z(x)‖` and a tolerance-based membership test.
//! Custom sets can be plugged in by implementing the trait; nothing in the crate
//! approximates a projection.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{dot, Point};

/// Membership tolerance used when callers have no better value.
pub const DEFAULT_CONTAINS_TOL: f64 = 1e-9;

/// A nonempty closed convex subset of `R^n` with an exact projector.
pub trait ConvexSet: Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// Metric projection `P_Z(x)`. Points already in the set are returned unchanged.
    fn project(&self, x: &Point) -> Point;

    /// `(P_Z(x), d_Z(x))` from a single projection.
    fn project_with_distance(&self, x: &Point) -> (Point, f64) {
        let p = self.project(x);
        let d = x.distance(&p);
        (p, d)
    }

    fn distance(&self, x: &Point) -> f64 {
        self.project_with_distance(x).1
    }

    fn contains(&self, x: &Point, tol: f64) -> bool {
        self.distance(x) <= tol
    }
}

impl<S: ConvexSet + ?Sized> ConvexSet for Arc<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn project(&self, x: &Point) -> Point {
        (**self).project(x)
    }
    fn project_with_distance(&self, x: &Point) -> (Point, f64) {
        (**self).project_with_distance(x)
    }
    fn distance(&self, x: &Point) -> f64 {
        (**self).distance(x)
    }
    fn contains(&self, x: &Point, tol: f64) -> bool {
        (**self).contains(x, tol)
    }
}

fn nonzero_normal(normal: &Point) -> Result<f64> {
    let sq = dot(normal.coords(), normal.coords());
    if sq > 0.0 && sq.is_finite() {
        Ok(sq)
    } else {
        Err(Error::InvalidParameter {
            name: "normal",
            value: sq.sqrt(),
            reason: "normal vector must be nonzero",
        })
    }
}

fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

/// Moves `x` along `a` so that `⟨a, x⟩` becomes `target`.
fn shift_along(x: &Point, a: &Point, norm_sq: f64, current: f64, target: f64) -> Point {
    x.add_scaled((target - current) / norm_sq, a)
}

/// `{x : ⟨a, x⟩ ≤ b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    normal: Point,
    offset: f64,
    norm_sq: f64,
}

impl Halfspace {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        let norm_sq = nonzero_normal(&normal)?;
        Ok(Halfspace {
            normal,
            offset: finite("offset", offset)?,
            norm_sq,
        })
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl ConvexSet for Halfspace {
    fn dim(&self) -> usize {
        self.normal.dim()
    }

    fn project(&self, x: &Point) -> Point {
        let t = dot(self.normal.coords(), x.coords());
        if t <= self.offset {
            x.clone()
        } else {
            shift_along(x, &self.normal, self.norm_sq, t, self.offset)
        }
    }
}

/// `{x : ⟨a, x⟩ = b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Point,
    offset: f64,
    norm_sq: f64,
}

impl Hyperplane {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        let norm_sq = nonzero_normal(&normal)?;
        Ok(Hyperplane {
            normal,
            offset: finite("offset", offset)?,
            norm_sq,
        })
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl ConvexSet for Hyperplane {
    fn dim(&self) -> usize {
        self.normal.dim()
    }

    fn project(&self, x: &Point) -> Point {
        let t = dot(self.normal.coords(), x.coords());
        if t == self.offset {
            x.clone()
        } else {
            shift_along(x, &self.normal, self.norm_sq, t, self.offset)
        }
    }
}

/// `{x : lo ≤ ⟨a, x⟩ ≤ hi}`. `lo == hi` is allowed and describes a hyperplane.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperslab {
    normal: Point,
    lower: f64,
    upper: f64,
    norm_sq: f64,
}

impl Hyperslab {
    pub fn new(normal: Point, lower: f64, upper: f64) -> Result<Self> {
        let norm_sq = nonzero_normal(&normal)?;
        let lower = finite("lower", lower)?;
        let upper = finite("upper", upper)?;
        if lower > upper {
            return Err(Error::InvalidParameter {
                name: "lower",
                value: lower,
                reason: "lower bound exceeds upper bound",
            });
        }
        Ok(Hyperslab {
            normal,
            lower,
            upper,
            norm_sq,
        })
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn normal_norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    /// The hyperplane `⟨a, x⟩ = (lo + hi) / 2` and the geometric half-width
    /// `(hi - lo) / (2‖a‖)`, so that the slab is the half-width enlargement of
    /// its median hyperplane.
    pub fn median(&self) -> (Hyperplane, f64) {
        let mid = 0.5 * (self.lower + self.upper);
        let half_width = 0.5 * (self.upper - self.lower) / self.normal_norm();
        let plane = Hyperplane {
            normal: self.normal.clone(),
            offset: mid,
            norm_sq: self.norm_sq,
        };
        (plane, half_width)
    }
}

impl ConvexSet for Hyperslab {
    fn dim(&self) -> usize {
        self.normal.dim()
    }

    fn project(&self, x: &Point) -> Point {
        let t = dot(self.normal.coords(), x.coords());
        let clamped = t.clamp(self.lower, self.upper);
        if clamped == t {
            x.clone()
        } else {
            shift_along(x, &self.normal, self.norm_sq, t, clamped)
        }
    }
}

/// Closed Euclidean ball. A zero radius gives the singleton `{c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "radius",
                value: radius,
                reason: "radius must be finite and nonnegative",
            });
        }
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl ConvexSet for Ball {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn project(&self, x: &Point) -> Point {
        let r = x.distance(&self.center);
        if r <= self.radius {
            x.clone()
        } else {
            let offset = x.sub(&self.center);
            self.center.add_scaled(self.radius / r, &offset)
        }
    }
}

/// Axis-aligned box `{x : lo_i ≤ x_i ≤ hi_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Point,
    upper: Point,
}

impl BoxSet {
    pub fn new(lower: Point, upper: Point) -> Result<Self> {
        upper.check_dim(lower.dim())?;
        if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::InvalidParameter {
                name: "lower",
                value: lower[i],
                reason: "lower corner exceeds upper corner",
            });
        }
        Ok(BoxSet { lower, upper })
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }
}

impl ConvexSet for BoxSet {
    fn dim(&self) -> usize {
        self.lower.dim()
    }

    fn project(&self, x: &Point) -> Point {
        let coords = x
            .coords()
            .iter()
            .zip(self.lower.coords().iter().zip(self.upper.coords()))
            .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
            .collect();
        Point::from_vec_unchecked(coords)
    }
}

/// The enlargement `Z_[β] = {x : d_Z(x) ≤ β}` of a base set `Z`, with `β > 0`.
#[derive(Debug, Clone)]
pub struct Enlargement {
    base: Arc<dyn ConvexSet>,
    beta: f64,
}

impl Enlargement {
    pub fn new(base: Arc<dyn ConvexSet>, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Enlargement { base, beta })
    }

    pub fn base(&self) -> &Arc<dyn ConvexSet> {
        &self.base
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<f64> {
    if beta > 0.0 && beta.is_finite() {
        Ok(beta)
    } else {
        Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "enlargement depth must be positive and finite",
        })
    }
}

impl ConvexSet for Enlargement {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn project(&self, x: &Point) -> Point {
        let (p, d) = self.base.project_with_distance(x);
        if d <= self.beta {
            x.clone()
        } else {
            p.add_scaled(self.beta / d, &x.sub(&p))
        }
    }

    fn distance(&self, x: &Point) -> f64 {
        (self.base.distance(x) - self.beta).max(0.0)
    }
}
