use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{dot, Point};
use crate::sets::{Ball, BoxSet, ConvexSet, Halfspace, Hyperplane, Hyperslab};
use crate::solver::{Constraint, FeasibilityProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetFamily {
    Halfspace,
    Hyperplane,
    Hyperslab,
    Ball,
    Box,
}

impl SetFamily {
    pub const ALL: [SetFamily; 5] = [
        SetFamily::Halfspace,
        SetFamily::Hyperplane,
        SetFamily::Hyperslab,
        SetFamily::Ball,
        SetFamily::Box,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SetFamily::Halfspace => "halfspace",
            SetFamily::Hyperplane => "hyperplane",
            SetFamily::Hyperslab => "hyperslab",
            SetFamily::Ball => "ball",
            SetFamily::Box => "box",
        }
    }
}

impl fmt::Display for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SetFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SetFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown set family `{s}`"))
    }
}

/// Set parameters that can be rigidly translated before being frozen into a set.
#[derive(Debug, Clone)]
enum SetShape {
    Halfspace { a: Vec<f64>, b: f64 },
    Hyperplane { a: Vec<f64>, b: f64 },
    Hyperslab { a: Vec<f64>, lo: f64, hi: f64 },
    Ball { c: Vec<f64>, r: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl SetShape {
    fn translate(&mut self, v: &[f64]) {
        let shift = |xs: &mut Vec<f64>| xs.iter_mut().zip(v).for_each(|(x, d)| *x += d);
        match self {
            SetShape::Halfspace { a, b } | SetShape::Hyperplane { a, b } => *b += dot(a, v),
            SetShape::Hyperslab { a, lo, hi } => {
                let s = dot(a, v);
                *lo += s;
                *hi += s;
            }
            SetShape::Ball { c, .. } => shift(c),
            SetShape::Box { lo, hi } => {
                shift(lo);
                shift(hi);
            }
        }
    }

    fn build(self) -> Arc<dyn ConvexSet> {
        let pt = |v: Vec<f64>| Point::new(v).expect("finite sampled coordinates");
        match self {
            SetShape::Halfspace { a, b } => Arc::new(Halfspace::new(pt(a), b).expect("valid")),
            SetShape::Hyperplane { a, b } => Arc::new(Hyperplane::new(pt(a), b).expect("valid")),
            SetShape::Hyperslab { a, lo, hi } => {
                Arc::new(Hyperslab::new(pt(a), lo, hi).expect("valid"))
            }
            SetShape::Ball { c, r } => Arc::new(Ball::new(pt(c), r).expect("valid")),
            SetShape::Box { lo, hi } => Arc::new(BoxSet::new(pt(lo), pt(hi)).expect("valid")),
        }
    }
}

/// Random instance generator for the property suites.
///
/// Sets live in a cube of half-width `scale` around the origin; degenerate
/// members (zero-radius balls, flat boxes, zero-width slabs) are drawn on purpose.
#[derive(Debug, Clone)]
pub struct InstanceSampler {
    pub dims: Vec<usize>,
    pub families: Vec<SetFamily>,
    pub beta_range: (f64, f64),
    pub taus: Vec<f64>,
    pub scale: f64,
}

impl Default for InstanceSampler {
    fn default() -> Self {
        InstanceSampler {
            dims: vec![2, 5, 20],
            families: SetFamily::ALL.to_vec(),
            beta_range: (0.05, 2.0),
            taus: vec![0.2, 1.0, 1.8],
            scale: 4.0,
        }
    }
}

fn random_normal(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let a: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = dot(&a, &a).sqrt();
        if n > 1e-3 {
            // Non-unit normals on purpose: lengths in [0.25, 4).
            let len = 2f64.powf(rng.random_range(-2.0..2.0));
            return a.into_iter().map(|v| v * len / n).collect();
        }
    }
}

impl InstanceSampler {
    pub fn dim(&self, rng: &mut ChaCha8Rng) -> usize {
        self.dims[rng.random_range(0..self.dims.len())]
    }

    pub fn family(&self, rng: &mut ChaCha8Rng) -> SetFamily {
        self.families[rng.random_range(0..self.families.len())]
    }

    pub fn beta(&self, rng: &mut ChaCha8Rng) -> f64 {
        rng.random_range(self.beta_range.0..=self.beta_range.1)
    }

    pub fn tau(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.taus[rng.random_range(0..self.taus.len())]
    }

    pub fn cloud_point(&self, rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Point {
        Point::new((0..dim).map(|_| rng.random_range(-scale..scale)).collect())
            .expect("finite sampled coordinates")
    }

    fn shape(&self, rng: &mut ChaCha8Rng, family: SetFamily, dim: usize) -> SetShape {
        let s = self.scale;
        let coord = |rng: &mut ChaCha8Rng| rng.random_range(-s..s);
        match family {
            SetFamily::Halfspace => {
                let a = random_normal(rng, dim);
                let b = coord(rng) * dot(&a, &a).sqrt();
                SetShape::Halfspace { a, b }
            }
            SetFamily::Hyperplane => {
                let a = random_normal(rng, dim);
                let b = coord(rng) * dot(&a, &a).sqrt();
                SetShape::Hyperplane { a, b }
            }
            SetFamily::Hyperslab => {
                let a = random_normal(rng, dim);
                let n = dot(&a, &a).sqrt();
                let lo = coord(rng) * n;
                let width = if rng.random_bool(0.1) {
                    0.0
                } else {
                    rng.random_range(0.0..s) * n
                };
                SetShape::Hyperslab {
                    a,
                    lo,
                    hi: lo + width,
                }
            }
            SetFamily::Ball => {
                let c = (0..dim).map(|_| coord(rng)).collect();
                let r = if rng.random_bool(0.1) {
                    0.0
                } else {
                    rng.random_range(0.0..s)
                };
                SetShape::Ball { c, r }
            }
            SetFamily::Box => {
                let lo: Vec<f64> = (0..dim).map(|_| coord(rng)).collect();
                let hi = lo
                    .iter()
                    .map(|l| {
                        if rng.random_bool(0.1) {
                            *l
                        } else {
                            l + rng.random_range(0.0..s)
                        }
                    })
                    .collect();
                SetShape::Box { lo, hi }
            }
        }
    }

    pub fn set(&self, rng: &mut ChaCha8Rng, family: SetFamily, dim: usize) -> Arc<dyn ConvexSet> {
        self.shape(rng, family, dim).build()
    }

    /// A point of `set`: the projection of a wide random point, or with
    /// probability one half a convex combination of two such projections.
    pub fn point_in_set(&self, rng: &mut ChaCha8Rng, set: &dyn ConvexSet) -> Point {
        let dim = set.dim();
        let a = set.project(&self.cloud_point(rng, dim, 3.0 * self.scale));
        if rng.random_bool(0.5) {
            let b = set.project(&self.cloud_point(rng, dim, 3.0 * self.scale));
            let t = rng.random_range(0.0..1.0);
            let mix = a.add_scaled(t, &b.sub(&a));
            // Convex combination stays in the set up to rounding; re-project to be exact.
            set.project(&mix)
        } else {
            a
        }
    }

    /// A point `x` with `P_Z(x) = p` and `d_Z(x) = d` (up to rounding), built by
    /// moving from a boundary point `p` along an outward normal.
    pub fn point_at_distance(&self, rng: &mut ChaCha8Rng, set: &dyn ConvexSet, d: f64) -> Point {
        let dim = set.dim();
        let mut fallback = None;
        for _ in 0..64 {
            let w = self.cloud_point(rng, dim, 3.0 * self.scale);
            let (p, dist) = set.project_with_distance(&w);
            if dist > 1e-6 {
                return p.add_scaled(d / dist, &w.sub(&p));
            }
            fallback.get_or_insert(p);
        }
        fallback.expect("at least one sample")
    }

    /// `m` constraints around a planted point `z` with `d_{Z_i}(z) ≤ 0.9 β_i`,
    /// so the intersection of the enlargements contains a ball around `z`.
    pub fn planted_problem(
        &self,
        rng: &mut ChaCha8Rng,
        m: usize,
        dim: usize,
    ) -> (FeasibilityProblem, Point) {
        let z = self.cloud_point(rng, dim, self.scale);
        let constraints = (0..m)
            .map(|_| {
                let family = self.family(rng);
                let beta = self.beta(rng);
                let mut shape = self.shape(rng, family, dim);
                let probe = shape.clone().build();
                let (p, d) = probe.project_with_distance(&z);
                let target = rng.random_range(0.0..0.9) * beta;
                if d > target {
                    let v: Vec<f64> = z.sub(&p).scale(1.0 - target / d).into_vec();
                    shape.translate(&v);
                }
                Constraint::new(shape.build(), beta).expect("positive beta")
            })
            .collect();
        let problem = FeasibilityProblem::new(constraints).expect("nonempty problem");
        (problem, z)
    }
}
