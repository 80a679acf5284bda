//! Seeded fixtures shared by the benchmarks.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use valiant_core::harness::{InstanceSampler, SetFamily};
use valiant_core::{ConvexSet, FeasibilityProblem, Point};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A base set of `family` in `dim` dimensions and a point at distance `3β`.
pub fn set_and_point(family: SetFamily, dim: usize, beta: f64) -> (Arc<dyn ConvexSet>, Point) {
    let sampler = InstanceSampler::default();
    let mut rng = rng(dim as u64);
    let set = sampler.set(&mut rng, family, dim);
    let x = sampler.point_at_distance(&mut rng, set.as_ref(), 3.0 * beta);
    (set, x)
}

/// A planted feasible problem with `m` constraints and a start far from it.
pub fn planted(m: usize, dim: usize, seed: u64) -> (FeasibilityProblem, Point) {
    let sampler = InstanceSampler::default();
    let mut rng = rng(seed);
    let (problem, _) = sampler.planted_problem(&mut rng, m, dim);
    let x0 = sampler.cloud_point(&mut rng, dim, 10.0 * sampler.scale);
    (problem, x0)
}
