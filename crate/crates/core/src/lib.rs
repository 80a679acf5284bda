//! Convex feasibility by projection methods over set enlargements.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: the dense [`Point`] type and the few vector kernels everything else needs.
//! * [`sets`]: closed convex sets exposed as exact projection oracles, plus the
//!   [`Enlargement`] `Z_[β] = {x : d_Z(x) ≤ β}`.
//! * [`operators`]: the valiant projector, the BIK and geometric intrepid projectors,
//!   the relaxed projector and operator composition.
//! * [`solver`]: the cyclic driver (valiant projection method, intrepid and relaxed
//!   variants, the ARM hyperslab specialisation) together with Fejér and
//!   asymptotic-regularity diagnostics over recorded traces.
//! * [`harness`]: seeded, stratified property suites and the scalar distance oracle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod operators;
pub mod sets;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{axpy, inner, norm, Point};
pub use operators::{
    BikIntrepidOperator, CompositionOperator, GeometricIntrepidOperator, OperatorKind,
    RelaxedProjector, StepOperator, ValiantOperator,
};
pub use sets::{Ball, BoxSet, ConvexSet, Enlargement, Halfspace, Hyperplane, Hyperslab};
pub use solver::{
    arm_solve, asymptotic_regularity_check, cyclic_solve, fejer_check, vpm_solve, Constraint,
    CyclicControl, FeasibilityProblem, IterRecord, RunStatus, RunTrace, SnapshotPolicy,
    SolverConfig, TauSchedule,
};
