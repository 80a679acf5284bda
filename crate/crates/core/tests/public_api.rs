use std::sync::Arc;

use valiant_core::{
    arm_solve, fejer_check, vpm_solve, Ball, BoxSet, CompositionOperator, Constraint, ConvexSet,
    Enlargement, FeasibilityProblem, Halfspace, Hyperslab, OperatorKind, Point, SnapshotPolicy,
    SolverConfig, StepOperator, TauSchedule, ValiantOperator,
};

fn p(v: &[f64]) -> Point {
    Point::new(v.to_vec()).unwrap()
}

fn unit_ball() -> Arc<dyn ConvexSet> {
    Arc::new(Ball::new(p(&[0.0, 0.0]), 1.0).unwrap())
}

#[test]
fn valiant_step_from_outside_a_ball() {
    // d = 2, gamma = (1/2)(1 - 1/4) = 3/8, x + gamma (P(x) - x) = 3 - 3/4.
    let v = ValiantOperator::new(unit_ball(), 1.0, 1.0).unwrap();
    assert_eq!(v.apply(&p(&[3.0, 0.0])), p(&[2.25, 0.0]));
    assert_eq!(v.apply(&p(&[1.5, 0.0])), p(&[1.5, 0.0]));
}

#[test]
fn enlarged_box_projection() {
    let square: Arc<dyn ConvexSet> =
        Arc::new(BoxSet::new(p(&[-1.0, -1.0]), p(&[1.0, 1.0])).unwrap());
    let grown = Enlargement::new(square, 1.0).unwrap();
    assert_eq!(grown.project(&p(&[3.0, 0.5])), p(&[2.0, 0.5]));
    assert!((grown.distance(&p(&[3.0, 0.5])) - 1.0).abs() < 1e-15);
    assert!(grown.contains(&p(&[1.5, -1.5]), 1e-12));
}

#[test]
fn composition_matches_sequential_application() {
    let kinds = [
        OperatorKind::Valiant,
        OperatorKind::Relaxed,
        OperatorKind::BikIntrepid,
    ];
    let ops: Vec<Arc<dyn StepOperator>> = kinds
        .iter()
        .map(|k| k.build(unit_ball(), 0.5, 1.2).unwrap())
        .collect();
    let composed = CompositionOperator::new(ops.clone()).unwrap();
    let x = p(&[4.0, -3.0]);
    let manual = ops.iter().fold(x.clone(), |acc, op| op.apply(&acc));
    assert_eq!(composed.apply(&x), manual);
}

#[test]
fn operator_kinds_parse_by_name() {
    for kind in OperatorKind::ALL {
        assert_eq!(kind.name().parse::<OperatorKind>().unwrap(), kind);
    }
}

#[test]
fn vpm_on_a_halfspace_and_a_ball() {
    let half: Arc<dyn ConvexSet> = Arc::new(Halfspace::new(p(&[1.0, 1.0]), 0.0).unwrap());
    let problem = FeasibilityProblem::new(vec![
        Constraint::new(half, 0.1).unwrap(),
        Constraint::new(unit_ball(), 0.1).unwrap(),
    ])
    .unwrap();
    let z = p(&[-0.5, -0.5]);
    let cfg = SolverConfig {
        snapshots: SnapshotPolicy::EveryIteration,
        fejer_reference: Some(z.clone()),
        ..SolverConfig::default()
    };
    let (x, trace) = vpm_solve(&problem, &cfg, &p(&[6.0, 5.0])).unwrap();
    assert!(trace.status.is_converged());
    assert!(problem.residual(&x) <= 1e-8);
    assert!(fejer_check(&trace, &z).unwrap());
    assert_eq!(
        trace
            .records
            .iter()
            .map(|r| r.index)
            .take(4)
            .collect::<Vec<_>>(),
        [1, 2, 1, 2]
    );
}

#[test]
fn arm_matches_vpm_on_slabs() {
    let slabs = vec![
        Hyperslab::new(p(&[1.0, 2.0, 0.0]), -1.0, 1.0).unwrap(),
        Hyperslab::new(p(&[0.0, 1.0, -1.0]), 2.0, 2.5).unwrap(),
        Hyperslab::new(p(&[3.0, 0.0, 1.0]), 0.0, 4.0).unwrap(),
    ];
    let cfg = SolverConfig {
        tau: TauSchedule::Constant(1.6),
        snapshots: SnapshotPolicy::EveryIteration,
        ..SolverConfig::default()
    };
    let x0 = p(&[9.0, -7.0, 3.0]);
    let (xa, arm) = arm_solve(&slabs, &cfg, &x0).unwrap();
    let problem = FeasibilityProblem::from_slabs(&slabs).unwrap();
    let (xv, vpm) = vpm_solve(&problem, &cfg, &x0).unwrap();
    assert!(arm.status.is_converged());
    assert_eq!(arm.snapshots.len(), vpm.snapshots.len());
    for ((_, a), (_, b)) in arm.snapshots.iter().zip(&vpm.snapshots) {
        assert!(a.distance(b) <= 1e-12);
    }
    assert!(xa.distance(&xv) <= 1e-12);
}
