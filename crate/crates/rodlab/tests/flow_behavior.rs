//! Long-run behavior of the dissipative flow: unstable states depart,
//! stable states stay put, and constrained runs honor their closure
//! integrals at every accepted step.

use rodlab::equilibria::{perturb, soliton_state, trivial_state, SolitonSpec};
use rodlab::stability::analytic_modes_trivial;
use rodlab::{
    helix_state, run_flow, BoundarySpec, FlowConfig, Grid, HelixSpec, IsoConstraint, RodParams,
    Termination,
};
use std::f64::consts::PI;

fn max_theta_deviation(field: &rodlab::EulerField) -> f64 {
    field
        .theta()
        .iter()
        .map(|t| (t - 0.5 * PI).abs())
        .fold(0.0, f64::max)
}

fn max_angle_shift(a: &rodlab::EulerField, b: &rodlab::EulerField) -> f64 {
    let mut worst = 0.0f64;
    for which in 0..3 {
        for (x, y) in a.angle(which).iter().zip(b.angle(which)) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}

#[test]
fn perturbed_unstable_state_departs_monotonically() {
    let grid = Grid::unit(100).unwrap();
    let params = RodParams::new(1.0, 1.0, 1.0, [10.0, 0.0, 0.0], 1.0).unwrap();
    let base = trivial_state(&grid, 1.0).unwrap();
    let (mode, _, _) = analytic_modes_trivial(&grid, 1, &params).unwrap();
    let eps = 1e-3;
    let start = perturb(&base, &mode, eps).unwrap();
    let bcs = BoundarySpec::clamped_to(&base);

    let config = FlowConfig {
        dt: 1e-3,
        tol: 1e-14,
        max_steps: 150,
        ..FlowConfig::default()
    };
    let outcome = run_flow(start, &params, &bcs, &config, &[], None).unwrap();

    // Record bookkeeping: one record per accepted step plus the initial one,
    // indices consecutive, time marching forward.
    assert_eq!(outcome.records[0].step, 0);
    for pair in outcome.records.windows(2) {
        assert_eq!(pair[1].step, pair[0].step + 1);
        assert!(pair[1].time > pair[0].time);
        assert!(
            pair[1].energy < pair[0].energy,
            "energy rose at step {}",
            pair[1].step
        );
    }
    assert!(
        max_theta_deviation(&outcome.state.field) > 10.0 * eps,
        "unstable state failed to depart: {}",
        max_theta_deviation(&outcome.state.field)
    );
}

#[test]
fn stable_straight_state_is_a_numerical_fixed_point() {
    let grid = Grid::unit(200).unwrap();
    let params = RodParams::new(1.0, 0.75, 1.0, [2.0, 0.0, 0.0], 1.0).unwrap();
    let start = trivial_state(&grid, 1.0).unwrap();
    let bcs = BoundarySpec::clamped_to(&start);
    let config = FlowConfig {
        dt: 1e-3,
        tol: 1e-15,
        max_steps: 50,
        ..FlowConfig::default()
    };
    let outcome = run_flow(start.clone(), &params, &bcs, &config, &[], None).unwrap();
    let steps = outcome.state.step_index.max(1) as f64;
    let drift = max_angle_shift(&start, &outcome.state.field) / steps;
    assert!(drift < 1e-8, "drift per step {drift}");
}

#[test]
fn stable_helix_is_a_numerical_fixed_point() {
    let grid = Grid::unit(400).unwrap();
    let params = RodParams::new(1.0, 0.75, 1.0, [0.0; 3], 1.0).unwrap();
    let spec = HelixSpec::new(1.0, 0.3, params.clone()).unwrap();
    let (start, bcs) = helix_state(&grid, &spec).unwrap();
    let config = FlowConfig {
        dt: 1e-3,
        tol: 1e-15,
        max_steps: 30,
        ..FlowConfig::default()
    };
    let outcome = run_flow(start.clone(), &params, &bcs, &config, &[], None).unwrap();
    let steps = outcome.state.step_index.max(1) as f64;
    let drift = max_angle_shift(&start, &outcome.state.field) / steps;
    assert!(drift < 1e-8, "drift per step {drift}");
}

#[test]
fn overwound_helix_sheds_energy() {
    let grid = Grid::unit(200).unwrap();
    let params = RodParams::new(1.0, 0.75, 1.0, [0.0; 3], 1.0).unwrap();
    let spec = HelixSpec::new(1.0, 1.2, params.clone()).unwrap();
    let (base, bcs) = helix_state(&grid, &spec).unwrap();
    let witness = rodlab::helix_witness_direction(base.n_nodes(), &spec);
    let start = perturb(&base, &witness, 1e-2).unwrap();

    let config = FlowConfig {
        dt: 2e-3,
        tol: 1e-12,
        max_steps: 300,
        ..FlowConfig::default()
    };
    let outcome = run_flow(start, &params, &bcs, &config, &[], None).unwrap();
    for pair in outcome.records.windows(2) {
        assert!(pair[1].energy < pair[0].energy + 1e-12);
    }
    let drop = outcome.records[0].energy - outcome.records.last().unwrap().energy;
    assert!(drop > 1e-3, "energy only dropped by {drop}");
}

#[test]
fn constrained_soliton_flow_holds_the_closure_integrals() {
    let spec = SolitonSpec::new(1.0, 10.0, 1.5).unwrap();
    let grid = Grid::symmetric(10.0, 100).unwrap();
    let (start, bcs, force) = soliton_state(&grid, &spec).unwrap();
    let params = RodParams::new(1.0, 0.75, 10.0, force, 0.0).unwrap();
    let constraints: Vec<IsoConstraint> = bcs
        .iso_constraints
        .iter()
        .map(|axis| IsoConstraint::fixing(*axis, &start))
        .collect();

    let config = FlowConfig {
        dt: 2e-4,
        tol: 1e-14,
        max_steps: 25,
        ..FlowConfig::default()
    };
    let outcome = run_flow(start, &params, &bcs, &config, &constraints, Some(10)).unwrap();
    assert!(!matches!(outcome.termination, Termination::StepFailure(_)));

    let scale = outcome.records[0].energy.abs().max(1.0);
    for record in &outcome.records {
        for (residual, constraint) in record.residuals.iter().zip(&constraints) {
            assert!(
                residual.abs() <= config.constraint_newton_tol,
                "step {}: {} residual {residual}",
                record.step,
                constraint.axis
            );
        }
    }
    for pair in outcome.records.windows(2) {
        assert!(pair[1].energy <= pair[0].energy + 1e-12 * scale);
    }

    // Snapshot cadence: the initial field plus every tenth step.
    let indices: Vec<usize> = outcome.snapshots.iter().map(|(i, _)| *i).collect();
    assert!(indices.contains(&0));
    for (index, field) in &outcome.snapshots {
        assert_eq!(*index % 10, 0);
        assert_eq!(field.n_nodes(), 101);
    }
}
