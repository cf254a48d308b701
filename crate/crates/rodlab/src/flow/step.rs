//! Implicit stepping of the L2 gradient flow and the driver that marches it
//! to stationarity.
//!
//! One step solves `M v + dV(theta + dt v) = 0` for the free-dof velocity
//! `v` by Newton with a backtracking line search, so the update is the fully
//! implicit one. A rejected solve (or an energy increase, which the implicit
//! update rules out up to solver tolerance) halves `dt` for this step only;
//! the next step starts again from the nominal value.

use nalgebra::{DMatrix, DVector};

use crate::boundary::{BoundarySpec, DofMap, IsoConstraint};
use crate::energy;
use crate::error::{Result, RodError};
use crate::field::EulerField;
use crate::linalg::BandedSym;
use crate::mass::{self, MassKind};
use crate::params::RodParams;
use crate::stability;

use super::{constraint_residual, FlowConfig, FlowOutcome, FlowState, StepRecord, Termination};

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_ITERS: usize = 60;
const LINE_SEARCH_HALVINGS: usize = 30;
const DT_HALVINGS: usize = 10;
const ENERGY_SLACK: f64 = 1e-12;

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Solve the implicit velocity equation at time step `dt`. Returns the
/// free-dof velocity (global ordering) together with the displaced field
/// `theta + dt v`.
fn newton_velocity(
    field: &EulerField,
    params: &RodParams,
    dof_map: &DofMap,
    pos_of: &[usize],
    mass_nm: &BandedSym,
    kind: MassKind,
    dt: f64,
) -> Result<(Vec<f64>, EulerField)> {
    let dim = dof_map.dim();
    let residual = |v: &[f64]| -> Result<(Vec<f64>, EulerField)> {
        let moved = stability::apply_update(field, dof_map, v, dt)?;
        let mut res = stability::gradient_free(&moved, params, dof_map);
        let mv = mass::apply_mass(dof_map, kind, v);
        for (r, m) in res.iter_mut().zip(&mv) {
            *r += m;
        }
        Ok((res, moved))
    };

    let mut v = vec![0.0; dim];
    let (mut res, mut moved) = residual(&v)?;
    let mut res_norm = max_norm(&res);
    for _ in 0..NEWTON_ITERS {
        if res_norm <= NEWTON_TOL {
            return Ok((v, moved));
        }
        let hess = stability::assemble_banded(&moved, params, dof_map, pos_of);
        let jac = mass_nm.add_scaled(&hess, dt);
        let ldlt = jac.ldlt().map_err(|e| {
            RodError::numerical(
                "flow.velocity_solve",
                format!("implicit Jacobian factorization failed: {e}"),
            )
        })?;
        let mut rhs = vec![0.0; dim];
        for g in 0..dim {
            rhs[pos_of[g]] = -res[g];
        }
        ldlt.solve_in_place(&mut rhs);
        let mut step = vec![0.0; dim];
        for g in 0..dim {
            step[g] = rhs[pos_of[g]];
        }

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..LINE_SEARCH_HALVINGS {
            let trial: Vec<f64> = v.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            // A polar-guard violation along the way just shortens the step.
            if let Ok((r, m)) = residual(&trial) {
                let norm = max_norm(&r);
                if norm <= NEWTON_TOL || norm < (1.0 - 1e-4 * t) * res_norm {
                    v = trial;
                    res = r;
                    moved = m;
                    res_norm = norm;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(RodError::numerical(
                "flow.velocity_solve",
                format!("line search stalled at residual {res_norm:.3e}"),
            ));
        }
    }
    if res_norm <= NEWTON_TOL {
        Ok((v, moved))
    } else {
        Err(RodError::numerical(
            "flow.velocity_solve",
            format!("no convergence within {NEWTON_ITERS} iterations, residual {res_norm:.3e}"),
        ))
    }
}

/// One attempt at time step `dt`: velocity solve, then (with constraints
/// active) the multiplier correction along the explicit constraint-gradient
/// velocities. Returns the new field, its energy, and the multipliers.
#[allow(clippy::too_many_arguments)]
fn attempt(
    field: &EulerField,
    params: &RodParams,
    dof_map: &DofMap,
    pos_of: &[usize],
    mass_nm: &BandedSym,
    config: &FlowConfig,
    constraints: &[IsoConstraint],
    warm_multipliers: &[f64],
    dt: f64,
) -> Result<(EulerField, f64, Vec<f64>)> {
    let kind = config.mass_matrix;
    let (v_flow, moved) = newton_velocity(field, params, dof_map, pos_of, mass_nm, kind, dt)?;
    if constraints.is_empty() {
        let e_new = energy::energy(&moved, params);
        return Ok((moved, e_new, Vec::new()));
    }

    // Riesz lifts of the (negated) constraint gradients at the current
    // field; the multipliers scale these directions so the step lands back
    // on the constraint set.
    let v_iso: Vec<Vec<f64>> = constraints
        .iter()
        .map(|c| {
            let nodal = super::constraint_gradient_nodal(field, c.axis);
            let flat = dof_map.gather(&nodal);
            let mut lifted = mass::solve_mass(dof_map, kind, &flat);
            for x in &mut lifted {
                *x = -*x;
            }
            lifted
        })
        .collect();

    let combine = |lambda: &[f64]| -> Result<EulerField> {
        let mut v_tot = v_flow.clone();
        for (dir, &l) in v_iso.iter().zip(lambda) {
            for (t, d) in v_tot.iter_mut().zip(dir) {
                *t += l * d;
            }
        }
        stability::apply_update(field, dof_map, &v_tot, dt)
    };
    let rho = |lambda: &[f64]| -> Result<Vec<f64>> {
        let moved = combine(lambda)?;
        Ok(constraints
            .iter()
            .map(|c| constraint_residual(&moved, c))
            .collect())
    };

    let r = constraints.len();
    let mut lambda = if warm_multipliers.len() == r {
        warm_multipliers.to_vec()
    } else {
        vec![0.0; r]
    };
    let mut rho_val = rho(&lambda)?;
    let mut iters = 0;
    while max_norm(&rho_val) > config.constraint_newton_tol {
        if iters >= config.constraint_newton_max_iters {
            return Err(RodError::numerical(
                "flow.constrained_step",
                format!(
                    "multiplier iteration stalled at violation {:.3e} after {} iterations",
                    max_norm(&rho_val),
                    iters
                ),
            ));
        }
        iters += 1;
        let mut jac = DMatrix::zeros(r, r);
        for j in 0..r {
            let delta = 1e-6 * lambda[j].abs().max(1.0);
            let mut up = lambda.clone();
            up[j] += delta;
            let mut down = lambda.clone();
            down[j] -= delta;
            let rho_up = rho(&up)?;
            let rho_down = rho(&down)?;
            for i in 0..r {
                jac[(i, j)] = (rho_up[i] - rho_down[i]) / (2.0 * delta);
            }
        }
        let rhs = DVector::from_iterator(r, rho_val.iter().map(|x| -x));
        let step = jac.lu().solve(&rhs).ok_or_else(|| {
            RodError::numerical("flow.constrained_step", "singular multiplier Jacobian")
        })?;
        for (l, s) in lambda.iter_mut().zip(step.iter()) {
            *l += s;
        }
        rho_val = rho(&lambda)?;
    }

    let corrected = combine(&lambda)?;
    let e_new = energy::energy(&corrected, params);
    Ok((corrected, e_new, lambda))
}

fn advance(
    state: &FlowState,
    field: EulerField,
    energy_new: f64,
    dt_used: f64,
    multipliers: Vec<f64>,
    constraints: &[IsoConstraint],
) -> FlowState {
    let residuals = constraints
        .iter()
        .map(|c| constraint_residual(&field, c))
        .collect();
    let mut history = state.energy_history.clone();
    history.push(energy_new);
    FlowState {
        step_index: state.step_index + 1,
        time: state.time + dt_used,
        field,
        multipliers,
        energy_history: history,
        constraint_residuals: residuals,
    }
}

fn step_impl(
    state: &FlowState,
    params: &RodParams,
    bcs: &BoundarySpec,
    config: &FlowConfig,
    constraints: &[IsoConstraint],
) -> Result<FlowState> {
    config.validate()?;
    let dof_map = bcs.dof_map(state.field.grid());
    if dof_map.dim() == 0 {
        return Err(RodError::validation(
            "boundary",
            "no free degrees of freedom to evolve",
        ));
    }
    let order = dof_map.node_major_order();
    let mut pos_of = vec![0usize; dof_map.dim()];
    for (pos, &g) in order.iter().enumerate() {
        pos_of[g] = pos;
    }
    let mass_nm = mass::mass_banded(&dof_map, config.mass_matrix, &order);

    let e_old = energy::energy(&state.field, params);
    let mut dt = config.dt;
    let mut last_failure = String::new();
    for _ in 0..=DT_HALVINGS {
        match attempt(
            &state.field,
            params,
            &dof_map,
            &pos_of,
            &mass_nm,
            config,
            constraints,
            &state.multipliers,
            dt,
        ) {
            Ok((moved, e_new, lambda)) => {
                if e_new <= e_old + ENERGY_SLACK {
                    return Ok(advance(state, moved, e_new, dt, lambda, constraints));
                }
                last_failure = format!("dt={dt:.3e}: energy rose by {:.3e}", e_new - e_old);
            }
            Err(e) => last_failure = format!("dt={dt:.3e}: {e}"),
        }
        dt *= 0.5;
    }
    Err(RodError::numerical(
        "flow.step",
        format!(
            "step {} rejected after {DT_HALVINGS} dt halvings ({last_failure})",
            state.step_index + 1
        ),
    ))
}

/// One implicit step of the unconstrained flow. Dirichlet angles stay put;
/// the step size shrinks by halving (up to ten times) when the velocity
/// solve fails or the energy fails to decrease, and the error after the last
/// halving carries the solver diagnostics.
pub fn implicit_step(
    state: &FlowState,
    params: &RodParams,
    bcs: &BoundarySpec,
    config: &FlowConfig,
) -> Result<FlowState> {
    step_impl(state, params, bcs, config, &[])
}

/// One implicit step that restores the given displacement constraints by a
/// Newton iteration on the scalar multipliers. With an empty constraint set
/// this is exactly [`implicit_step`].
pub fn constrained_step(
    state: &FlowState,
    params: &RodParams,
    bcs: &BoundarySpec,
    config: &FlowConfig,
    constraints: &[IsoConstraint],
) -> Result<FlowState> {
    step_impl(state, params, bcs, config, constraints)
}

/// March the flow until the per-step energy decrement falls below
/// `config.tol`, the step budget runs out, or a step fails. A step failure
/// is reported as a [`Termination::StepFailure`] outcome that still carries
/// the trajectory up to the last accepted step. `snapshot_every = Some(k)`
/// records the field at step 0, every k-th accepted step, and the final one.
pub fn run_flow(
    initial: EulerField,
    params: &RodParams,
    bcs: &BoundarySpec,
    config: &FlowConfig,
    constraints: &[IsoConstraint],
    snapshot_every: Option<usize>,
) -> Result<FlowOutcome> {
    config.validate()?;
    bcs.check_compatible(&initial, 1e-9)?;
    if snapshot_every == Some(0) {
        return Err(RodError::validation(
            "snapshot_every",
            "snapshot cadence must be positive when given",
        ));
    }

    let mut state = FlowState::initial(initial, params, constraints);
    let start_tol = (100.0 * config.constraint_newton_tol).max(1e-6);
    for (constraint, residual) in constraints.iter().zip(&state.constraint_residuals) {
        if residual.abs() > start_tol {
            return Err(RodError::validation(
                "constraints",
                format!(
                    "initial state violates the {} displacement constraint by {residual:.3e}",
                    constraint.axis.label()
                ),
            ));
        }
    }

    let mut records = vec![StepRecord {
        step: 0,
        time: 0.0,
        energy: state.energy(),
        residuals: state.constraint_residuals.clone(),
    }];
    let mut snapshots = Vec::new();
    if snapshot_every.is_some() {
        snapshots.push((0, state.field.clone()));
    }

    let mut termination = Termination::MaxSteps;
    for _ in 0..config.max_steps {
        let e_prev = state.energy();
        state = match constrained_step(&state, params, bcs, config, constraints) {
            Ok(next) => next,
            Err(e) => {
                termination = Termination::StepFailure(e.to_string());
                break;
            }
        };
        records.push(StepRecord {
            step: state.step_index,
            time: state.time,
            energy: state.energy(),
            residuals: state.constraint_residuals.clone(),
        });
        if let Some(k) = snapshot_every {
            if state.step_index % k == 0 {
                snapshots.push((state.step_index, state.field.clone()));
            }
        }
        if (state.energy() - e_prev).abs() < config.tol {
            termination = Termination::Converged;
            break;
        }
    }

    if snapshot_every.is_some() && snapshots.last().map(|(s, _)| *s) != Some(state.step_index) {
        snapshots.push((state.step_index, state.field.clone()));
    }
    Ok(FlowOutcome {
        state,
        records,
        snapshots,
        termination,
    })
}
