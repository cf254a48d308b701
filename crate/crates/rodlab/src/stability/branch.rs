//! Post-buckling branches of the clamped straight state: Newton solution of
//! the discrete equilibrium equations and natural-parameter continuation in
//! the axial load.

use super::hessian::{assemble_banded, gradient_free};
use super::modes::{analytic_modes_trivial, critical_forces};
use crate::boundary::{BoundarySpec, DofMap};
use crate::equilibria::{perturb, trivial_state};
use crate::error::{Result, RodError};
use crate::field::EulerField;
use crate::grid::Grid;
use crate::params::RodParams;
use std::f64::consts::PI;

/// One converged equilibrium along a branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    /// Axial load at this point.
    pub f: f64,
    pub field: EulerField,
    /// Largest polar deviation from the straight state, `max |theta - pi/2|`.
    pub amplitude: f64,
}

/// A continuation run; `reached_end` is false when step halving bottomed out
/// and the branch stops early.
#[derive(Debug, Clone)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub reached_end: bool,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub(crate) fn apply_update(
    field: &EulerField,
    dof_map: &DofMap,
    delta: &[f64],
    scale: f64,
) -> Result<EulerField> {
    let nodal = dof_map.scatter(delta);
    let add = |base: &[f64], d: &Vec<f64>| -> Vec<f64> {
        base.iter().zip(d.iter()).map(|(b, x)| b + scale * x).collect()
    };
    EulerField::new(
        field.grid().clone(),
        add(field.theta(), &nodal[0]),
        add(field.phi(), &nodal[1]),
        add(field.psi(), &nodal[2]),
    )
}

/// Full-step Newton iteration on the free-dof gradient of the discrete
/// energy. No residual-descent safeguard: just beyond a bifurcation the
/// iterates ride a nearly flat valley where the residual norm oscillates
/// before the quadratic tail locks in, and insisting on monotone decrease
/// stalls the iteration (or worse, walks it back to the straight state,
/// which is also a residual minimum). Steps are only shortened when they
/// leave the polar chart, and a singular factorization retries with a tiny
/// diagonal shift. Converges to the equilibrium in whose basin `initial`
/// lies; Dirichlet values are taken from `initial` itself.
pub fn newton_equilibrium(
    initial: &EulerField,
    params: &RodParams,
    bcs: &BoundarySpec,
    tol: f64,
    max_iter: usize,
) -> Result<EulerField> {
    let dof_map = bcs.dof_map(initial.grid());
    let order = dof_map.node_major_order();
    let mut pos_of = vec![0usize; order.len()];
    for (pos, &g) in order.iter().enumerate() {
        pos_of[g] = pos;
    }

    let mut field = initial.clone();
    let mut g = gradient_free(&field, params, &dof_map);
    let mut g_norm = max_norm(&g);
    for _ in 0..max_iter {
        if g_norm <= tol {
            return Ok(field);
        }
        let mut base = assemble_banded(&field, params, &dof_map, &pos_of);
        let factor = match base.ldlt() {
            Ok(f) => f,
            Err(_) => {
                // An exactly singular pivot; nudge off it by a relative shift.
                let diag_scale = (0..base.dim())
                    .map(|i| base.get(i, i).abs())
                    .fold(0.0f64, f64::max)
                    .max(1e-300);
                base.shift_diag(1e-12 * diag_scale);
                base.ldlt().map_err(|_| {
                    RodError::numerical("newton", "singular Jacobian despite diagonal shift")
                })?
            }
        };
        let mut rhs = vec![0.0; order.len()];
        for (pos, &global) in order.iter().enumerate() {
            rhs[pos] = -g[global];
        }
        factor.solve_in_place(&mut rhs);
        let mut delta = vec![0.0; order.len()];
        for (pos, &global) in order.iter().enumerate() {
            delta[global] = rhs[pos];
        }
        // A polar-guard violation means the step left the chart: shorten it
        // until the update is admissible again.
        let mut scale = 1.0;
        let candidate = loop {
            match apply_update(&field, &dof_map, &delta, scale) {
                Ok(c) => break c,
                Err(_) => {
                    scale *= 0.5;
                    if scale < 1e-8 {
                        return Err(RodError::numerical(
                            "newton",
                            "step pinned against the polar guard",
                        ));
                    }
                }
            }
        };
        field = candidate;
        g = gradient_free(&field, params, &dof_map);
        g_norm = max_norm(&g);
    }
    if g_norm <= tol {
        Ok(field)
    } else {
        Err(RodError::numerical(
            "newton",
            format!("no convergence, gradient norm {g_norm:.3e} after {max_iter} iterations"),
        ))
    }
}

fn amplitude_of(field: &EulerField) -> f64 {
    field
        .theta()
        .iter()
        .fold(0.0f64, |m, t| m.max((t - PI / 2.0).abs()))
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_ITERS: usize = 200;
/// Branch points closer to the straight state than this have collapsed back
/// onto the trivial branch.
const COLLAPSE_AMPLITUDE: f64 = 1e-6;

/// Trace the `m`-th buckled branch of the clamped problem from
/// `f_range.0` (which must lie above the critical load of mode `m`) up to
/// `f_range.1`, stepping the load by `step`. Newton failures and collapses
/// onto the straight state halve the step; if it shrinks below `step/1024`
/// the partial branch is returned with `reached_end = false`.
pub fn branch_continuation(
    grid: &Grid,
    params: &RodParams,
    m: u32,
    f_range: (f64, f64),
    step: f64,
) -> Result<Branch> {
    if params.force[1] != 0.0 || params.force[2] != 0.0 {
        return Err(RodError::validation(
            "params.force",
            "branch continuation varies the load along the x axis only",
        ));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(RodError::validation("step", "must be positive and finite"));
    }
    if f_range.1 < f_range.0 {
        return Err(RodError::validation("f_range", "must be ordered"));
    }
    let f_crit = *critical_forces(params, m)?.last().expect("m >= 1 checked");
    if f_range.0 <= f_crit {
        return Err(RodError::validation(
            "f_range",
            format!("must start above the critical load {f_crit:.6} of mode {m}"),
        ));
    }

    let straight = trivial_state(grid, params.twist_m)?;
    let bcs = BoundarySpec::clamped_to(&straight);
    let dof_map = bcs.dof_map(grid);
    let (mode, _, _) = analytic_modes_trivial(grid, m, params)?;

    // Seed amplitude: the mode-direction derivative of the energy changes
    // sign between the straight state and beyond the buckled one; bisect it.
    let at_force = |f: f64| params.clone().with_force([f, 0.0, 0.0]);
    let params0 = at_force(f_range.0);
    let mode_flat = {
        let nodal = [mode.alpha.clone(), mode.beta.clone(), mode.gamma.clone()];
        dof_map.gather(&nodal)
    };
    let slope = |a: f64| -> Result<f64> {
        let state = perturb(&straight, &mode, a)?;
        let g = gradient_free(&state, &params0, &dof_map);
        Ok(g.iter().zip(mode_flat.iter()).map(|(x, y)| x * y).sum())
    };
    let mut a_lo = 1e-4;
    let sign_lo = slope(a_lo)?.signum();
    let mut a_hi = 0.05;
    while slope(a_hi)?.signum() == sign_lo {
        a_hi *= 2.0;
        if a_hi > 4.0 {
            return Err(RodError::numerical(
                "branch seed",
                "no sign change of the mode-direction slope up to amplitude 4",
            ));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (a_lo + a_hi);
        if slope(mid)?.signum() == sign_lo {
            a_lo = mid;
        } else {
            a_hi = mid;
        }
    }
    let seed = perturb(&straight, &mode, 0.5 * (a_lo + a_hi))?;
    let first = newton_equilibrium(&seed, &params0, &bcs, NEWTON_TOL, NEWTON_ITERS)?;
    if amplitude_of(&first) < COLLAPSE_AMPLITUDE {
        return Err(RodError::numerical(
            "branch seed",
            "seed collapsed onto the straight state",
        ));
    }

    let mut points = vec![BranchPoint {
        f: f_range.0,
        amplitude: amplitude_of(&first),
        field: first,
    }];
    let mut f = f_range.0;
    let min_step = step / 1024.0;
    let mut current_step = step;
    while f < f_range.1 - 1e-12 {
        let next_f = (f + current_step).min(f_range.1);
        let predictor = &points.last().expect("seeded").field;
        let attempt = newton_equilibrium(
            predictor,
            &at_force(next_f),
            &bcs,
            NEWTON_TOL,
            NEWTON_ITERS,
        );
        match attempt {
            Ok(field) if amplitude_of(&field) >= COLLAPSE_AMPLITUDE => {
                points.push(BranchPoint {
                    f: next_f,
                    amplitude: amplitude_of(&field),
                    field,
                });
                f = next_f;
                current_step = step;
            }
            _ => {
                current_step *= 0.5;
                if current_step < min_step {
                    return Ok(Branch {
                        points,
                        reached_end: false,
                    });
                }
            }
        }
    }
    Ok(Branch {
        points,
        reached_end: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_the_first_critical_load_newton_returns_to_straight() {
        let grid = Grid::unit(60).unwrap();
        let params = RodParams::unloaded(1.0, 0.75, 1.0)
            .unwrap()
            .with_force([3.0, 0.0, 0.0]);
        let straight = trivial_state(&grid, 1.0).unwrap();
        let bcs = BoundarySpec::clamped_to(&straight);
        let (mode, _, _) = analytic_modes_trivial(&grid, 1, &params).unwrap();
        let seed = perturb(&straight, &mode, 0.05).unwrap();
        let solved = newton_equilibrium(&seed, &params, &bcs, 1e-12, 60).unwrap();
        assert!(amplitude_of(&solved) <= 1e-8);
    }

    #[test]
    fn first_branch_grows_from_the_critical_load() {
        let grid = Grid::unit(80).unwrap();
        let params = RodParams::unloaded(1.0, 0.75, 1.0).unwrap();
        let f1 = critical_forces(&params, 1).unwrap()[0];
        let step = 0.02 * f1;
        let branch =
            branch_continuation(&grid, &params, 1, (f1 + step, f1 + 10.0 * step), step).unwrap();
        assert!(branch.reached_end);
        assert!(branch.points.len() >= 10);
        // Amplitudes grow monotonically just above onset.
        for pair in branch.points.windows(2) {
            assert!(pair[1].amplitude > pair[0].amplitude);
        }
    }

    #[test]
    fn starting_below_the_critical_load_is_rejected() {
        let grid = Grid::unit(40).unwrap();
        let params = RodParams::unloaded(1.0, 0.75, 1.0).unwrap();
        let f1 = critical_forces(&params, 1).unwrap()[0];
        assert!(branch_continuation(&grid, &params, 1, (f1 - 1.0, f1 + 1.0), 0.1).is_err());
    }
}
