//! Closed-form eigenfunctions and critical loads of the clamped straight
//! twisted state.

use crate::error::{Result, RodError};
use crate::field::Perturbation;
use crate::grid::Grid;
use crate::params::RodParams;
use std::f64::consts::PI;

/// The two orthogonal eigenfunction families of mode `m` at the clamped
/// straight state, sampled at the grid nodes, and their shared eigenvalue
/// `lambda_m = A m^2 pi^2 - pi^2 M^2 C^2 / A - F L^2`.
///
/// The families are `sin(m pi s) (cos ks, sin ks)` and
/// `sin(m pi s) (-sin ks, cos ks)` with `k = pi M C / A`; both have zero
/// twist component. The load must act along the x axis.
pub fn analytic_modes_trivial(
    grid: &Grid,
    m: u32,
    params: &RodParams,
) -> Result<(Perturbation, Perturbation, f64)> {
    if m == 0 {
        return Err(RodError::validation("m", "mode index starts at 1"));
    }
    if params.force[1] != 0.0 || params.force[2] != 0.0 {
        return Err(RodError::validation(
            "params.force",
            "straight-state analysis carries the load along the x axis only",
        ));
    }
    let a = params.bend_a;
    let c = params.twist_c;
    let k = PI * params.twist_m * c / a;
    let m_f = f64::from(m);
    let n = grid.n_nodes();
    let mut first = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut second = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let s = grid.node(i);
        let envelope = (m_f * PI * s).sin();
        let (sk, ck) = (k * s).sin_cos();
        first.0.push(envelope * ck);
        first.1.push(envelope * sk);
        second.0.push(-envelope * sk);
        second.1.push(envelope * ck);
    }
    let zeros = vec![0.0; n];
    let eigenvalue = a * m_f * m_f * PI * PI
        - PI * PI * params.twist_m * params.twist_m * c * c / a
        - params.force_l2()[0];
    Ok((
        Perturbation::new(first.0, first.1, zeros.clone())?,
        Perturbation::new(second.0, second.1, zeros)?,
        eigenvalue,
    ))
}

/// Loads at which the clamped straight state sheds stability mode by mode:
/// `F_m = (A m^2 pi^2 - pi^2 M^2 C^2 / A) / L^2` for `m = 1..=m_max`,
/// ascending.
pub fn critical_forces(params: &RodParams, m_max: u32) -> Result<Vec<f64>> {
    if m_max == 0 {
        return Err(RodError::validation("m_max", "needs at least one mode"));
    }
    let a = params.bend_a;
    let c = params.twist_c;
    let l2 = params.length_l * params.length_l;
    let twist_term = PI * PI * params.twist_m * params.twist_m * c * c / a;
    Ok((1..=m_max)
        .map(|m| {
            let m_f = f64::from(m);
            (a * m_f * m_f * PI * PI - twist_term) / l2
        })
        .collect())
}
