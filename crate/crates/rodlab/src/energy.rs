//! Discrete rod energy, its exact nodal gradient and Hessian cells, and
//! strong-form equilibrium residuals.
//!
//! The energy density is
//! `(A/2)(theta_s^2 + phi_s^2 sin^2 theta) + (C/2)(psi_s + phi_s cos theta)^2
//!  + F L^2 . d3`,
//! integrated with the composite midpoint rule: derivatives of the affine
//! interpolant are exact cell-wise constants, angle values enter through
//! midpoint averages. All derivatives below are with respect to the nodal
//! values of that quadrature-discrete functional, so gradient and Hessian are
//! exact derivatives of `energy`, not re-discretizations.

use crate::field::EulerField;
use crate::params::RodParams;

/// Per-cell quantities: derivative constants `u = theta_s`, `v = phi_s`,
/// `w = psi_s` and midpoint averages `p = theta`, `q = phi`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cell {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub p: f64,
    pub q: f64,
}

pub(crate) fn cell_at(field: &EulerField, c: usize) -> Cell {
    let h = field.grid().h();
    let (theta, phi, psi) = (field.theta(), field.phi(), field.psi());
    Cell {
        u: (theta[c + 1] - theta[c]) / h,
        v: (phi[c + 1] - phi[c]) / h,
        w: (psi[c + 1] - psi[c]) / h,
        p: 0.5 * (theta[c + 1] + theta[c]),
        q: 0.5 * (phi[c + 1] + phi[c]),
    }
}

/// Energy density at one quadrature point.
fn cell_density(cell: &Cell, params: &RodParams) -> f64 {
    let (a, c) = (params.bend_a, params.twist_c);
    let fl2 = params.force_l2();
    let (sp, cp) = cell.p.sin_cos();
    let (sq, cq) = cell.q.sin_cos();
    let twist = cell.w + cell.v * cp;
    0.5 * a * (cell.u * cell.u + cell.v * cell.v * sp * sp)
        + 0.5 * c * twist * twist
        + fl2[0] * sp * cq
        + fl2[1] * sp * sq
        + fl2[2] * cp
}

/// Discrete rod energy of `field` under `params`.
pub fn energy(field: &EulerField, params: &RodParams) -> f64 {
    let h = field.grid().h();
    (0..field.grid().n_cells())
        .map(|c| cell_density(&cell_at(field, c), params))
        .sum::<f64>()
        * h
}

/// Cell contribution to the energy gradient, ordered
/// `(theta_a, theta_b, phi_a, phi_b, psi_a, psi_b)` for the cell's two nodes.
pub(crate) fn cell_gradient(cell: &Cell, params: &RodParams, h: f64) -> [f64; 6] {
    let (a, c) = (params.bend_a, params.twist_c);
    let fl2 = params.force_l2();
    let (sp, cp) = cell.p.sin_cos();
    let (sq, cq) = cell.q.sin_cos();
    let twist = cell.w + cell.v * cp;

    // Density derivatives with respect to the cell variables.
    let d_u = a * cell.u;
    let d_v = a * cell.v * sp * sp + c * twist * cp;
    let d_w = c * twist;
    let d_p = a * cell.v * cell.v * sp * cp - c * twist * cell.v * sp
        + fl2[0] * cp * cq
        + fl2[1] * cp * sq
        - fl2[2] * sp;
    let d_q = -fl2[0] * sp * sq + fl2[1] * sp * cq;

    // Chain rule through u = (b-a)/h and p = (a+b)/2, times the cell weight h.
    [
        -d_u + 0.5 * h * d_p,
        d_u + 0.5 * h * d_p,
        -d_v + 0.5 * h * d_q,
        d_v + 0.5 * h * d_q,
        -d_w,
        d_w,
    ]
}

/// Exact gradient of the discrete energy with respect to all nodal values,
/// returned as `[d/dtheta, d/dphi, d/dpsi]` nodal arrays. No boundary
/// handling; callers restrict to free dofs as needed.
pub fn energy_gradient_nodal(field: &EulerField, params: &RodParams) -> [Vec<f64>; 3] {
    let grid = field.grid();
    let h = grid.h();
    let n = grid.n_nodes();
    let mut g = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for c in 0..grid.n_cells() {
        let contrib = cell_gradient(&cell_at(field, c), params, h);
        g[0][c] += contrib[0];
        g[0][c + 1] += contrib[1];
        g[1][c] += contrib[2];
        g[1][c + 1] += contrib[3];
        g[2][c] += contrib[4];
        g[2][c + 1] += contrib[5];
    }
    g
}

/// Cell contribution to the energy Hessian: the symmetric 6x6 block over
/// `(theta_a, theta_b, phi_a, phi_b, psi_a, psi_b)`.
pub(crate) fn cell_hessian(cell: &Cell, params: &RodParams, h: f64) -> [[f64; 6]; 6] {
    let (a, c) = (params.bend_a, params.twist_c);
    let fl2 = params.force_l2();
    let (sp, cp) = cell.p.sin_cos();
    let (sq, cq) = cell.q.sin_cos();
    let v = cell.v;
    let twist = cell.w + v * cp;

    // Second derivatives of the density in the cell variables (u, v, w, p, q).
    let w_uu = a;
    let w_vv = a * sp * sp + c * cp * cp;
    let w_ww = c;
    let w_vw = c * cp;
    let w_wp = -c * v * sp;
    let w_vp = 2.0 * a * v * sp * cp - c * sp * (v * cp + twist);
    let w_pp = a * v * v * (2.0 * cell.p).cos() + c * v * v * sp * sp
        - c * twist * v * cp
        - fl2[0] * sp * cq
        - fl2[1] * sp * sq
        - fl2[2] * cp;
    let w_pq = -fl2[0] * cp * sq + fl2[1] * cp * cq;
    let w_qq = -fl2[0] * sp * cq - fl2[1] * sp * sq;

    let d = [
        [w_uu, 0.0, 0.0, 0.0, 0.0],
        [0.0, w_vv, w_vw, w_vp, 0.0],
        [0.0, w_vw, w_ww, w_wp, 0.0],
        [0.0, w_vp, w_wp, w_pp, w_pq],
        [0.0, 0.0, 0.0, w_pq, w_qq],
    ];

    // Jacobian of (u, v, w, p, q) in the six nodal values.
    let inv_h = 1.0 / h;
    let j = [
        [-inv_h, inv_h, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, -inv_h, inv_h, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -inv_h, inv_h],
        [0.5, 0.5, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.5, 0.0, 0.0],
    ];

    // h * J^T D J, mirrored so the block is exactly symmetric.
    let mut block = [[0.0; 6]; 6];
    for r in 0..6 {
        for s in r..6 {
            let mut acc = 0.0;
            for m in 0..5 {
                for k in 0..5 {
                    acc += j[m][r] * d[m][k] * j[k][s];
                }
            }
            block[r][s] = h * acc;
            block[s][r] = h * acc;
        }
    }
    block
}

/// Strong-form residuals of the equilibrium equations at interior nodes,
/// using second-order central differences. The three arrays correspond to the
/// polar-angle equation, the azimuthal momentum balance, and the twist
/// (reported as deviation of `kappa3` from its interior mean, since the twist
/// of any equilibrium is a constant whose value is not known a priori).
pub fn el_residual(field: &EulerField, params: &RodParams) -> [Vec<f64>; 3] {
    let grid = field.grid();
    let h = grid.h();
    let n = grid.n_nodes();
    let (a, c) = (params.bend_a, params.twist_c);
    let fl2 = params.force_l2();
    let (theta, phi, psi) = (field.theta(), field.phi(), field.psi());

    let n_int = n.saturating_sub(2);
    let mut r_theta = Vec::with_capacity(n_int);
    let mut r_phi = Vec::with_capacity(n_int);
    let mut r_twist = Vec::with_capacity(n_int);

    // Azimuthal flux A phi_s sin^2 theta + C cos(theta) kappa3 per cell;
    // differencing adjacent cells gives a centered derivative at the node.
    let n_cells = grid.n_cells();
    let mut flux = Vec::with_capacity(n_cells);
    for cidx in 0..n_cells {
        let cell = cell_at(field, cidx);
        let (sp, cp) = cell.p.sin_cos();
        let twist = cell.w + cell.v * cp;
        flux.push(a * cell.v * sp * sp + c * cp * twist);
    }

    for i in 1..n - 1 {
        let th_ss = (theta[i + 1] - 2.0 * theta[i] + theta[i - 1]) / (h * h);
        let ph_s = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
        let ps_s = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
        let (st, ct) = theta[i].sin_cos();
        let (sf, cf) = phi[i].sin_cos();
        let kappa3 = ps_s + ph_s * ct;

        let load_dtheta = fl2[0] * ct * cf + fl2[1] * ct * sf - fl2[2] * st;
        r_theta.push(
            a * th_ss - a * ph_s * ph_s * st * ct + c * ph_s * st * kappa3 - load_dtheta,
        );

        let load_dphi = -fl2[0] * st * sf + fl2[1] * st * cf;
        r_phi.push((flux[i] - flux[i - 1]) / h - load_dphi);

        r_twist.push(kappa3);
    }

    // Report the twist equation as deviation from the interior mean.
    if !r_twist.is_empty() {
        let mean = r_twist.iter().sum::<f64>() / r_twist.len() as f64;
        for t in r_twist.iter_mut() {
            *t -= mean;
        }
    }

    [r_theta, r_phi, r_twist]
}

/// Maximum absolute entry over the three residual arrays.
pub fn el_residual_max(field: &EulerField, params: &RodParams) -> f64 {
    el_residual(field, params)
        .iter()
        .flat_map(|arr| arr.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn straight_twisted(n: usize, m: f64) -> EulerField {
        let grid = Grid::unit(n).unwrap();
        EulerField::from_functions(&grid, |_| PI / 2.0, |_| 0.0, move |s| 2.0 * PI * m * s)
            .unwrap()
    }

    #[test]
    fn straight_twisted_energy_is_exact() {
        // Constant integrand: 2 pi^2 M^2 C, no quadrature error.
        let f = straight_twisted(16, 1.0);
        let p = RodParams::unloaded(1.0, 0.75, 1.0).unwrap();
        assert_relative_eq!(energy(&f, &p), 1.5 * PI * PI, epsilon = 1e-8);
    }

    #[test]
    fn axial_load_term_adds_exactly() {
        let f = straight_twisted(16, 1.0);
        let p0 = RodParams::unloaded(1.0, 0.75, 1.0).unwrap();
        let p1 = p0.with_force([2.5, 0.0, 0.0]);
        // Tangent is the x axis everywhere, so the load term integrates to F L^2.
        assert_relative_eq!(energy(&f, &p1) - energy(&f, &p0), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let grid = Grid::unit(7).unwrap();
        let f = EulerField::from_functions(
            &grid,
            |s| PI / 2.0 + 0.4 * (PI * s).sin() - 0.1 * s,
            |s| 0.3 * (2.0 * PI * s).cos() + 0.2 * s,
            |s| 2.0 * PI * s + 0.15 * (3.0 * PI * s).sin(),
        )
        .unwrap();
        let p = RodParams::new(1.1, 0.8, 1.3, [0.4, -0.7, 0.9], 1.0).unwrap();
        let g = energy_gradient_nodal(&f, &p);
        let eps = 1e-6;
        for which in 0..3 {
            for node in 0..grid.n_nodes() {
                let bump = |delta: f64| {
                    let mut th = f.theta().to_vec();
                    let mut ph = f.phi().to_vec();
                    let mut ps = f.psi().to_vec();
                    match which {
                        0 => th[node] += delta,
                        1 => ph[node] += delta,
                        _ => ps[node] += delta,
                    }
                    let fd = EulerField::new(grid.clone(), th, ph, ps).unwrap();
                    energy(&fd, &p)
                };
                let fd = (bump(eps) - bump(-eps)) / (2.0 * eps);
                assert_relative_eq!(g[which][node], fd, epsilon = 1e-6, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn hessian_cell_matches_gradient_differences() {
        let h = 0.125;
        let cell = Cell {
            u: 0.3,
            v: -0.8,
            w: 5.9,
            p: 1.2,
            q: 0.4,
        };
        let p = RodParams::new(1.0, 0.75, 1.2, [0.5, -0.3, 0.8], 1.0).unwrap();
        let block = cell_hessian(&cell, &p, h);
        // Differentiate the cell gradient numerically in each nodal direction.
        let nodal = [0.0f64; 6];
        let eps = 1e-6;
        let grad_at = |x: &[f64; 6]| {
            let c = Cell {
                u: cell.u + (x[1] - x[0]) / h,
                v: cell.v + (x[3] - x[2]) / h,
                w: cell.w + (x[5] - x[4]) / h,
                p: cell.p + 0.5 * (x[0] + x[1]),
                q: cell.q + 0.5 * (x[2] + x[3]),
            };
            cell_gradient(&c, &p, h)
        };
        for j in 0..6 {
            let mut plus = nodal;
            plus[j] += eps;
            let mut minus = nodal;
            minus[j] -= eps;
            let gp = grad_at(&plus);
            let gm = grad_at(&minus);
            for i in 0..6 {
                let fd = (gp[i] - gm[i]) / (2.0 * eps);
                assert_relative_eq!(block[i][j], fd, epsilon = 1e-5, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn straight_twisted_state_solves_the_equilibrium_equations() {
        for m in [0.0, 1.0, 2.5] {
            let f = straight_twisted(64, m);
            let p = RodParams::unloaded(1.0, 0.75, m)
                .unwrap()
                .with_force([4.0, 0.0, 0.0]);
            assert!(el_residual_max(&f, &p) <= 1e-8, "m = {m}");
        }
    }
}
