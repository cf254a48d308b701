//! P1 mass matrices over the free degrees of freedom.
//!
//! The gradient flow measures velocities in the L2 inner product, realized on
//! the mesh either by the consistent piecewise-linear Gram matrix
//! (tridiagonal, `h/6 [1 4 1]` rows, `h/3` at the ends) or by its row-sum
//! lumping. Angles never couple through the mass, so every operation splits
//! into three independent tridiagonal (or diagonal) problems on contiguous
//! node ranges.

use crate::boundary::DofMap;
use crate::linalg::{solve_tridiag_sym, BandedSym};
use serde::{Deserialize, Serialize};

/// Choice of L2 Gram matrix on the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassKind {
    /// Exact piecewise-linear Gram matrix (tridiagonal).
    #[default]
    Consistent,
    /// Row-sum lumped diagonal.
    Lumped,
}

/// Full-grid consistent tridiagonal as `(diag, off)`.
fn consistent_full(n_nodes: usize, h: f64) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![2.0 * h / 3.0; n_nodes];
    diag[0] = h / 3.0;
    diag[n_nodes - 1] = h / 3.0;
    let off = vec![h / 6.0; n_nodes - 1];
    (diag, off)
}

fn lumped_full(n_nodes: usize, h: f64) -> Vec<f64> {
    let mut diag = vec![h; n_nodes];
    diag[0] = h / 2.0;
    diag[n_nodes - 1] = h / 2.0;
    diag
}

/// Free node indices of one angle, ascending. Always a contiguous range
/// (only endpoints can be pinned).
fn free_nodes(dof_map: &DofMap, which: usize) -> Vec<usize> {
    (0..dof_map.grid().n_nodes())
        .filter(|&node| dof_map.global(which, node).is_some())
        .collect()
}

/// Apply the free-dof mass matrix: `y = M x` in the global dof ordering.
pub fn apply_mass(dof_map: &DofMap, kind: MassKind, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), dof_map.dim());
    let n = dof_map.grid().n_nodes();
    let h = dof_map.grid().h();
    let mut y = vec![0.0; dof_map.dim()];
    match kind {
        MassKind::Lumped => {
            let diag = lumped_full(n, h);
            for g in 0..dof_map.dim() {
                let (_, node) = dof_map.locate(g);
                y[g] = diag[node] * x[g];
            }
        }
        MassKind::Consistent => {
            let (diag, off) = consistent_full(n, h);
            for which in 0..3 {
                let nodes = free_nodes(dof_map, which);
                for (k, &node) in nodes.iter().enumerate() {
                    let g = dof_map.global(which, node).unwrap();
                    let mut acc = diag[node] * x[g];
                    if k > 0 && nodes[k - 1] == node - 1 {
                        let g_prev = dof_map.global(which, node - 1).unwrap();
                        acc += off[node - 1] * x[g_prev];
                    }
                    if k + 1 < nodes.len() && nodes[k + 1] == node + 1 {
                        let g_next = dof_map.global(which, node + 1).unwrap();
                        acc += off[node] * x[g_next];
                    }
                    y[g] = acc;
                }
            }
        }
    }
    y
}

/// Solve `M x = rhs` on the free dofs.
pub fn solve_mass(dof_map: &DofMap, kind: MassKind, rhs: &[f64]) -> Vec<f64> {
    assert_eq!(rhs.len(), dof_map.dim());
    let n = dof_map.grid().n_nodes();
    let h = dof_map.grid().h();
    let mut x = vec![0.0; dof_map.dim()];
    match kind {
        MassKind::Lumped => {
            let diag = lumped_full(n, h);
            for g in 0..dof_map.dim() {
                let (_, node) = dof_map.locate(g);
                x[g] = rhs[g] / diag[node];
            }
        }
        MassKind::Consistent => {
            let (diag_full, off_full) = consistent_full(n, h);
            for which in 0..3 {
                let nodes = free_nodes(dof_map, which);
                if nodes.is_empty() {
                    continue;
                }
                let sub_diag: Vec<f64> = nodes.iter().map(|&i| diag_full[i]).collect();
                let sub_off: Vec<f64> = nodes
                    .windows(2)
                    .map(|w| if w[1] == w[0] + 1 { off_full[w[0]] } else { 0.0 })
                    .collect();
                let sub_rhs: Vec<f64> = nodes
                    .iter()
                    .map(|&i| rhs[dof_map.global(which, i).unwrap()])
                    .collect();
                let sol = solve_tridiag_sym(&sub_diag, &sub_off, &sub_rhs);
                for (k, &node) in nodes.iter().enumerate() {
                    x[dof_map.global(which, node).unwrap()] = sol[k];
                }
            }
        }
    }
    x
}

/// Free-dof mass matrix in the node-major banded layout given by
/// `order[pos] = global dof` (see [`DofMap::node_major_order`]).
pub fn mass_banded(dof_map: &DofMap, kind: MassKind, order: &[usize]) -> BandedSym {
    let dim = dof_map.dim();
    assert_eq!(order.len(), dim);
    let mut pos_of = vec![0usize; dim];
    for (pos, &g) in order.iter().enumerate() {
        pos_of[g] = pos;
    }
    let n = dof_map.grid().n_nodes();
    let h = dof_map.grid().h();
    // Node-major positions of dofs at adjacent nodes differ by at most 5.
    let mut m = BandedSym::zeros(dim, 5.min(dim.saturating_sub(1)));
    match kind {
        MassKind::Lumped => {
            let diag = lumped_full(n, h);
            for g in 0..dim {
                let (_, node) = dof_map.locate(g);
                m.add(pos_of[g], pos_of[g], diag[node]);
            }
        }
        MassKind::Consistent => {
            let (diag, off) = consistent_full(n, h);
            for g in 0..dim {
                let (which, node) = dof_map.locate(g);
                m.add(pos_of[g], pos_of[g], diag[node]);
                if node + 1 < n {
                    if let Some(g_next) = dof_map.global(which, node + 1) {
                        m.add(pos_of[g], pos_of[g_next], off[node]);
                    }
                }
            }
        }
    }
    m
}

/// Dense free-dof mass matrix in the global dof ordering, for generalized
/// eigenvalue problems.
pub fn mass_dense(dof_map: &DofMap, kind: MassKind) -> nalgebra::DMatrix<f64> {
    let dim = dof_map.dim();
    let n = dof_map.grid().n_nodes();
    let h = dof_map.grid().h();
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    match kind {
        MassKind::Lumped => {
            let diag = lumped_full(n, h);
            for g in 0..dim {
                let (_, node) = dof_map.locate(g);
                m[(g, g)] = diag[node];
            }
        }
        MassKind::Consistent => {
            let (diag, off) = consistent_full(n, h);
            for g in 0..dim {
                let (which, node) = dof_map.locate(g);
                m[(g, g)] = diag[node];
                if node + 1 < n {
                    if let Some(g_next) = dof_map.global(which, node + 1) {
                        m[(g, g_next)] = off[node];
                        m[(g_next, g)] = off[node];
                    }
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BcKind, BoundarySpec};
    use crate::grid::Grid;
    use approx::assert_relative_eq;

    fn map_with_mixed_bcs(n: usize) -> DofMap {
        let grid = Grid::unit(n).unwrap();
        let bcs = BoundarySpec {
            theta: [BcKind::DirichletValue(1.0), BcKind::DirichletValue(1.0)],
            phi: [BcKind::Neumann, BcKind::Neumann],
            psi: [BcKind::DirichletValue(0.0), BcKind::Neumann],
            iso_constraints: Vec::new(),
        };
        bcs.dof_map(&grid)
    }

    #[test]
    fn solve_inverts_apply() {
        let map = map_with_mixed_bcs(12);
        let x: Vec<f64> = (0..map.dim()).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
        for kind in [MassKind::Consistent, MassKind::Lumped] {
            let y = apply_mass(&map, kind, &x);
            let back = solve_mass(&map, kind, &y);
            for (a, b) in x.iter().zip(back.iter()) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn consistent_mass_integrates_linear_functions_exactly() {
        // For all-free dofs, (M 1)_i = integral of the i-th hat function,
        // and 1^T M 1 = total length.
        let grid = Grid::unit(10).unwrap();
        let bcs = BoundarySpec {
            theta: [BcKind::Neumann, BcKind::Neumann],
            phi: [BcKind::Neumann, BcKind::Neumann],
            psi: [BcKind::Neumann, BcKind::Neumann],
            iso_constraints: Vec::new(),
        };
        let map = bcs.dof_map(&grid);
        let ones = vec![1.0; map.dim()];
        let m1 = apply_mass(&map, MassKind::Consistent, &ones);
        let total: f64 = m1.iter().sum();
        assert_relative_eq!(total, 3.0, epsilon = 1e-13); // three angles, length 1 each
    }

    #[test]
    fn banded_layout_agrees_with_apply() {
        let map = map_with_mixed_bcs(9);
        let order = map.node_major_order();
        let m = mass_banded(&map, MassKind::Consistent, &order);
        let x: Vec<f64> = (0..map.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        // Permute x into node-major positions, multiply, permute back.
        let mut xp = vec![0.0; map.dim()];
        for (pos, &g) in order.iter().enumerate() {
            xp[pos] = x[g];
        }
        let yp = m.mul(&xp);
        let mut y = vec![0.0; map.dim()];
        for (pos, &g) in order.iter().enumerate() {
            y[g] = yp[pos];
        }
        let want = apply_mass(&map, MassKind::Consistent, &x);
        for (a, b) in y.iter().zip(want.iter()) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn dense_matches_apply() {
        let map = map_with_mixed_bcs(8);
        let m = mass_dense(&map, MassKind::Consistent);
        let x: Vec<f64> = (0..map.dim()).map(|i| 1.0 + i as f64).collect();
        let xv = nalgebra::DVector::from_vec(x.clone());
        let y = &m * &xv;
        let want = apply_mass(&map, MassKind::Consistent, &x);
        for g in 0..map.dim() {
            assert_relative_eq!(y[g], want[g], epsilon = 1e-13);
        }
    }
}
