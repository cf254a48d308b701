//! Discrete Hessian of the rod energy, restricted to the degrees of freedom a
//! [`BoundarySpec`] leaves free. The matrix is the exact second derivative of
//! the midpoint-quadrature energy, assembled cell by cell, so quadratic forms
//! through it coincide with the analytic second variations up to O(h^2).

use crate::boundary::{BoundarySpec, DofMap};
use crate::energy::{cell_at, cell_hessian};
use crate::field::{EulerField, Perturbation};
use crate::linalg::BandedSym;
use crate::params::RodParams;
use nalgebra::DMatrix;

/// Second derivative of the discrete energy over the free nodal perturbation
/// values, with any linearized closure constraints that accompany the
/// boundary data.
#[derive(Debug, Clone)]
pub struct Hessian {
    pub matrix: DMatrix<f64>,
    pub dof_map: DofMap,
    /// One row per isoperimetric constraint: the gradient of the constraint
    /// integral over the free dofs at the expansion point.
    pub constraints: Vec<Vec<f64>>,
}

impl Hessian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Free-dof coefficient vector of a perturbation triple.
    pub fn flatten(&self, direction: &Perturbation) -> Vec<f64> {
        let nodal = [
            direction.alpha.clone(),
            direction.beta.clone(),
            direction.gamma.clone(),
        ];
        self.dof_map.gather(&nodal)
    }

    /// `direction^T H direction`.
    pub fn quadratic_form(&self, direction: &Perturbation) -> f64 {
        let x = self.flatten(direction);
        let mut acc = 0.0;
        for i in 0..x.len() {
            let mut row = 0.0;
            for j in 0..x.len() {
                row += self.matrix[(i, j)] * x[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    /// Largest absolute entry.
    pub fn norm_inf(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest absolute asymmetry `|H_ij - H_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Exact second derivative of the discrete energy at `equilibrium`,
/// restricted to the perturbations `bcs` admits. Closure constraints in
/// `bcs.iso_constraints` are linearized at the same point and attached as
/// rows.
pub fn assemble_hessian(
    equilibrium: &EulerField,
    params: &RodParams,
    bcs: &BoundarySpec,
) -> Hessian {
    let grid = equilibrium.grid();
    let dof_map = bcs.dof_map(grid);
    let dim = dof_map.dim();
    let h = grid.h();
    let mut matrix = DMatrix::zeros(dim, dim);
    for c in 0..grid.n_cells() {
        let block = cell_hessian(&cell_at(equilibrium, c), params, h);
        let globals = cell_globals(&dof_map, c);
        for (r, gi) in globals.iter().enumerate() {
            let Some(gi) = gi else { continue };
            for (s, gj) in globals.iter().enumerate() {
                let Some(gj) = gj else { continue };
                matrix[(*gi, *gj)] += block[r][s];
            }
        }
    }
    let constraints = bcs
        .iso_constraints
        .iter()
        .map(|&axis| {
            let nodal = crate::flow::constraint_gradient_nodal(equilibrium, axis);
            dof_map.gather(&nodal)
        })
        .collect();
    Hessian {
        matrix,
        dof_map,
        constraints,
    }
}

fn cell_globals(dof_map: &DofMap, c: usize) -> [Option<usize>; 6] {
    [
        dof_map.global(0, c),
        dof_map.global(0, c + 1),
        dof_map.global(1, c),
        dof_map.global(1, c + 1),
        dof_map.global(2, c),
        dof_map.global(2, c + 1),
    ]
}

/// Same Hessian in the banded node-major layout: `pos_of[global] = band row`.
/// Adjacent-node coupling keeps the half-bandwidth at 5 or less.
pub(crate) fn assemble_banded(
    field: &EulerField,
    params: &RodParams,
    dof_map: &DofMap,
    pos_of: &[usize],
) -> BandedSym {
    let grid = field.grid();
    let h = grid.h();
    let dim = dof_map.dim();
    let mut banded = BandedSym::zeros(dim, 5.min(dim.saturating_sub(1)));
    for c in 0..grid.n_cells() {
        let block = cell_hessian(&cell_at(field, c), params, h);
        let globals = cell_globals(dof_map, c);
        for r in 0..6 {
            let Some(gi) = globals[r] else { continue };
            for s in r..6 {
                let Some(gj) = globals[s] else { continue };
                banded.add(pos_of[gi], pos_of[gj], block[r][s]);
            }
        }
    }
    banded
}

/// Energy gradient gathered onto the free dofs.
pub(crate) fn gradient_free(field: &EulerField, params: &RodParams, dof_map: &DofMap) -> Vec<f64> {
    let nodal = crate::energy::energy_gradient_nodal(field, params);
    dof_map.gather(&nodal)
}
