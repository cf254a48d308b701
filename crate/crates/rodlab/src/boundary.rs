//! Boundary conditions, isoperimetric constraint selections, and the
//! admissible-perturbation indexing they induce.

use crate::error::{Result, RodError};
use crate::field::EulerField;
use crate::grid::Grid;
use serde::{Deserialize, Serialize};

/// Boundary condition kind for one angle at one endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcKind {
    /// Essential condition pinning the nodal value.
    DirichletValue(f64),
    /// Natural condition; the nodal value is free.
    Neumann,
}

impl BcKind {
    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BcKind::DirichletValue(_))
    }
}

/// Coordinate selected by an isoperimetric end condition. Each axis pins the
/// corresponding displacement integral of the tangent: `x` selects
/// the integral of `sin(theta)cos(phi)`, `y` of `sin(theta)sin(phi)`,
/// `z` of `cos(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsoAxis {
    X,
    Y,
    Z,
}

impl IsoAxis {
    pub fn label(&self) -> &'static str {
        match self {
            IsoAxis::X => "x",
            IsoAxis::Y => "y",
            IsoAxis::Z => "z",
        }
    }
}

impl std::fmt::Display for IsoAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// An isoperimetric constraint: the displacement integral along `axis` must
/// equal `target`. A zero target closes the coordinate (equal endpoints);
/// flows against an existing state usually take the initial integral instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoConstraint {
    pub axis: IsoAxis,
    pub target: f64,
}

impl IsoConstraint {
    /// Constraint that closes the coordinate: equal endpoint components.
    pub fn closure(axis: IsoAxis) -> Self {
        IsoConstraint { axis, target: 0.0 }
    }

    /// Constraint that freezes the coordinate at its current value.
    pub fn fixing(axis: IsoAxis, field: &EulerField) -> Self {
        IsoConstraint {
            axis,
            target: crate::flow::constraint_integral(field, axis),
        }
    }
}

/// Boundary conditions per angle and endpoint, plus the set of coordinates
/// carrying isoperimetric conditions.
///
/// Index 0 of each pair is the lower endpoint, index 1 the upper one.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub theta: [BcKind; 2],
    pub phi: [BcKind; 2],
    pub psi: [BcKind; 2],
    pub iso_constraints: Vec<IsoAxis>,
}

impl BoundarySpec {
    /// All-Dirichlet conditions sampling the endpoint values of `field`.
    pub fn clamped_to(field: &EulerField) -> Self {
        let last = field.n_nodes() - 1;
        BoundarySpec {
            theta: [
                BcKind::DirichletValue(field.theta()[0]),
                BcKind::DirichletValue(field.theta()[last]),
            ],
            phi: [
                BcKind::DirichletValue(field.phi()[0]),
                BcKind::DirichletValue(field.phi()[last]),
            ],
            psi: [
                BcKind::DirichletValue(field.psi()[0]),
                BcKind::DirichletValue(field.psi()[last]),
            ],
            iso_constraints: Vec::new(),
        }
    }

    pub fn with_iso(mut self, axes: &[IsoAxis]) -> Self {
        let mut axes = axes.to_vec();
        axes.sort();
        axes.dedup();
        self.iso_constraints = axes;
        self
    }

    /// Boundary kinds for the selected angle (0 = theta, 1 = phi, 2 = psi).
    pub fn angle(&self, which: usize) -> &[BcKind; 2] {
        match which {
            0 => &self.theta,
            1 => &self.phi,
            2 => &self.psi,
            _ => panic!("angle index must be 0, 1 or 2"),
        }
    }

    /// True when every angle is Dirichlet at both endpoints.
    pub fn is_all_dirichlet(&self) -> bool {
        [&self.theta, &self.phi, &self.psi]
            .iter()
            .all(|pair| pair[0].is_dirichlet() && pair[1].is_dirichlet())
    }

    /// Checks that a field matches the Dirichlet values of this spec to
    /// within `tol` at the endpoints.
    pub fn check_compatible(&self, field: &EulerField, tol: f64) -> Result<()> {
        let last = field.n_nodes() - 1;
        for (name, which) in [("theta", 0usize), ("phi", 1), ("psi", 2)] {
            let values = field.angle(which);
            for (end, node) in [(0usize, 0usize), (1, last)] {
                if let BcKind::DirichletValue(v) = self.angle(which)[end] {
                    if (values[node] - v).abs() > tol {
                        return Err(RodError::validation(
                            format!("bcs.{name}[{end}]"),
                            format!(
                                "field value {} differs from the pinned value {v}",
                                values[node]
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Admissible-perturbation indexing for this spec on `grid`.
    pub fn dof_map(&self, grid: &Grid) -> DofMap {
        DofMap::build(grid, self)
    }
}

/// Maps nodal `(alpha, beta, gamma)` values that remain free under a
/// [`BoundarySpec`] to a contiguous global index.
///
/// The global ordering is angle-major: all free theta-dofs first, then phi,
/// then psi, each in node order. Dirichlet endpoints are excluded; interior
/// nodes are always free.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    grid: Grid,
    /// `index[which][node]` is the global dof or `None` if pinned.
    index: [Vec<Option<usize>>; 3],
    /// Inverse map: global dof -> (angle, node).
    locate: Vec<(usize, usize)>,
}

impl DofMap {
    fn build(grid: &Grid, bcs: &BoundarySpec) -> DofMap {
        let n = grid.n_nodes();
        let mut index: [Vec<Option<usize>>; 3] =
            [vec![None; n], vec![None; n], vec![None; n]];
        let mut locate = Vec::new();
        let mut next = 0usize;
        for which in 0..3 {
            let pair = bcs.angle(which);
            for node in 0..n {
                let pinned = (node == 0 && pair[0].is_dirichlet())
                    || (node == n - 1 && pair[1].is_dirichlet());
                if !pinned {
                    index[which][node] = Some(next);
                    locate.push((which, node));
                    next += 1;
                }
            }
        }
        DofMap {
            grid: grid.clone(),
            index,
            locate,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of free degrees of freedom.
    pub fn dim(&self) -> usize {
        self.locate.len()
    }

    /// Global index of `(angle, node)` or `None` when pinned.
    pub fn global(&self, which: usize, node: usize) -> Option<usize> {
        self.index[which][node]
    }

    /// `(angle, node)` owning the global dof `g`.
    pub fn locate(&self, g: usize) -> (usize, usize) {
        self.locate[g]
    }

    /// Number of free dofs of one angle.
    pub fn free_count(&self, which: usize) -> usize {
        self.index[which].iter().filter(|e| e.is_some()).count()
    }

    /// Gather the free entries of a nodal triple into a flat vector.
    pub fn gather(&self, nodal: &[Vec<f64>; 3]) -> Vec<f64> {
        self.locate
            .iter()
            .map(|&(which, node)| nodal[which][node])
            .collect()
    }

    /// Scatter a flat vector back onto nodal arrays; pinned entries get 0.
    pub fn scatter(&self, flat: &[f64]) -> [Vec<f64>; 3] {
        assert_eq!(flat.len(), self.dim());
        let n = self.grid.n_nodes();
        let mut nodal = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (g, &(which, node)) in self.locate.iter().enumerate() {
            nodal[which][node] = flat[g];
        }
        nodal
    }

    /// Global index in the node-major ordering used by banded factorizations:
    /// free dofs of node 0 first (theta, phi, psi order), then node 1, ...
    pub fn node_major_order(&self) -> Vec<usize> {
        let n = self.grid.n_nodes();
        let mut order = Vec::with_capacity(self.dim());
        for node in 0..n {
            for which in 0..3 {
                if let Some(g) = self.index[which][node] {
                    order.push(g);
                }
            }
        }
        order
    }
}
