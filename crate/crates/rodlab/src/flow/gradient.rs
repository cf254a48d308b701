//! Riesz representative of the energy gradient and the isoperimetric
//! constraint functionals (endpoint displacement components) with their
//! nodal gradients.

use crate::boundary::{BoundarySpec, IsoAxis, IsoConstraint};
use crate::error::Result;
use crate::field::{EulerField, Perturbation};
use crate::mass::{self, MassKind};
use crate::params::RodParams;

/// Midpoint quadrature of the selected tangent component, i.e. the
/// corresponding component of `r(1) - r(0)` for a unit-speed rod.
pub fn constraint_integral(field: &EulerField, axis: IsoAxis) -> f64 {
    let n = field.n_nodes();
    let h = field.grid().h();
    let mut total = 0.0;
    for c in 0..n - 1 {
        let p = 0.5 * (field.theta()[c] + field.theta()[c + 1]);
        let q = 0.5 * (field.phi()[c] + field.phi()[c + 1]);
        total += h * match axis {
            IsoAxis::X => p.sin() * q.cos(),
            IsoAxis::Y => p.sin() * q.sin(),
            IsoAxis::Z => p.cos(),
        };
    }
    total
}

/// Signed violation `I(field) - target` of one constraint.
pub fn constraint_residual(field: &EulerField, constraint: &IsoConstraint) -> f64 {
    constraint_integral(field, constraint.axis) - constraint.target
}

/// Nodal gradient of [`constraint_integral`] with respect to the three angle
/// arrays, in the same layout as the field.
pub(crate) fn constraint_gradient_nodal(field: &EulerField, axis: IsoAxis) -> [Vec<f64>; 3] {
    let n = field.n_nodes();
    let h = field.grid().h();
    let mut d_theta = vec![0.0; n];
    let mut d_phi = vec![0.0; n];
    let d_psi = vec![0.0; n];
    for c in 0..n - 1 {
        let p = 0.5 * (field.theta()[c] + field.theta()[c + 1]);
        let q = 0.5 * (field.phi()[c] + field.phi()[c + 1]);
        let (dp, dq) = match axis {
            IsoAxis::X => (p.cos() * q.cos(), -p.sin() * q.sin()),
            IsoAxis::Y => (p.cos() * q.sin(), p.sin() * q.cos()),
            IsoAxis::Z => (-p.sin(), 0.0),
        };
        d_theta[c] += 0.5 * h * dp;
        d_theta[c + 1] += 0.5 * h * dp;
        d_phi[c] += 0.5 * h * dq;
        d_phi[c + 1] += 0.5 * h * dq;
    }
    [d_theta, d_phi, d_psi]
}

/// L2-gradient of the discrete energy: the nodal triple `g` solving
/// `M g = dV` on the free degrees of freedom, with zeros at Dirichlet nodes.
/// Uses the consistent mass matrix; see [`discrete_gradient_with_mass`] to
/// choose the lumped one.
pub fn discrete_gradient(
    field: &EulerField,
    params: &RodParams,
    bcs: &BoundarySpec,
) -> Result<Perturbation> {
    discrete_gradient_with_mass(field, params, bcs, MassKind::Consistent)
}

pub fn discrete_gradient_with_mass(
    field: &EulerField,
    params: &RodParams,
    bcs: &BoundarySpec,
    kind: MassKind,
) -> Result<Perturbation> {
    let dof_map = bcs.dof_map(field.grid());
    let nodal = crate::energy::energy_gradient_nodal(field, params);
    let flat = dof_map.gather(&nodal);
    let riesz = mass::solve_mass(&dof_map, kind, &flat);
    let [alpha, beta, gamma] = dof_map.scatter(&riesz);
    Perturbation::new(alpha, beta, gamma)
}
