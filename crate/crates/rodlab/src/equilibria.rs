//! Closed-form equilibrium states: the straight twisted rod, helices, and a
//! localized twist-to-bend soliton, each with the boundary data that pins it.

use crate::boundary::{BoundarySpec, IsoAxis};
use crate::error::{Result, RodError};
use crate::field::EulerField;
use crate::grid::Grid;
use crate::params::RodParams;
use std::f64::consts::PI;

/// Straight rod along the x axis with `twist_m` full turns of twist
/// distributed uniformly: `theta = pi/2`, `phi = 0`, `psi = 2 pi M s`.
pub fn trivial_state(grid: &Grid, twist_m: f64) -> Result<EulerField> {
    if !twist_m.is_finite() {
        return Err(RodError::validation("twist_m", "must be finite"));
    }
    EulerField::from_functions(grid, |_| PI / 2.0, |_| 0.0, move |s| 2.0 * PI * twist_m * s)
}

/// Uniform helix parameters: polar inclination `theta0`, winding rate
/// `lambda` (turns of the azimuth over the rod), twist phase `phase`, and the
/// rod constants the twist slope depends on.
#[derive(Debug, Clone)]
pub struct HelixSpec {
    pub theta0: f64,
    pub lambda: f64,
    pub phase: f64,
    pub params: RodParams,
}

impl HelixSpec {
    /// Validates that the state is well defined: `lambda` must be nonzero
    /// (the twist slope divides by it) and the load must act along the z
    /// axis, the helix axis.
    pub fn new(theta0: f64, lambda: f64, params: RodParams) -> Result<Self> {
        if !theta0.is_finite() {
            return Err(RodError::validation("helix.theta0", "must be finite"));
        }
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(RodError::validation(
                "helix.lambda",
                "must be finite and nonzero: the twist slope divides by lambda",
            ));
        }
        if params.force[0] != 0.0 || params.force[1] != 0.0 {
            return Err(RodError::validation(
                "helix.params.force",
                "helix states carry a load along the z axis only",
            ));
        }
        Ok(HelixSpec {
            theta0,
            lambda,
            phase: 0.0,
            params,
        })
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Slope of the twist angle along the rod.
    pub fn psi_slope(&self) -> f64 {
        let a = self.params.bend_a;
        let c = self.params.twist_c;
        let fl2 = self.params.force_l2()[2];
        2.0 * PI * self.lambda * self.theta0.cos() * (a / c - 1.0)
            - fl2 / (2.0 * PI * self.lambda * c)
    }
}

/// Helix state on `grid`, together with the clamped boundary data that
/// selects it: `theta = theta0`, `phi = 2 pi lambda s`, `psi` linear with the
/// load-dependent slope.
pub fn helix_state(grid: &Grid, spec: &HelixSpec) -> Result<(EulerField, BoundarySpec)> {
    let theta0 = spec.theta0;
    let lambda = spec.lambda;
    let slope = spec.psi_slope();
    let phase = spec.phase;
    let field = EulerField::from_functions(
        grid,
        |_| theta0,
        move |s| 2.0 * PI * lambda * s,
        move |s| slope * s + phase,
    )?;
    let bcs = BoundarySpec::clamped_to(&field);
    Ok((field, bcs))
}

/// Localized soliton parameters: shape parameter `tau`, half-length of the
/// symmetric domain, and the twist-to-bend stiffness ratio `b` entering the
/// twist slope.
#[derive(Debug, Clone, Copy)]
pub struct SolitonSpec {
    pub tau: f64,
    pub half_length: f64,
    pub stiffness_ratio_b: f64,
}

impl SolitonSpec {
    pub fn new(tau: f64, half_length: f64, stiffness_ratio_b: f64) -> Result<Self> {
        if !tau.is_finite() || tau == 0.0 {
            return Err(RodError::validation(
                "soliton.tau",
                "must be finite and nonzero",
            ));
        }
        if !half_length.is_finite() || half_length <= 0.0 {
            return Err(RodError::validation(
                "soliton.half_length",
                "must be positive and finite",
            ));
        }
        if !stiffness_ratio_b.is_finite() || stiffness_ratio_b <= 0.0 {
            return Err(RodError::validation(
                "soliton.stiffness_ratio_b",
                "must be positive and finite",
            ));
        }
        Ok(SolitonSpec {
            tau,
            half_length,
            stiffness_ratio_b,
        })
    }

    /// Chooses `b = C / (2C - A)`, the ratio that makes the state an exact
    /// equilibrium of the rod with constants `params` under the matching
    /// axial load. Requires `2C > A`.
    pub fn with_equilibrium_twist(tau: f64, half_length: f64, params: &RodParams) -> Result<Self> {
        let denom = 2.0 * params.twist_c - params.bend_a;
        if denom <= 0.0 {
            return Err(RodError::validation(
                "soliton.stiffness_ratio_b",
                "no equilibrium twist ratio exists unless 2C > A; pass one explicitly",
            ));
        }
        SolitonSpec::new(tau, half_length, params.twist_c / denom)
    }
}

/// Soliton state on `grid` (which must span `[-half_length, half_length]`),
/// its clamped boundary data with all three cross-section closure integrals
/// held fixed, and the axial reference load `(0, 0, 1 + tau^2)` used by the
/// stability and flow experiments.
pub fn soliton_state(
    grid: &Grid,
    spec: &SolitonSpec,
) -> Result<(EulerField, BoundarySpec, [f64; 3])> {
    let l = spec.half_length;
    if (grid.lower() + l).abs() > 1e-12 * l.max(1.0) || (grid.upper() - l).abs() > 1e-12 * l.max(1.0)
    {
        return Err(RodError::validation(
            "soliton.half_length",
            format!(
                "grid spans [{}, {}] but the spec asks for [-{l}, {l}]",
                grid.lower(),
                grid.upper()
            ),
        ));
    }
    let tau = spec.tau;
    let depth = 2.0 / (1.0 + tau * tau);
    let swing = 3.0 - 2.0 / spec.stiffness_ratio_b;
    let field = EulerField::from_functions(
        grid,
        move |s| {
            let sech = 1.0 / s.cosh();
            (1.0 - depth * sech * sech).acos()
        },
        move |s| (s.tanh() / tau).atan() + tau * s,
        move |s| (s.tanh() / tau).atan() + swing * tau * s,
    )?;
    let bcs = BoundarySpec::clamped_to(&field).with_iso(&[IsoAxis::X, IsoAxis::Y, IsoAxis::Z]);
    Ok((field, bcs, [0.0, 0.0, 1.0 + tau * tau]))
}

/// `field + epsilon * direction`, re-validated against the polar guard.
pub fn perturb(field: &EulerField, direction: &crate::field::Perturbation, epsilon: f64) -> Result<EulerField> {
    if !epsilon.is_finite() {
        return Err(RodError::validation("epsilon", "must be finite"));
    }
    if direction.n_nodes() != field.n_nodes() {
        return Err(RodError::validation(
            "direction",
            format!(
                "has {} nodes but the field has {}",
                direction.n_nodes(),
                field.n_nodes()
            ),
        ));
    }
    let add = |base: &[f64], delta: &[f64]| -> Vec<f64> {
        base.iter()
            .zip(delta.iter())
            .map(|(b, d)| b + epsilon * d)
            .collect()
    };
    EulerField::new(
        field.grid().clone(),
        add(field.theta(), &direction.alpha),
        add(field.phi(), &direction.beta),
        add(field.psi(), &direction.gamma),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::el_residual_max;
    use crate::field::Perturbation;
    use crate::kinematics::strains;
    use approx::assert_relative_eq;

    #[test]
    fn trivial_state_is_straight_and_uniformly_twisted() {
        let grid = Grid::unit(8).unwrap();
        let f = trivial_state(&grid, 2.0).unwrap();
        for &t in f.theta() {
            assert_relative_eq!(t, PI / 2.0);
        }
        assert_relative_eq!(f.psi()[8], 4.0 * PI, epsilon = 1e-14);
        let s = strains(&f);
        for c in 0..grid.n_cells() {
            assert_relative_eq!(s.kappa3[c], 4.0 * PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn helix_strains_match_closed_forms() {
        let grid = Grid::unit(200).unwrap();
        let params = RodParams::unloaded(1.0, 0.75, 1.0)
            .unwrap()
            .with_force([0.0, 0.0, 3.0]);
        let spec = HelixSpec::new(1.1, 0.4, params).unwrap();
        let (f, _) = helix_state(&grid, &spec).unwrap();
        let s = strains(&f);
        let bend = 2.0 * PI * 0.4 * (1.1f64).sin();
        let twist = 2.0 * (1.0 / 0.75) * PI * 0.4 * (1.1f64).cos() - 3.0 / (2.0 * PI * 0.4 * 0.75);
        for c in 0..grid.n_cells() {
            let k_sq = s.kappa1[c] * s.kappa1[c] + s.kappa2[c] * s.kappa2[c];
            assert_relative_eq!(k_sq.sqrt(), bend, epsilon = 1e-6);
            assert_relative_eq!(s.kappa3[c], twist, epsilon = 1e-10);
        }
    }

    #[test]
    fn helix_solves_the_equilibrium_equations() {
        let grid = Grid::unit(400).unwrap();
        let params = RodParams::unloaded(1.0, 0.75, 1.0)
            .unwrap()
            .with_force([0.0, 0.0, -2.0]);
        let spec = HelixSpec::new(0.9, 0.7, params.clone()).unwrap();
        let (f, _) = helix_state(&grid, &spec).unwrap();
        let h = grid.h();
        assert!(el_residual_max(&f, &params) <= 50.0 * h * h);
    }

    #[test]
    fn helix_rejects_zero_lambda_and_transverse_loads() {
        let params = RodParams::unloaded(1.0, 0.75, 1.0).unwrap();
        assert!(HelixSpec::new(1.0, 0.0, params.clone()).is_err());
        let sideways = params.with_force([1.0, 0.0, 0.0]);
        assert!(HelixSpec::new(1.0, 0.5, sideways).is_err());
    }

    #[test]
    fn soliton_twist_is_constant() {
        let grid = Grid::symmetric(10.0, 600).unwrap();
        let spec = SolitonSpec::new(1.0, 10.0, 1.5).unwrap();
        let (f, bcs, force) = soliton_state(&grid, &spec).unwrap();
        assert_relative_eq!(force[2], 2.0);
        assert!(bcs.is_all_dirichlet());
        assert_eq!(bcs.iso_constraints.len(), 3);
        let s = strains(&f);
        let want = (4.0 - 2.0 / 1.5) * 1.0;
        // Away from the endpoints the twist is the constant (4 - 2/b) tau.
        for c in grid.n_cells() / 4..3 * grid.n_cells() / 4 {
            assert_relative_eq!(s.kappa3[c], want, epsilon = 1e-3);
        }
    }

    #[test]
    fn soliton_solves_the_equilibrium_equations_under_its_matched_load() {
        // Unit constants with C/A = 3/4 admit the equilibrium ratio b = 3/2;
        // the matching load is -A (1 + tau^2) along z in scaled units.
        let tau = 0.5f64;
        let params = RodParams::new(
            1.0,
            0.75,
            1.0,
            [0.0, 0.0, -(1.0 + tau * tau)],
            1.0,
        )
        .unwrap();
        let spec = SolitonSpec::with_equilibrium_twist(tau, 10.0, &params).unwrap();
        assert_relative_eq!(spec.stiffness_ratio_b, 1.5, epsilon = 1e-14);
        let grid = Grid::symmetric(10.0, 800).unwrap();
        let (f, _, _) = soliton_state(&grid, &spec).unwrap();
        let h = grid.h();
        assert!(el_residual_max(&f, &params) <= 10.0 * h * h);
    }

    #[test]
    fn equilibrium_twist_requires_dominant_twist_stiffness() {
        let params = RodParams::unloaded(1.0, 0.4, 1.0).unwrap();
        assert!(SolitonSpec::with_equilibrium_twist(1.0, 10.0, &params).is_err());
    }

    #[test]
    fn soliton_checks_the_grid_span() {
        let grid = Grid::symmetric(8.0, 100).unwrap();
        let spec = SolitonSpec::new(1.0, 10.0, 1.5).unwrap();
        assert!(soliton_state(&grid, &spec).is_err());
    }

    #[test]
    fn perturb_is_linear_in_epsilon() {
        let grid = Grid::unit(16).unwrap();
        let f = trivial_state(&grid, 1.0).unwrap();
        let dir = Perturbation::from_functions(
            &grid,
            |s| (PI * s).sin(),
            |s| (2.0 * PI * s).cos(),
            |s| s * (1.0 - s),
        );
        let once = perturb(&f, &dir, 0.3).unwrap();
        let twice = perturb(&once, &dir, 0.2).unwrap();
        let direct = perturb(&f, &dir, 0.5).unwrap();
        assert!(twice.max_distance(&direct) <= 1e-12);
    }
}
