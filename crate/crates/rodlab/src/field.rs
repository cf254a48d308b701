//! Nodal Euler-angle fields and perturbation triples.

use crate::error::{Result, RodError};
use crate::grid::Grid;

/// Default polar-singularity guard: theta must stay in
/// `[THETA_MIN, pi - THETA_MIN]` at every node.
pub const DEFAULT_THETA_MIN: f64 = 1e-6;

/// Euler angles `(theta, phi, psi)` sampled at grid nodes and interpreted as
/// piecewise-affine, globally continuous functions of arc length.
///
/// The polar angle is kept strictly away from the coordinate singularities at
/// 0 and pi; violating nodes make construction fail.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerField {
    grid: Grid,
    theta: Vec<f64>,
    phi: Vec<f64>,
    psi: Vec<f64>,
}

impl EulerField {
    /// Build a field with the default polar guard.
    pub fn new(grid: Grid, theta: Vec<f64>, phi: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        Self::with_theta_min(grid, theta, phi, psi, DEFAULT_THETA_MIN)
    }

    /// Build a field with an explicit polar guard `theta_min`.
    pub fn with_theta_min(
        grid: Grid,
        theta: Vec<f64>,
        phi: Vec<f64>,
        psi: Vec<f64>,
        theta_min: f64,
    ) -> Result<Self> {
        let n = grid.n_nodes();
        for (name, arr) in [("theta", &theta), ("phi", &phi), ("psi", &psi)] {
            if arr.len() != n {
                return Err(RodError::validation(
                    format!("field.{name}"),
                    format!("expected {n} nodal values, got {}", arr.len()),
                ));
            }
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(RodError::validation(
                    format!("field.{name}"),
                    "nodal values must be finite",
                ));
            }
        }
        if !(theta_min > 0.0) || theta_min >= std::f64::consts::FRAC_PI_2 {
            return Err(RodError::validation(
                "field.theta_min",
                "guard must lie in (0, pi/2)",
            ));
        }
        let hi = std::f64::consts::PI - theta_min;
        if let Some((i, &t)) = theta
            .iter()
            .enumerate()
            .find(|(_, &t)| t < theta_min || t > hi)
        {
            return Err(RodError::validation(
                format!("field.theta[{i}]"),
                format!("value {t} leaves the polar-singularity guard ({theta_min:.1e}, pi - {theta_min:.1e})"),
            ));
        }
        Ok(EulerField {
            grid,
            theta,
            phi,
            psi,
        })
    }

    /// Sample closed-form angle functions at the grid nodes.
    pub fn from_functions(
        grid: &Grid,
        theta: impl Fn(f64) -> f64,
        phi: impl Fn(f64) -> f64,
        psi: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let nodes = grid.nodes();
        let th: Vec<f64> = nodes.iter().map(|&s| theta(s)).collect();
        let ph: Vec<f64> = nodes.iter().map(|&s| phi(s)).collect();
        let ps: Vec<f64> = nodes.iter().map(|&s| psi(s)).collect();
        EulerField::new(grid.clone(), th, ph, ps)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    /// Nodal values of the selected angle (0 = theta, 1 = phi, 2 = psi).
    pub fn angle(&self, which: usize) -> &[f64] {
        match which {
            0 => &self.theta,
            1 => &self.phi,
            2 => &self.psi,
            _ => panic!("angle index must be 0, 1 or 2"),
        }
    }

    /// Largest absolute nodal difference to another field on the same grid.
    pub fn max_distance(&self, other: &EulerField) -> f64 {
        assert_eq!(self.n_nodes(), other.n_nodes());
        let mut d: f64 = 0.0;
        for i in 0..self.n_nodes() {
            d = d.max((self.theta[i] - other.theta[i]).abs());
            d = d.max((self.phi[i] - other.phi[i]).abs());
            d = d.max((self.psi[i] - other.psi[i]).abs());
        }
        d
    }
}

/// A nodal perturbation triple `(alpha, beta, gamma)` acting on
/// `(theta, phi, psi)` respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Perturbation {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() || alpha.len() != gamma.len() {
            return Err(RodError::validation(
                "perturbation",
                "alpha, beta, gamma must have equal lengths",
            ));
        }
        Ok(Perturbation { alpha, beta, gamma })
    }

    pub fn zeros(n_nodes: usize) -> Self {
        Perturbation {
            alpha: vec![0.0; n_nodes],
            beta: vec![0.0; n_nodes],
            gamma: vec![0.0; n_nodes],
        }
    }

    /// Sample closed-form direction functions at the grid nodes.
    pub fn from_functions(
        grid: &Grid,
        alpha: impl Fn(f64) -> f64,
        beta: impl Fn(f64) -> f64,
        gamma: impl Fn(f64) -> f64,
    ) -> Self {
        let nodes = grid.nodes();
        Perturbation {
            alpha: nodes.iter().map(|&s| alpha(s)).collect(),
            beta: nodes.iter().map(|&s| beta(s)).collect(),
            gamma: nodes.iter().map(|&s| gamma(s)).collect(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.alpha.len()
    }

    pub fn component(&self, which: usize) -> &[f64] {
        match which {
            0 => &self.alpha,
            1 => &self.beta,
            2 => &self.gamma,
            _ => panic!("component index must be 0, 1 or 2"),
        }
    }

    pub fn scaled(&self, factor: f64) -> Perturbation {
        Perturbation {
            alpha: self.alpha.iter().map(|v| v * factor).collect(),
            beta: self.beta.iter().map(|v| v * factor).collect(),
            gamma: self.gamma.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Perturbation) -> Perturbation {
        assert_eq!(self.n_nodes(), other.n_nodes());
        Perturbation {
            alpha: self
                .alpha
                .iter()
                .zip(&other.alpha)
                .map(|(a, b)| a + b)
                .collect(),
            beta: self
                .beta
                .iter()
                .zip(&other.beta)
                .map(|(a, b)| a + b)
                .collect(),
            gamma: self
                .gamma
                .iter()
                .zip(&other.gamma)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Perturbation) -> Perturbation {
        self.add(&other.scaled(-1.0))
    }

    pub fn max_norm(&self) -> f64 {
        self.alpha
            .iter()
            .chain(&self.beta)
            .chain(&self.gamma)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
