//! Strains, tangents, and centerline reconstruction.

use crate::field::EulerField;
use crate::grid::Grid;

/// Strain components sampled at the energy quadrature points (cell midpoints):
/// two bending curvatures `kappa1`, `kappa2` and the physical twist `kappa3`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainField {
    pub kappa1: Vec<f64>,
    pub kappa2: Vec<f64>,
    pub kappa3: Vec<f64>,
}

impl StrainField {
    pub fn len(&self) -> usize {
        self.kappa3.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa3.is_empty()
    }
}

/// Quadrature rule for cumulative integrals along the rod.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    Midpoint,
    Trapezoid,
}

/// Reconstructed rod centerline: one point per grid node, starting at the
/// prescribed origin, with the arc-length coordinate of each node attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Centerline {
    pub s: Vec<f64>,
    pub points: Vec<[f64; 3]>,
}

impl Centerline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn d3(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Strains of the affine interpolant: derivatives are the exact cell-wise
/// constants, angles enter through their cell-midpoint averages.
pub fn strains(field: &EulerField) -> StrainField {
    let grid = field.grid();
    let h = grid.h();
    let n = grid.n_cells();
    let (theta, phi, psi) = (field.theta(), field.phi(), field.psi());
    let mut kappa1 = Vec::with_capacity(n);
    let mut kappa2 = Vec::with_capacity(n);
    let mut kappa3 = Vec::with_capacity(n);
    for c in 0..n {
        let th_s = (theta[c + 1] - theta[c]) / h;
        let ph_s = (phi[c + 1] - phi[c]) / h;
        let ps_s = (psi[c + 1] - psi[c]) / h;
        let th = 0.5 * (theta[c + 1] + theta[c]);
        let ps = 0.5 * (psi[c + 1] + psi[c]);
        let (sth, cth) = th.sin_cos();
        let (sps, cps) = ps.sin_cos();
        kappa1.push(-ph_s * sth * cps + th_s * sps);
        kappa2.push(ph_s * sth * sps + th_s * cps);
        kappa3.push(ps_s + ph_s * cth);
    }
    StrainField {
        kappa1,
        kappa2,
        kappa3,
    }
}

/// Unit tangent `d3 = (sin(theta)cos(phi), sin(theta)sin(phi), cos(theta))`
/// at every node.
pub fn tangent(field: &EulerField) -> Vec<[f64; 3]> {
    field
        .theta()
        .iter()
        .zip(field.phi())
        .map(|(&th, &ph)| d3(th, ph))
        .collect()
}

/// Centerline by cumulative trapezoid quadrature of the tangent from `origin`.
pub fn centerline(field: &EulerField, origin: [f64; 3]) -> Centerline {
    centerline_with_rule(field, origin, QuadratureRule::Trapezoid)
}

/// Centerline with an explicit accumulation rule.
pub fn centerline_with_rule(
    field: &EulerField,
    origin: [f64; 3],
    rule: QuadratureRule,
) -> Centerline {
    let grid = field.grid();
    let h = grid.h();
    let n = grid.n_cells();
    let mut points = Vec::with_capacity(n + 1);
    points.push(origin);
    let mut r = origin;
    match rule {
        QuadratureRule::Trapezoid => {
            let tangents = tangent(field);
            for c in 0..n {
                let a = tangents[c];
                let b = tangents[c + 1];
                for k in 0..3 {
                    r[k] += 0.5 * h * (a[k] + b[k]);
                }
                points.push(r);
            }
        }
        QuadratureRule::Midpoint => {
            let (theta, phi) = (field.theta(), field.phi());
            for c in 0..n {
                let th = 0.5 * (theta[c + 1] + theta[c]);
                let ph = 0.5 * (phi[c + 1] + phi[c]);
                let t = d3(th, ph);
                for k in 0..3 {
                    r[k] += h * t[k];
                }
                points.push(r);
            }
        }
    }
    Centerline {
        s: grid.nodes(),
        points,
    }
}

/// Composite midpoint quadrature of nodal data interpreted as an affine
/// interpolant on `grid` (the rule used for all energy-type integrals).
pub fn midpoint_quadrature(grid: &Grid, nodal: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let h = grid.h();
    let mut acc = 0.0;
    for c in 0..grid.n_cells() {
        acc += f(0.5 * (nodal[c] + nodal[c + 1]));
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn axis_aligned_tangent() {
        let grid = Grid::unit(2).unwrap();
        let f = EulerField::from_functions(&grid, |_| PI / 2.0, |_| 0.0, |_| 0.0).unwrap();
        for t in tangent(&f) {
            assert_relative_eq!(t[0], 1.0, epsilon = 1e-15);
            assert_relative_eq!(t[1], 0.0, epsilon = 1e-15);
            assert!(t[2].abs() < 1e-15);
        }
    }

    #[test]
    fn oblique_tangent_matches_trigonometry() {
        let grid = Grid::unit(2).unwrap();
        let f = EulerField::from_functions(&grid, |_| PI / 3.0, |_| PI / 4.0, |_| 0.0).unwrap();
        let t = tangent(&f)[0];
        let exp = [
            (3.0f64.sqrt() / 2.0) * (2.0f64.sqrt() / 2.0),
            (3.0f64.sqrt() / 2.0) * (2.0f64.sqrt() / 2.0),
            0.5,
        ];
        for k in 0..3 {
            assert_relative_eq!(t[k], exp[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn straight_rod_centerline_runs_along_x() {
        let grid = Grid::unit(10).unwrap();
        let f = EulerField::from_functions(&grid, |_| PI / 2.0, |_| 0.0, |s| 2.0 * PI * s).unwrap();
        let c = centerline(&f, [0.0; 3]);
        assert_eq!(c.len(), 11);
        for (i, p) in c.points.iter().enumerate() {
            assert_relative_eq!(p[0], grid.node(i), epsilon = 1e-14);
            assert!(p[1].abs() < 1e-14 && p[2].abs() < 1e-14);
        }
    }

    #[test]
    fn midpoint_and_trapezoid_rules_agree_at_second_order() {
        let grid = Grid::unit(64).unwrap();
        let f = EulerField::from_functions(&grid, |s| PI / 2.0 + 0.3 * (PI * s).sin(), |s| s, |_| 0.0)
            .unwrap();
        let a = centerline(&f, [0.0; 3]).points[64];
        let b = centerline_with_rule(&f, [0.0; 3], QuadratureRule::Midpoint).points[64];
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-3);
        }
    }
}
