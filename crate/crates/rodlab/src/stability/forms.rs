//! Analytic second-variation quadratic forms, evaluated by the same midpoint
//! rule the discrete Hessian derives from: cell-constant slopes of the
//! piecewise-linear interpolant, midpoint averages for undifferentiated
//! factors. Perturbations are sampled on the uniform unit grid.

use crate::boundary::BoundarySpec;
use crate::equilibria::HelixSpec;
use crate::error::{Result, RodError};
use crate::field::Perturbation;
use crate::params::RodParams;
use std::f64::consts::PI;

/// One evaluation of a second-variation quadratic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFormSample {
    pub value: f64,
}

fn endpoint_tol(direction: &Perturbation) -> f64 {
    1e-12 * direction.max_norm().max(1.0)
}

fn require_vanishing(
    direction: &Perturbation,
    which: usize,
    end: usize,
    tol: f64,
) -> Result<()> {
    let comp = direction.component(which);
    let node = if end == 0 { 0 } else { comp.len() - 1 };
    if comp[node].abs() > tol {
        let names = ["alpha", "beta", "gamma"];
        return Err(RodError::validation(
            format!("direction.{}[{}]", names[which], node),
            "must vanish at a clamped end",
        ));
    }
    Ok(())
}

/// Second variation of the rod energy at the straight twisted state,
/// evaluated on `direction = (alpha, beta, gamma)`:
/// `int A(alpha_s^2 + beta_s^2) + C gamma_s^2 - 4 pi M C alpha beta_s
///  - F L^2 (alpha^2 + beta^2) ds`.
///
/// The load must act along the rod axis (x); `gamma` must vanish at both
/// ends, `alpha` and `beta` wherever `bcs` clamps the matching angle.
pub fn second_variation_trivial(
    direction: &Perturbation,
    params: &RodParams,
    bcs: &BoundarySpec,
) -> Result<QuadraticFormSample> {
    if params.force[1] != 0.0 || params.force[2] != 0.0 {
        return Err(RodError::validation(
            "params.force",
            "straight-state analysis carries the load along the x axis only",
        ));
    }
    let n = direction.n_nodes();
    if n < 2 {
        return Err(RodError::validation("direction", "needs at least two nodes"));
    }
    let tol = endpoint_tol(direction);
    for end in 0..2 {
        require_vanishing(direction, 2, end, tol)?;
        for which in 0..2 {
            if bcs.angle(which)[end].is_dirichlet() {
                require_vanishing(direction, which, end, tol)?;
            }
        }
    }

    let (a, c) = (params.bend_a, params.twist_c);
    let m = params.twist_m;
    let fl2 = params.force_l2()[0];
    let h = 1.0 / (n - 1) as f64;
    let (al, be, ga) = (&direction.alpha, &direction.beta, &direction.gamma);
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let a_s = (al[i + 1] - al[i]) / h;
        let b_s = (be[i + 1] - be[i]) / h;
        let g_s = (ga[i + 1] - ga[i]) / h;
        let a_mid = 0.5 * (al[i + 1] + al[i]);
        let b_mid = 0.5 * (be[i + 1] + be[i]);
        acc += a * (a_s * a_s + b_s * b_s) + c * g_s * g_s
            - 4.0 * PI * m * c * a_mid * b_s
            - fl2 * (a_mid * a_mid + b_mid * b_mid);
    }
    Ok(QuadraticFormSample { value: acc * h })
}

/// Second variation of the rod energy at a uniform helix, evaluated on
/// `direction = (alpha, beta, gamma)`:
/// `int A(alpha_s^2 + beta_s^2 sin^2 t0 + 4 pi l alpha beta_s sin t0 cos t0
///  - 4 pi^2 l^2 alpha^2 sin^2 t0) + (F L^2/(pi l)) alpha beta_s sin t0
///  + C (gamma_s + beta_s cos t0 - 2 pi l alpha sin t0)^2 ds`
/// with `t0 = theta0`, `l = lambda`. All components must vanish at both ends.
pub fn second_variation_helix(
    direction: &Perturbation,
    spec: &HelixSpec,
) -> Result<QuadraticFormSample> {
    let n = direction.n_nodes();
    if n < 2 {
        return Err(RodError::validation("direction", "needs at least two nodes"));
    }
    let tol = endpoint_tol(direction);
    for end in 0..2 {
        for which in 0..3 {
            require_vanishing(direction, which, end, tol)?;
        }
    }

    let a = spec.params.bend_a;
    let c = spec.params.twist_c;
    let fl2 = spec.params.force_l2()[2];
    let lam = spec.lambda;
    let (st, ct) = spec.theta0.sin_cos();
    let h = 1.0 / (n - 1) as f64;
    let (al, be, ga) = (&direction.alpha, &direction.beta, &direction.gamma);
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let a_s = (al[i + 1] - al[i]) / h;
        let b_s = (be[i + 1] - be[i]) / h;
        let g_s = (ga[i + 1] - ga[i]) / h;
        let a_mid = 0.5 * (al[i + 1] + al[i]);
        let coupled = g_s + b_s * ct - 2.0 * PI * lam * a_mid * st;
        acc += a
            * (a_s * a_s + b_s * b_s * st * st + 4.0 * PI * lam * a_mid * b_s * st * ct
                - 4.0 * PI * PI * lam * lam * a_mid * a_mid * st * st)
            + fl2 / (PI * lam) * a_mid * b_s * st
            + c * coupled * coupled;
    }
    Ok(QuadraticFormSample { value: acc * h })
}

/// The explicit downhill candidate for a clamped helix: on this direction the
/// helix form evaluates to `2 A pi^2 (1 - lambda^2) - F L^2 cos theta0`.
pub fn helix_witness_direction(n_nodes: usize, spec: &HelixSpec) -> Perturbation {
    let (st, ct) = spec.theta0.sin_cos();
    let lam = spec.lambda;
    let h = 1.0 / (n_nodes - 1) as f64;
    let mut alpha = Vec::with_capacity(n_nodes);
    let mut beta = Vec::with_capacity(n_nodes);
    let mut gamma = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let s = i as f64 * h;
        let w = (2.0 * PI * s).cos();
        alpha.push((2.0 * PI * s).sin());
        beta.push(lam * ct / st * (w - 1.0));
        gamma.push(lam / st * (1.0 - w));
    }
    Perturbation::new(alpha, beta, gamma).expect("constructed with equal lengths")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::trivial_state;
    use crate::grid::Grid;
    use approx::assert_relative_eq;

    fn dirichlet_bcs(m: f64, n: usize) -> BoundarySpec {
        let grid = Grid::unit(n).unwrap();
        BoundarySpec::clamped_to(&trivial_state(&grid, m).unwrap())
    }

    fn unit_samples(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn pure_twist_direction_integrates_the_twist_stiffness() {
        let n = 4001;
        let zeros = vec![0.0; n];
        let gamma = unit_samples(n, |s| (PI * s).sin());
        let dir = Perturbation::new(zeros.clone(), zeros, gamma).unwrap();
        let params = RodParams::unloaded(1.0, 0.75, 1.0).unwrap();
        let q = second_variation_trivial(&dir, &params, &dirichlet_bcs(1.0, n)).unwrap();
        assert_relative_eq!(q.value, 0.75 * PI * PI / 2.0, epsilon = 1e-5);
    }

    #[test]
    fn clamped_direction_must_vanish_at_the_ends() {
        let n = 11;
        let ones = vec![1.0; n];
        let zeros = vec![0.0; n];
        let dir = Perturbation::new(ones, zeros.clone(), zeros).unwrap();
        let params = RodParams::unloaded(1.0, 0.75, 1.0).unwrap();
        assert!(second_variation_trivial(&dir, &params, &dirichlet_bcs(1.0, n)).is_err());
    }

    #[test]
    fn transverse_load_is_rejected() {
        let n = 11;
        let zeros = vec![0.0; n];
        let gamma = unit_samples(n, |s| (PI * s).sin());
        let dir = Perturbation::new(zeros.clone(), zeros, gamma).unwrap();
        let params = RodParams::new(1.0, 0.75, 1.0, [0.0, 1.0, 0.0], 1.0).unwrap();
        assert!(second_variation_trivial(&dir, &params, &dirichlet_bcs(1.0, n)).is_err());
    }

    #[test]
    fn helix_witness_value_matches_the_closed_form() {
        let n = 20001;
        let params = RodParams::new(1.0, 0.75, 1.0, [0.0, 0.0, 2.0], 1.0).unwrap();
        let spec = HelixSpec::new(1.0, 0.6, params).unwrap();
        let dir = helix_witness_direction(n, &spec);
        let q = second_variation_helix(&dir, &spec).unwrap();
        let want = 2.0 * PI * PI * (1.0 - 0.36) - 2.0 * (1.0f64).cos();
        assert_relative_eq!(q.value, want, epsilon = 1e-5);
    }

    #[test]
    fn parallelogram_law_holds() {
        let n = 501;
        let params = RodParams::new(1.0, 0.75, 1.0, [1.5, 0.0, 0.0], 1.0).unwrap();
        let bcs = dirichlet_bcs(1.0, n);
        let u = Perturbation::new(
            unit_samples(n, |s| (PI * s).sin()),
            unit_samples(n, |s| (2.0 * PI * s).sin()),
            unit_samples(n, |s| (3.0 * PI * s).sin()),
        )
        .unwrap();
        let v = Perturbation::new(
            unit_samples(n, |s| s * (1.0 - s)),
            unit_samples(n, |s| (PI * s).sin() * 0.3),
            unit_samples(n, |s| (PI * s).sin().powi(2)),
        )
        .unwrap();
        let q = |d: &Perturbation| {
            second_variation_trivial(d, &params, &bcs).unwrap().value
        };
        let sum = q(&u.add(&v)) + q(&u.sub(&v));
        let twice = 2.0 * q(&u) + 2.0 * q(&v);
        assert_relative_eq!(sum, twice, epsilon = 1e-9);
    }
}
