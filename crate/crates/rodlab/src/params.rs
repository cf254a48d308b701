//! Material and loading constants.

use crate::error::{Result, RodError};

/// Material constants and terminal load of an isotropic inextensible rod.
///
/// `bend_a` and `twist_c` are the bending and twist stiffnesses, `length_l`
/// the physical rod length (the arc-length variable itself is scaled), and
/// `force` the terminal load vector; the load enters the energy as
/// `force * length_l^2 . d3`. `twist_m` counts imposed end rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct RodParams {
    pub bend_a: f64,
    pub twist_c: f64,
    pub length_l: f64,
    pub force: [f64; 3],
    pub twist_m: f64,
}

impl RodParams {
    pub fn new(
        bend_a: f64,
        twist_c: f64,
        length_l: f64,
        force: [f64; 3],
        twist_m: f64,
    ) -> Result<Self> {
        if !(bend_a > 0.0) || !bend_a.is_finite() {
            return Err(RodError::validation("params.bend_a", "must be positive"));
        }
        if !(twist_c > 0.0) || !twist_c.is_finite() {
            return Err(RodError::validation("params.twist_c", "must be positive"));
        }
        if !(length_l > 0.0) || !length_l.is_finite() {
            return Err(RodError::validation("params.length_l", "must be positive"));
        }
        if force.iter().any(|f| !f.is_finite()) || !twist_m.is_finite() {
            return Err(RodError::validation(
                "params",
                "force and twist_m must be finite",
            ));
        }
        Ok(RodParams {
            bend_a,
            twist_c,
            length_l,
            force,
            twist_m,
        })
    }

    /// Unloaded rod with unit length.
    pub fn unloaded(bend_a: f64, twist_c: f64, twist_m: f64) -> Result<Self> {
        RodParams::new(bend_a, twist_c, 1.0, [0.0; 3], twist_m)
    }

    /// Copy with a different force vector.
    pub fn with_force(&self, force: [f64; 3]) -> Self {
        RodParams {
            force,
            ..self.clone()
        }
    }

    /// Stiffness ratio C/A.
    pub fn stiffness_ratio(&self) -> f64 {
        self.twist_c / self.bend_a
    }

    /// Load vector scaled by L^2, as it appears in the energy density.
    pub fn force_l2(&self) -> [f64; 3] {
        let l2 = self.length_l * self.length_l;
        [self.force[0] * l2, self.force[1] * l2, self.force[2] * l2]
    }

    /// Non-fatal diagnostics. Physically sensible isotropic rods have
    /// C/A in [2/3, 1]; values outside only earn a warning.
    pub fn warnings(&self) -> Vec<String> {
        let ratio = self.stiffness_ratio();
        if !(2.0 / 3.0..=1.0).contains(&ratio) {
            vec![format!(
                "stiffness ratio C/A = {ratio:.6} lies outside the physical range [2/3, 1]"
            )]
        } else {
            Vec::new()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_constants() {
        assert!(RodParams::new(0.0, 0.75, 1.0, [0.0; 3], 1.0).is_err());
        assert!(RodParams::new(1.0, -0.75, 1.0, [0.0; 3], 1.0).is_err());
        assert!(RodParams::new(1.0, 0.75, 0.0, [0.0; 3], 1.0).is_err());
        assert!(RodParams::new(1.0, 0.75, 1.0, [f64::NAN, 0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn stiffness_ratio_check_warns_but_does_not_fail() {
        let in_range = RodParams::unloaded(1.0, 0.75, 1.0).unwrap();
        assert!(in_range.warnings().is_empty());

        let out_of_range = RodParams::unloaded(1.0, 0.1, 1.0).unwrap();
        assert_eq!(out_of_range.warnings().len(), 1);
        assert!(out_of_range.warnings()[0].contains("C/A"));
    }

    #[test]
    fn force_l2_scales_by_length_squared() {
        let p = RodParams::new(1.0, 0.75, 10.0, [0.0, 0.0, 2.0], 0.0).unwrap();
        assert_eq!(p.force_l2(), [0.0, 0.0, 200.0]);
    }
}
