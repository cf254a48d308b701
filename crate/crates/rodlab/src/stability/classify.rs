//! Closed-form stability classification of the straight twisted state under
//! the four supported boundary-condition families, of a global energy
//! comparison, and of clamped helices.

use super::{Classification, StabilityVerdict, VerdictSource};
use crate::boundary::{BoundarySpec, IsoAxis};
use crate::equilibria::HelixSpec;
use crate::error::{Result, RodError};
use crate::params::RodParams;
use std::f64::consts::PI;

/// The boundary-condition families with closed-form verdicts for the
/// straight state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TrivialProblem {
    /// All three angles clamped at both ends.
    Clamped,
    /// Clamped, with the y and z closure integrals held fixed.
    ClampedIso,
    /// Free (natural) ends for the bending angles, twist clamped.
    Pinned,
    /// One bending angle clamped at both ends, the other free at both ends,
    /// twist clamped.
    MixedEnds,
}

fn recognize(params: &RodParams, bcs: &BoundarySpec) -> Result<TrivialProblem> {
    use crate::boundary::BcKind::{DirichletValue, Neumann};

    // The twist angle is clamped with a total turn of 2 pi M in every
    // supported problem.
    match bcs.psi {
        [DirichletValue(a), DirichletValue(b)] => {
            let turn = 2.0 * PI * params.twist_m;
            if (b - a - turn).abs() > 1e-9 * turn.abs().max(1.0) {
                return Err(RodError::validation(
                    "bcs.psi",
                    format!("end values differ by {} but 2 pi M = {}", b - a, turn),
                ));
            }
        }
        _ => {
            return Err(RodError::validation(
                "bcs.psi",
                "the twist angle must be clamped at both ends",
            ));
        }
    }

    let polar_clamped_flat = |pair: &[crate::boundary::BcKind; 2]| -> Result<bool> {
        match *pair {
            [DirichletValue(a), DirichletValue(b)] => {
                if (a - PI / 2.0).abs() > 1e-9 || (b - PI / 2.0).abs() > 1e-9 {
                    Err(RodError::validation(
                        "bcs.theta",
                        "clamped values must equal pi/2 for the straight state",
                    ))
                } else {
                    Ok(true)
                }
            }
            [Neumann, Neumann] => Ok(false),
            _ => Err(RodError::validation(
                "bcs",
                "each bending angle must be clamped at both ends or free at both ends",
            )),
        }
    };
    let azimuth_clamped = |pair: &[crate::boundary::BcKind; 2]| -> Result<bool> {
        match *pair {
            [DirichletValue(a), DirichletValue(b)] => {
                if (a - b).abs() > 1e-9 {
                    Err(RodError::validation(
                        "bcs.phi",
                        "clamped values must match at both ends for the straight state",
                    ))
                } else {
                    Ok(true)
                }
            }
            [Neumann, Neumann] => Ok(false),
            _ => Err(RodError::validation(
                "bcs",
                "each bending angle must be clamped at both ends or free at both ends",
            )),
        }
    };

    let theta_clamped = polar_clamped_flat(&bcs.theta)?;
    let phi_clamped = azimuth_clamped(&bcs.phi)?;

    let problem = match (theta_clamped, phi_clamped) {
        (true, true) => {
            if bcs.iso_constraints.is_empty() {
                TrivialProblem::Clamped
            } else if bcs.iso_constraints == [IsoAxis::Y, IsoAxis::Z] {
                TrivialProblem::ClampedIso
            } else {
                return Err(RodError::validation(
                    "bcs.iso_constraints",
                    "clamped-state verdicts cover the fixed y and z closure integrals only",
                ));
            }
        }
        (false, false) => TrivialProblem::Pinned,
        _ => TrivialProblem::MixedEnds,
    };
    if problem != TrivialProblem::ClampedIso && !bcs.iso_constraints.is_empty() {
        return Err(RodError::validation(
            "bcs.iso_constraints",
            "no closed-form verdict covers closure constraints for this end condition",
        ));
    }
    Ok(problem)
}

/// Verdict assuming the undecided window is `(low, high)` with the stable
/// region below and the unstable region (possibly empty) above.
fn verdict_window(fl2: f64, low: f64, high: f64, source: VerdictSource) -> StabilityVerdict {
    let classification = if low == high {
        if fl2 < low {
            Classification::Stable
        } else {
            Classification::Unstable
        }
    } else if fl2 <= low {
        Classification::Stable
    } else if fl2 >= high {
        Classification::Unstable
    } else {
        Classification::Gap
    };
    StabilityVerdict {
        classification,
        threshold_low: low,
        threshold_high: high,
        source,
    }
}

/// Stability of the straight twisted state under load `F` along the rod
/// axis, for the boundary-condition family encoded in `bcs`.
///
/// Clamped ends give the sharp threshold `F L^2 = A pi^2 (1 - (MC/A)^2)`.
/// Clamped ends with the y, z closure integrals fixed keep the same stable
/// side; instability above is only known when `MC/A` is an odd integer >= 3,
/// otherwise the verdict above the threshold is a gap. Free bending ends are
/// stable for `F L^2 < -4 pi^2 M^2 C^2 / A` (when `A < 2MC`) or
/// `F L^2 < -2 pi^2 M C` (when `A > 2MC`) with no instability counterpart.
/// Mixed ends are stable below `min{A pi^2 (1 - r^2), 0}` and unstable above
/// `A pi^2 (1 - r^2) / (1 + r^2)` with `r = 2MC/A`.
pub fn classify_trivial(params: &RodParams, bcs: &BoundarySpec) -> Result<StabilityVerdict> {
    if params.force[1] != 0.0 || params.force[2] != 0.0 {
        return Err(RodError::validation(
            "params.force",
            "straight-state analysis carries the load along the x axis only",
        ));
    }
    let fl2 = params.force_l2()[0];
    let a = params.bend_a;
    let c = params.twist_c;
    let m = params.twist_m;
    let problem = recognize(params, bcs)?;
    let verdict = match problem {
        TrivialProblem::Clamped => {
            let ratio = m * c / a;
            let t = a * PI * PI * (1.0 - ratio * ratio);
            verdict_window(fl2, t, t, VerdictSource::Prop4)
        }
        TrivialProblem::ClampedIso => {
            let ratio = m * c / a;
            let t = a * PI * PI * (1.0 - ratio * ratio);
            let p = ((ratio - 1.0) / 2.0).round();
            let odd_ratio = p >= 1.0 && (ratio - (2.0 * p + 1.0)).abs() <= 1e-9 * ratio.abs();
            if odd_ratio {
                verdict_window(fl2, t, t, VerdictSource::Prop5)
            } else {
                verdict_window(fl2, t, f64::INFINITY, VerdictSource::Prop5)
            }
        }
        TrivialProblem::Pinned => {
            let t = if a < 2.0 * m * c {
                -4.0 * PI * PI * m * m * c * c / a
            } else {
                -2.0 * PI * PI * m * c
            };
            verdict_window(fl2, t, f64::INFINITY, VerdictSource::Prop6)
        }
        TrivialProblem::MixedEnds => {
            let lam = 2.0 * m * c / a;
            let base = a * PI * PI * (1.0 - lam * lam);
            let low = base.min(0.0);
            let high = base / (1.0 + lam * lam);
            verdict_window(fl2, low, high.max(low), VerdictSource::Prop7)
        }
    };
    Ok(verdict)
}

/// Global energy comparison for the straight twisted state: `true` when every
/// competitor in the perturbation class with `cos^2(polar deviation) >=
/// alpha_bound` has higher energy, which holds iff `alpha_bound > 4MC/A` and
/// `max{F L^2, 0} < A pi^2 alpha_bound - 4 pi^2 M C`.
pub fn classify_trivial_global(params: &RodParams, alpha_bound: f64) -> Result<bool> {
    if !(alpha_bound > 0.0 && alpha_bound <= 1.0) {
        return Err(RodError::validation(
            "alpha_bound",
            "must lie in (0, 1]",
        ));
    }
    if params.force[1] != 0.0 || params.force[2] != 0.0 {
        return Err(RodError::validation(
            "params.force",
            "straight-state analysis carries the load along the x axis only",
        ));
    }
    let a = params.bend_a;
    let c = params.twist_c;
    let m = params.twist_m;
    let fl2 = params.force_l2()[0];
    Ok(alpha_bound > 4.0 * m * c / a
        && fl2.max(0.0) < a * PI * PI * alpha_bound - 4.0 * PI * PI * m * c)
}

/// Decided regions of the load line for a helix, used to derive thresholds.
enum UnstableRegion {
    Above(f64),
    Below(f64),
    All,
    None,
}

/// Stability of a clamped uniform helix under its axial load.
///
/// With `m := |F| L^2 / (2 pi |lambda|)`, the helix is stable when `m < A`
/// and `m (1/A + 4 pi^2 lambda^2 / (A - m)) < pi^2 (1 - 4 lambda^2)`;
/// equivalently `|F L^2|` lies below `2 pi |lambda|` times the smaller root
/// of `m^2 - A(1 + pi^2) m + A^2 pi^2 (1 - 4 lambda^2)`. It is unstable when
/// `F L^2 cos theta0 > 2 A pi^2 (1 - lambda^2)`. Between the two regions the
/// verdict is a gap. At `F = 0` this reduces to: stable iff `|lambda| < 1/2`,
/// unstable iff `|lambda| > 1`.
pub fn classify_helix(spec: &HelixSpec) -> Result<StabilityVerdict> {
    let a = spec.params.bend_a;
    let lam = spec.lambda;
    let fl2 = spec.params.force_l2()[2];
    let cos_t0 = spec.theta0.cos();

    // Stable window: |fl2| < s_star (empty when |lambda| >= 1/2).
    let disc = (1.0 + PI * PI).powi(2) - 4.0 * PI * PI * (1.0 - 4.0 * lam * lam);
    let m_small = 0.5 * a * ((1.0 + PI * PI) - disc.sqrt());
    let s_star = (2.0 * PI * lam.abs() * m_small).max(0.0);

    // Unstable region from the explicit downhill direction.
    let su = 2.0 * a * PI * PI * (1.0 - lam * lam);
    let unstable = if cos_t0 == 0.0 {
        if su < 0.0 {
            UnstableRegion::All
        } else {
            UnstableRegion::None
        }
    } else if cos_t0 > 0.0 {
        UnstableRegion::Above(su / cos_t0)
    } else {
        UnstableRegion::Below(su / cos_t0)
    };

    let stable_here = s_star > 0.0 && fl2.abs() <= s_star;
    let unstable_here = match unstable {
        UnstableRegion::All => true,
        UnstableRegion::None => false,
        UnstableRegion::Above(u) => fl2 >= u,
        UnstableRegion::Below(u) => fl2 <= u,
    };

    let classification = if stable_here {
        Classification::Stable
    } else if unstable_here {
        Classification::Unstable
    } else {
        Classification::Gap
    };

    // Undecided window relevant to the query. The decided-stable interval is
    // (-s_star, s_star); the decided-unstable region is one-sided or empty.
    let (low, high) = match unstable {
        UnstableRegion::All => (f64::NEG_INFINITY, f64::NEG_INFINITY),
        UnstableRegion::None => {
            if s_star == 0.0 {
                (f64::NEG_INFINITY, f64::INFINITY)
            } else if fl2 < -s_star {
                (f64::NEG_INFINITY, -s_star)
            } else {
                (s_star, f64::INFINITY)
            }
        }
        UnstableRegion::Above(u) => {
            let uc = u.max(s_star);
            if s_star == 0.0 {
                (f64::NEG_INFINITY, uc)
            } else if fl2 < -s_star {
                (f64::NEG_INFINITY, -s_star)
            } else {
                (s_star, uc)
            }
        }
        UnstableRegion::Below(u) => {
            let uc = u.min(-s_star);
            if s_star == 0.0 {
                (uc, f64::INFINITY)
            } else if fl2 > s_star {
                (s_star, f64::INFINITY)
            } else {
                (uc, -s_star)
            }
        }
    };
    Ok(StabilityVerdict {
        classification,
        threshold_low: low,
        threshold_high: high,
        source: VerdictSource::Prop8,
    })
}
