//! Kirchhoff rod toolkit in the Euler-angle formulation.
//!
//! The crate builds discrete rod configurations on 1D grids, constructs the
//! classical exact equilibria (straight twisted state, helices, localized
//! buckling profiles), classifies their stability through quadratic-form
//! analysis and discrete Hessian spectra, and relaxes unstable states with an
//! implicit L2-gradient flow that preserves isoperimetric end conditions.

pub mod boundary;
pub mod energy;
pub mod equilibria;
pub mod error;
pub mod field;
pub mod flow;
pub mod grid;
pub mod io;
pub mod kinematics;
pub mod linalg;
pub mod mass;
pub mod params;
pub mod stability;

pub use boundary::{BcKind, BoundarySpec, DofMap, IsoAxis, IsoConstraint};
pub use energy::{el_residual, energy, energy_gradient_nodal};
pub use equilibria::{helix_state, perturb, soliton_state, trivial_state, HelixSpec, SolitonSpec};
pub use error::{ErrorKind, Result, RodError};
pub use field::{EulerField, Perturbation, DEFAULT_THETA_MIN};
pub use flow::{
    constrained_step, constraint_integral, constraint_residual, discrete_gradient,
    discrete_gradient_with_mass, implicit_step, run_flow, FlowConfig, FlowOutcome, FlowState,
    MassKind, StepRecord, Termination,
};
pub use grid::Grid;
pub use kinematics::{centerline, centerline_with_rule, strains, tangent, Centerline, QuadratureRule, StrainField};
pub use params::RodParams;
pub use stability::{
    analytic_modes_trivial, assemble_hessian, branch_continuation, classify_helix,
    classify_trivial, classify_trivial_global, critical_forces, helix_witness_direction,
    morse_index, newton_equilibrium, second_variation_helix, second_variation_trivial, spectrum,
    spectrum_with_normalization, Branch, BranchPoint, Classification, Hessian, Normalization,
    QuadraticFormSample, SpectrumReport, StabilityVerdict, VerdictSource,
};
