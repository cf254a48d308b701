//! Second-variation machinery: analytic quadratic forms, discrete Hessians,
//! spectra, closed-form stability classifiers, and bifurcation branches.

mod branch;
mod classify;
mod forms;
mod hessian;
mod modes;
mod spectrum;

pub use branch::{branch_continuation, newton_equilibrium, Branch, BranchPoint};
pub use classify::{classify_helix, classify_trivial, classify_trivial_global};
pub use forms::{
    helix_witness_direction, second_variation_helix, second_variation_trivial,
    QuadraticFormSample,
};
pub use hessian::{assemble_hessian, Hessian};
pub use modes::{analytic_modes_trivial, critical_forces};
pub use spectrum::{morse_index, spectrum, spectrum_with_normalization, SpectrumReport};

pub(crate) use branch::apply_update;
pub(crate) use hessian::{assemble_banded, gradient_free};

use std::fmt;

/// Outcome of a closed-form stability classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Stable,
    Unstable,
    /// The sufficient conditions for stability and for instability both fail;
    /// the theory is silent at this load.
    Gap,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Classification::Stable => "stable",
            Classification::Unstable => "unstable",
            Classification::Gap => "gap",
        };
        f.write_str(label)
    }
}

/// Identifier of the closed-form result a verdict is based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictSource {
    Prop3,
    Prop4,
    Prop5,
    Prop6,
    Prop7,
    Prop8,
}

impl fmt::Display for VerdictSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            VerdictSource::Prop3 => "Prop 3",
            VerdictSource::Prop4 => "Prop 4",
            VerdictSource::Prop5 => "Prop 5",
            VerdictSource::Prop6 => "Prop 6",
            VerdictSource::Prop7 => "Prop 7",
            VerdictSource::Prop8 => "Prop 8",
        };
        f.write_str(label)
    }
}

/// Classification of one equilibrium at one load, together with the window of
/// loads `F L^2` the classifier cannot decide.
///
/// `threshold_low == threshold_high` marks a sharp threshold with no undecided
/// window. Otherwise `[threshold_low, threshold_high]` is the undecided
/// connected component relevant to the queried load: the one containing it for
/// a `Gap` verdict, the adjacent one otherwise. Infinite endpoints mean the
/// undecided region is unbounded on that side.
///
/// Boundary conventions at the measure-zero equality cases: the closure of a
/// nonempty stable window classifies as stable, a sharp threshold and the
/// closure of the unstable region classify as unstable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub classification: Classification,
    pub threshold_low: f64,
    pub threshold_high: f64,
    pub source: VerdictSource,
}

/// Which inner product the reported eigenvalues are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Generalized problem with the consistent piecewise-linear Gram matrix;
    /// eigenvalues approximate the strong-form operator's.
    ConsistentMass,
    /// Generalized problem with the lumped (diagonal) Gram matrix.
    LumpedMass,
    /// Plain matrix eigenvalues of the Hessian itself.
    Identity,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            Normalization::ConsistentMass => "consistent-mass",
            Normalization::LumpedMass => "lumped-mass",
            Normalization::Identity => "identity",
        };
        f.write_str(label)
    }
}
