//! Implicit L2-gradient flow of the discrete rod energy with boundary
//! handling and isoperimetric constraint preservation through scalar
//! multipliers.

mod gradient;
mod step;

pub use crate::mass::MassKind;
pub use gradient::{
    constraint_integral, constraint_residual, discrete_gradient, discrete_gradient_with_mass,
};
pub use step::{constrained_step, implicit_step, run_flow};

pub(crate) use gradient::constraint_gradient_nodal;

use crate::error::{Result, RodError};
use crate::field::EulerField;
use crate::params::RodParams;
use serde::{Deserialize, Serialize};

/// Parameters of the implicit flow solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// Time step.
    pub dt: f64,
    /// Stopping tolerance on the per-step energy decrement.
    pub tol: f64,
    pub max_steps: usize,
    /// Constraint violation allowed after an accepted step.
    pub constraint_newton_tol: f64,
    pub constraint_newton_max_iters: usize,
    pub mass_matrix: MassKind,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            dt: 1e-3,
            tol: 1e-9,
            max_steps: 10_000,
            constraint_newton_tol: 1e-8,
            constraint_newton_max_iters: 30,
            mass_matrix: MassKind::Consistent,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("flow.dt", self.dt),
            ("flow.tol", self.tol),
            ("flow.constraint_newton_tol", self.constraint_newton_tol),
        ];
        for (path, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(RodError::validation(path, "must be positive and finite"));
            }
        }
        if self.max_steps == 0 {
            return Err(RodError::validation("flow.max_steps", "must be positive"));
        }
        if self.constraint_newton_max_iters == 0 {
            return Err(RodError::validation(
                "flow.constraint_newton_max_iters",
                "must be positive",
            ));
        }
        Ok(())
    }
}

/// Snapshot of the flow after an accepted step.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub step_index: usize,
    /// Physical time elapsed; trails `step_index * dt` when steps had to
    /// shorten themselves.
    pub time: f64,
    pub field: EulerField,
    /// Multipliers of the active constraints at the last step (empty for the
    /// unconstrained flow).
    pub multipliers: Vec<f64>,
    /// Discrete energy after every accepted step, starting with the initial
    /// value; non-increasing up to solver tolerance.
    pub energy_history: Vec<f64>,
    /// Current violation of each active constraint.
    pub constraint_residuals: Vec<f64>,
}

impl FlowState {
    /// State before the first step.
    pub fn initial(
        field: EulerField,
        params: &RodParams,
        constraints: &[crate::boundary::IsoConstraint],
    ) -> FlowState {
        let energy = crate::energy::energy(&field, params);
        let residuals = constraints
            .iter()
            .map(|c| constraint_residual(&field, c))
            .collect();
        FlowState {
            step_index: 0,
            time: 0.0,
            field,
            multipliers: vec![0.0; constraints.len()],
            energy_history: vec![energy],
            constraint_residuals: residuals,
        }
    }

    pub fn energy(&self) -> f64 {
        *self
            .energy_history
            .last()
            .expect("history starts with the initial energy")
    }
}

/// Why a flow run stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    /// The per-step energy decrement fell below `tol`.
    Converged,
    MaxSteps,
    /// A step failed after exhausting its dt halvings; the message carries
    /// the solver diagnostics. The outcome still holds the trajectory up to
    /// the last accepted step.
    StepFailure(String),
}

/// Per-step scalar record of a flow trajectory.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub residuals: Vec<f64>,
}

/// Result of [`run_flow`]: final state, scalar records for every accepted
/// step (including the initial one), optional field snapshots, and the
/// stopping reason.
#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub state: FlowState,
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<(usize, EulerField)>,
    pub termination: Termination,
}
