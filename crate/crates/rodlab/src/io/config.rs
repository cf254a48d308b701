//! Job configuration: the TOML schema, its validation, and the normalization
//! that makes every applied default explicit.
//!
//! A job names a scenario (which rod state to build), the rod constants, the
//! grid resolution, boundary data, and an action to perform. [`parse_config`]
//! returns the *normalized* form: defaults filled in, scenario-derived values
//! (the soliton's matched load, its domain half-length, the equilibrium twist
//! ratio) made explicit, and a `[derived]` block of computed quantities
//! attached. Serializing the normalized config and parsing it again yields an
//! equal `JobConfig`, so the dump that accompanies every run is itself a
//! valid, complete job description.

use crate::boundary::{BcKind, BoundarySpec, IsoAxis};
use crate::equilibria::{helix_state, soliton_state, trivial_state, HelixSpec, SolitonSpec};
use crate::error::{Result, RodError};
use crate::field::{EulerField, DEFAULT_THETA_MIN};
use crate::flow::FlowConfig;
use crate::grid::Grid;
use crate::params::RodParams;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// What a job does with its rod state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    /// Energy, residuals, strains, and geometry of the state as built.
    Analyze,
    /// Lowest eigenvalues and Morse index of the discrete Hessian.
    Spectrum,
    /// Closed-form stability verdict.
    Classify,
    /// Critical loads and post-buckling branch tables of the straight state.
    Bifurcate,
    /// Implicit gradient-flow relaxation.
    Flow,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Analyze,
        Action::Spectrum,
        Action::Classify,
        Action::Bifurcate,
        Action::Flow,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Action::Analyze => "analyze",
            Action::Spectrum => "spectrum",
            Action::Classify => "classify",
            Action::Bifurcate => "bifurcate",
            Action::Flow => "flow",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = RodError;

    fn from_str(s: &str) -> Result<Action> {
        Action::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                RodError::validation(
                    "action",
                    format!("unknown action `{s}`; expected analyze, spectrum, classify, bifurcate or flow"),
                )
            })
    }
}

/// Which rod state the job is built on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioConfig {
    /// Straight twisted rod on the unit interval.
    Trivial,
    /// Uniform helix on the unit interval.
    Helix {
        theta0: f64,
        lambda: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Localized buckling profile on a symmetric domain. `half_length`
    /// defaults to the rod length and `stiffness_ratio_b` to the value that
    /// makes the state an exact equilibrium; an all-zero `params.force` is
    /// replaced by the matched axial reference load.
    Soliton {
        tau: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_length: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stiffness_ratio_b: Option<f64>,
    },
    /// Nodal field snapshot loaded from disk; relative paths resolve against
    /// the config file's directory.
    CustomFieldFile { path: PathBuf },
}

impl ScenarioConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ScenarioConfig::Trivial => "trivial",
            ScenarioConfig::Helix { .. } => "helix",
            ScenarioConfig::Soliton { .. } => "soliton",
            ScenarioConfig::CustomFieldFile { .. } => "custom-field-file",
        }
    }
}

/// Rod constants as written in the config; validated into [`RodParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub bend_a: f64,
    pub twist_c: f64,
    #[serde(default = "default_length")]
    pub length_l: f64,
    #[serde(default)]
    pub force: [f64; 3],
    #[serde(default)]
    pub twist_m: f64,
}

fn default_length() -> f64 {
    1.0
}

impl ParamsSection {
    pub fn to_rod_params(&self) -> Result<RodParams> {
        RodParams::new(
            self.bend_a,
            self.twist_c,
            self.length_l,
            self.force,
            self.twist_m,
        )
    }
}

/// Grid resolution; the domain itself comes from the scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
}

/// Default grid resolution when the config does not pick one.
pub const DEFAULT_N_CELLS: usize = 200;

/// End-condition family applied to the bending angles; the twist angle is
/// always pinned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndsKind {
    /// All three angles pinned at both ends.
    #[default]
    Clamped,
    /// Both bending angles free at both ends.
    Pinned,
    /// Polar angle pinned, azimuth free.
    Mixed,
}

/// Boundary data. Endpoint values default to the scenario state's own; the
/// optional explicit pairs are assertions that must match that state.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BcsSection {
    pub ends: EndsKind,
    /// Coordinates whose closure integral is held fixed at its initial value.
    pub iso: Vec<IsoAxis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<[f64; 2]>,
}

/// Knobs of the spectrum action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// How many of the smallest eigenvalues to report.
    pub count: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection { count: 6 }
    }
}

/// Knobs of the bifurcate action. Branch `m` is traced over the load window
/// `[F_m (1 + rel_step), F_m (1 + rel_span)]` in steps of `F_m rel_step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BifurcateSection {
    pub m_max: u32,
    pub rel_step: f64,
    pub rel_span: f64,
}

impl Default for BifurcateSection {
    fn default() -> Self {
        BifurcateSection {
            m_max: 2,
            rel_step: 0.02,
            rel_span: 0.24,
        }
    }
}

/// Knobs of the classify action.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifySection {
    /// When set (trivial scenario only), additionally run the global energy
    /// comparison over the perturbation class with this polar bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_bound: Option<f64>,
}

/// Quantities computed from the rest of the config, attached to the
/// normalized dump for the reader's benefit. Values supplied by the user are
/// recomputed, not trusted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedSection {
    /// Stiffness ratio C/A.
    pub stiffness_ratio: f64,
    /// Load vector scaled by L^2, as it enters the energy density.
    pub force_l2: [f64; 3],
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("rodlab-out")
}

/// One job: a scenario, the constants that shape it, and an action to run.
///
/// Scalar keys come first so the serialized form is valid TOML with the
/// tables after them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Action to perform; the command line may supply or confirm it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Action>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seed echoed into artifacts; reserved for randomized diagnostics.
    #[serde(default)]
    pub seed: u64,
    /// Field snapshot cadence of the flow action, in accepted steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    pub scenario: ScenarioConfig,
    pub params: ParamsSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bcs: Option<BcsSection>,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub bifurcate: BifurcateSection,
    #[serde(default)]
    pub classify: ClassifySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedSection>,
}

/// A job resolved into library objects: the rod state the scenario describes,
/// the boundary data pinning it, and the validated constants.
#[derive(Debug, Clone)]
pub struct ResolvedJob {
    pub params: RodParams,
    pub grid: Grid,
    pub field: EulerField,
    pub bcs: BoundarySpec,
    /// Present for helix scenarios; carries the closed-form classifier input.
    pub helix: Option<HelixSpec>,
}

/// Read and normalize a job config from a TOML file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<JobConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        RodError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config_with_base(&text, base)
        .map_err(|e| annotate_with_path(e, path))
}

/// Parse and normalize a job config from TOML text; relative scenario paths
/// resolve against the current directory.
pub fn parse_config_str(text: &str) -> Result<JobConfig> {
    parse_config_with_base(text, Path::new("."))
}

fn annotate_with_path(e: RodError, path: &Path) -> RodError {
    match e {
        RodError::Validation { path: field, message } => RodError::Validation {
            path: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    }
}

fn parse_config_with_base(text: &str, base: &Path) -> Result<JobConfig> {
    let job: JobConfig = toml::from_str(text)
        .map_err(|e| RodError::validation("config", e.to_string().trim().to_string()))?;
    job.normalized(base)
}

impl JobConfig {
    /// Validated copy with every default and scenario-derived value filled
    /// in. Normalization is idempotent: applying it to its own output changes
    /// nothing.
    pub fn normalized(&self, base: &Path) -> Result<JobConfig> {
        let mut job = self.clone();

        // Rod constants must stand on their own before anything else uses
        // them; soliton normalization may still rewrite the force below.
        let mut params = job.params.to_rod_params()?;

        job.scenario = match job.scenario {
            ScenarioConfig::Trivial => ScenarioConfig::Trivial,
            ScenarioConfig::Helix {
                theta0,
                lambda,
                phase,
            } => {
                // Validates lambda != 0 (the twist slope divides by it) and
                // the axial load direction.
                HelixSpec::new(theta0, lambda, params.clone())?;
                let polar = theta0.rem_euclid(std::f64::consts::PI);
                if polar < DEFAULT_THETA_MIN || polar > std::f64::consts::PI - DEFAULT_THETA_MIN {
                    return Err(RodError::validation(
                        "scenario.theta0",
                        "inclination collides with the polar coordinate singularity",
                    ));
                }
                ScenarioConfig::Helix {
                    theta0,
                    lambda,
                    phase,
                }
            }
            ScenarioConfig::Soliton {
                tau,
                half_length,
                stiffness_ratio_b,
            } => {
                let half = half_length.unwrap_or(params.length_l);
                let spec = match stiffness_ratio_b {
                    Some(b) => SolitonSpec::new(tau, half, b)?,
                    None => SolitonSpec::with_equilibrium_twist(tau, half, &params)?,
                };
                if job.params.force == [0.0; 3] {
                    job.params.force = [0.0, 0.0, 1.0 + tau * tau];
                    params = job.params.to_rod_params()?;
                }
                ScenarioConfig::Soliton {
                    tau: spec.tau,
                    half_length: Some(spec.half_length),
                    stiffness_ratio_b: Some(spec.stiffness_ratio_b),
                }
            }
            ScenarioConfig::CustomFieldFile { path } => {
                let resolved = if path.is_relative() {
                    base.join(&path)
                } else {
                    path
                };
                if !resolved.is_file() {
                    return Err(RodError::validation(
                        "scenario.path",
                        format!("field snapshot `{}` does not exist", resolved.display()),
                    ));
                }
                let field = super::export::read_field_snapshot(&resolved)?;
                match job.grid.n_cells {
                    None => job.grid.n_cells = Some(field.grid().n_cells()),
                    Some(n) if n != field.grid().n_cells() => {
                        return Err(RodError::validation(
                            "grid.n_cells",
                            format!(
                                "config asks for {n} cells but the snapshot has {}",
                                field.grid().n_cells()
                            ),
                        ));
                    }
                    Some(_) => {}
                }
                ScenarioConfig::CustomFieldFile { path: resolved }
            }
        };

        if job.grid.n_cells.is_none() {
            job.grid.n_cells = Some(DEFAULT_N_CELLS);
        }

        let bcs = job.bcs.take().unwrap_or_else(|| BcsSection {
            iso: match job.scenario {
                ScenarioConfig::Soliton { .. } => vec![IsoAxis::X, IsoAxis::Y, IsoAxis::Z],
                _ => Vec::new(),
            },
            ..BcsSection::default()
        });
        validate_bcs_section(&bcs, &job.scenario)?;
        job.bcs = Some(bcs);

        job.flow.validate()?;
        if job.snapshot_every.is_none() {
            job.snapshot_every = Some((job.flow.max_steps / 10).max(1));
        } else if job.snapshot_every == Some(0) {
            return Err(RodError::validation(
                "snapshot_every",
                "snapshot cadence must be positive",
            ));
        }

        if job.spectrum.count == 0 {
            return Err(RodError::validation("spectrum.count", "must be positive"));
        }
        let bif = &job.bifurcate;
        if bif.m_max == 0 {
            return Err(RodError::validation("bifurcate.m_max", "must be positive"));
        }
        if !(bif.rel_step > 0.0 && bif.rel_step.is_finite()) {
            return Err(RodError::validation(
                "bifurcate.rel_step",
                "must be positive and finite",
            ));
        }
        if !(bif.rel_span >= bif.rel_step && bif.rel_span.is_finite()) {
            return Err(RodError::validation(
                "bifurcate.rel_span",
                "must be finite and at least rel_step",
            ));
        }
        if let Some(alpha) = job.classify.alpha_bound {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(RodError::validation(
                    "classify.alpha_bound",
                    "must lie in (0, 1]",
                ));
            }
        }

        job.derived = Some(DerivedSection {
            stiffness_ratio: params.stiffness_ratio(),
            force_l2: params.force_l2(),
        });
        Ok(job)
    }

    /// Serialize as TOML. The normalized form re-parses to an equal config.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("a JobConfig always serializes")
    }

    /// Checks that `action` makes sense for this scenario.
    pub fn validate_action(&self, action: Action) -> Result<()> {
        let scenario = self.scenario.kind_name();
        let incompatible = |why: &str| {
            Err(RodError::validation(
                "action",
                format!("{action} is incompatible with the {scenario} scenario: {why}"),
            ))
        };
        match action {
            Action::Bifurcate => {
                if !matches!(self.scenario, ScenarioConfig::Trivial) {
                    return incompatible("branches grow from the straight twisted state");
                }
            }
            Action::Classify => match &self.scenario {
                ScenarioConfig::Trivial => {}
                ScenarioConfig::Helix { .. } => {
                    if self.classify.alpha_bound.is_some() {
                        return Err(RodError::validation(
                            "classify.alpha_bound",
                            "the global comparison applies to the trivial scenario only",
                        ));
                    }
                    if let Some(bcs) = &self.bcs {
                        if !bcs.iso.is_empty() {
                            return Err(RodError::validation(
                                "bcs.iso",
                                "no closed-form helix verdict covers closure constraints",
                            ));
                        }
                    }
                }
                _ => return incompatible("no closed-form verdict exists for this state"),
            },
            Action::Analyze | Action::Spectrum | Action::Flow => {}
        }
        Ok(())
    }

    /// Build the scenario state, its boundary data, and the validated
    /// constants. Expects a normalized config.
    pub fn resolve(&self) -> Result<ResolvedJob> {
        let params = self.params.to_rod_params()?;
        let n_cells = self.grid.n_cells.unwrap_or(DEFAULT_N_CELLS);
        let bcs_section = self.bcs.clone().unwrap_or_default();

        let (grid, field, scenario_bcs, helix) = match &self.scenario {
            ScenarioConfig::Trivial => {
                let grid = Grid::unit(n_cells)?;
                let field = trivial_state(&grid, params.twist_m)?;
                (grid, field, None, None)
            }
            ScenarioConfig::Helix {
                theta0,
                lambda,
                phase,
            } => {
                let grid = Grid::unit(n_cells)?;
                let spec = HelixSpec::new(*theta0, *lambda, params.clone())?.with_phase(*phase);
                let (field, bcs) = helix_state(&grid, &spec)?;
                (grid, field, Some(bcs), Some(spec))
            }
            ScenarioConfig::Soliton {
                tau,
                half_length,
                stiffness_ratio_b,
            } => {
                let half = half_length.unwrap_or(params.length_l);
                let spec = match stiffness_ratio_b {
                    Some(b) => SolitonSpec::new(*tau, half, *b)?,
                    None => SolitonSpec::with_equilibrium_twist(*tau, half, &params)?,
                };
                let grid = Grid::symmetric(half, n_cells)?;
                let (field, bcs, _reference) = soliton_state(&grid, &spec)?;
                (grid, field, Some(bcs), None)
            }
            ScenarioConfig::CustomFieldFile { path } => {
                let field = super::export::read_field_snapshot(path)?;
                (field.grid().clone(), field, None, None)
            }
        };

        // Helix and soliton constructors return clamped boundary data; the
        // config may widen the constraint set but the Dirichlet frame stays.
        let bcs = match scenario_bcs {
            Some(bcs) => bcs.with_iso(&bcs_section.iso),
            None => resolve_ends(&bcs_section, &field)?,
        };
        assert_explicit_values(&bcs_section, &bcs, &field)?;

        Ok(ResolvedJob {
            params,
            grid,
            field,
            bcs,
            helix,
        })
    }
}

/// Static checks on the boundary section, before any state is built.
fn validate_bcs_section(bcs: &BcsSection, scenario: &ScenarioConfig) -> Result<()> {
    if let Some([a, b]) = bcs.theta {
        for (end, v) in [(0usize, a), (1, b)] {
            if !v.is_finite()
                || v < DEFAULT_THETA_MIN
                || v > std::f64::consts::PI - DEFAULT_THETA_MIN
            {
                return Err(RodError::validation(
                    format!("bcs.theta[{end}]"),
                    format!("pinned polar value {v} collides with the coordinate singularity"),
                ));
            }
        }
    }
    for (name, pair) in [("phi", &bcs.phi), ("psi", &bcs.psi)] {
        if let Some(vals) = pair {
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(RodError::validation(
                    format!("bcs.{name}"),
                    "pinned values must be finite",
                ));
            }
        }
    }
    match scenario {
        ScenarioConfig::Helix { .. } | ScenarioConfig::Soliton { .. } => {
            if bcs.ends != EndsKind::Clamped {
                return Err(RodError::validation(
                    "bcs.ends",
                    format!(
                        "{} states are pinned by clamped ends",
                        scenario.kind_name()
                    ),
                ));
            }
        }
        _ => {}
    }
    // Free bending angles cannot carry pinned values.
    let neumann_theta = bcs.ends == EndsKind::Pinned;
    let neumann_phi = bcs.ends != EndsKind::Clamped;
    if neumann_theta && bcs.theta.is_some() {
        return Err(RodError::validation(
            "bcs.theta",
            "explicit values require clamped polar ends",
        ));
    }
    if neumann_phi && bcs.phi.is_some() {
        return Err(RodError::validation(
            "bcs.phi",
            "explicit values require clamped azimuth ends",
        ));
    }
    Ok(())
}

/// Boundary data for scenarios without intrinsic boundary conditions: kinds
/// from the section, Dirichlet values sampled from the state.
fn resolve_ends(section: &BcsSection, field: &EulerField) -> Result<BoundarySpec> {
    let mut spec = BoundarySpec::clamped_to(field);
    match section.ends {
        EndsKind::Clamped => {}
        EndsKind::Pinned => {
            spec.theta = [BcKind::Neumann, BcKind::Neumann];
            spec.phi = [BcKind::Neumann, BcKind::Neumann];
        }
        EndsKind::Mixed => {
            spec.phi = [BcKind::Neumann, BcKind::Neumann];
        }
    }
    Ok(spec.with_iso(&section.iso))
}

/// Explicit endpoint values in the config are assertions: the scenario state
/// must already satisfy them.
fn assert_explicit_values(
    section: &BcsSection,
    bcs: &BoundarySpec,
    field: &EulerField,
) -> Result<()> {
    let mut asserted = bcs.clone();
    for (name, explicit, pair) in [
        ("theta", &section.theta, &mut asserted.theta),
        ("phi", &section.phi, &mut asserted.phi),
        ("psi", &section.psi, &mut asserted.psi),
    ] {
        if let Some([a, b]) = explicit {
            if !(pair[0].is_dirichlet() && pair[1].is_dirichlet()) {
                return Err(RodError::validation(
                    format!("bcs.{name}"),
                    "explicit values require clamped ends for this angle",
                ));
            }
            *pair = [BcKind::DirichletValue(*a), BcKind::DirichletValue(*b)];
        }
    }
    asserted.check_compatible(field, 1e-9)
}
