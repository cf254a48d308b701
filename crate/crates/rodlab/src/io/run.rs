//! Action runners: execute a resolved job and write its artifacts.
//!
//! Every run leaves `config.toml` (the normalized job, action filled in) next
//! to the action's own files, so any output directory can be reproduced from
//! itself. Artifact bytes depend only on the config: rerunning the same job
//! rewrites identical files.

use crate::energy::{el_residual_max, energy, energy_gradient_nodal};
use crate::error::{Result, RodError};
use crate::flow::{constraint_integral, run_flow, Termination};
use crate::kinematics::{centerline, strains};
use crate::stability::{
    assemble_hessian, branch_continuation, classify_helix, classify_trivial,
    classify_trivial_global, critical_forces, spectrum, StabilityVerdict,
};
use crate::{IsoAxis, IsoConstraint};

use super::config::{Action, JobConfig, ResolvedJob};
use super::export::{export_centerline, export_series, full, write_field_snapshot};

use std::fs;
use std::path::PathBuf;

/// What a run produced: the action performed and every file written, in
/// creation order.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub action: Action,
    pub artifacts: Vec<PathBuf>,
}

/// Tracks artifact paths inside the output directory and logs each one.
struct Sink {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Sink {
    fn file(&mut self, name: &str) -> PathBuf {
        let path = self.dir.join(name);
        log::info!("writing {}", path.display());
        self.written.push(path.clone());
        path
    }
}

/// Execute a normalized job: build the scenario state, perform the action,
/// and write the artifacts into `job.output_dir`.
pub fn run(job: &JobConfig) -> Result<RunReport> {
    let action = job.action.ok_or_else(|| {
        RodError::validation(
            "action",
            "no action chosen; set `action` in the config or pass one on the command line",
        )
    })?;
    job.validate_action(action)?;
    let resolved = job.resolve()?;

    fs::create_dir_all(&job.output_dir).map_err(|e| {
        RodError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", job.output_dir.display()),
        ))
    })?;
    let mut sink = Sink {
        dir: job.output_dir.clone(),
        written: Vec::new(),
    };

    // The echoed config reproduces this run byte for byte.
    let mut echoed = job.clone();
    echoed.action = Some(action);
    fs::write(sink.file("config.toml"), echoed.to_toml_string())?;

    match action {
        Action::Analyze => run_analyze(&resolved, &mut sink)?,
        Action::Classify => run_classify(job, &resolved, &mut sink)?,
        Action::Spectrum => run_spectrum(job, &resolved, &mut sink)?,
        Action::Bifurcate => run_bifurcate(job, &resolved, &mut sink)?,
        Action::Flow => run_flow_action(job, &resolved, &mut sink)?,
    }

    Ok(RunReport {
        action,
        artifacts: sink.written,
    })
}

/// State as built: nodal angles, centerline, strain components, and a one-row
/// summary of energy and residual magnitudes.
fn run_analyze(resolved: &ResolvedJob, sink: &mut Sink) -> Result<()> {
    let field = &resolved.field;
    let params = &resolved.params;

    write_field_snapshot(field, sink.file("field.csv"))?;
    export_centerline(&centerline(field, [0.0; 3]), sink.file("centerline.txt"))?;

    let strain = strains(field);
    let grid = field.grid();
    let rows: Vec<Vec<f64>> = (0..grid.n_cells())
        .map(|c| {
            vec![
                grid.midpoint(c),
                strain.kappa1[c],
                strain.kappa2[c],
                strain.kappa3[c],
            ]
        })
        .collect();
    export_series(
        &["s_mid", "kappa1", "kappa2", "kappa3"],
        &rows,
        sink.file("strains.csv"),
    )?;

    let free_gradient = resolved
        .bcs
        .dof_map(grid)
        .gather(&energy_gradient_nodal(field, params));
    let gradient_max = free_gradient.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let summary = vec![vec![
        energy(field, params),
        gradient_max,
        el_residual_max(field, params),
        constraint_integral(field, IsoAxis::X),
        constraint_integral(field, IsoAxis::Y),
        constraint_integral(field, IsoAxis::Z),
    ]];
    export_series(
        &[
            "energy",
            "gradient_max",
            "el_residual_max",
            "closure_x",
            "closure_y",
            "closure_z",
        ],
        &summary,
        sink.file("summary.csv"),
    )
}

/// Closed-form verdict with the thresholds that produced it.
fn run_classify(job: &JobConfig, resolved: &ResolvedJob, sink: &mut Sink) -> Result<()> {
    let (verdict, load_fl2) = match &resolved.helix {
        Some(spec) => (classify_helix(spec)?, resolved.params.force_l2()[2]),
        None => (
            classify_trivial(&resolved.params, &resolved.bcs)?,
            resolved.params.force_l2()[0],
        ),
    };
    write_verdict(&verdict, load_fl2, sink.file("verdict.csv"))?;

    if let Some(alpha) = job.classify.alpha_bound {
        let global = classify_trivial_global(&resolved.params, alpha)?;
        let text = format!(
            "alpha_bound,globally_stable\n{},{global}\n",
            full(alpha)
        );
        fs::write(sink.file("global.csv"), text)?;
    }
    Ok(())
}

fn write_verdict(verdict: &StabilityVerdict, load_fl2: f64, path: PathBuf) -> Result<()> {
    let text = format!(
        "classification,threshold_low,threshold_high,source,load_fl2\n{},{},{},{},{}\n",
        verdict.classification,
        full(verdict.threshold_low),
        full(verdict.threshold_high),
        verdict.source,
        full(load_fl2),
    );
    fs::write(path, text)?;
    Ok(())
}

/// Smallest Hessian eigenvalues, the bottom eigenvector, and the Morse index.
fn run_spectrum(job: &JobConfig, resolved: &ResolvedJob, sink: &mut Sink) -> Result<()> {
    let hessian = assemble_hessian(&resolved.field, &resolved.params, &resolved.bcs);
    let available = hessian.dim().saturating_sub(hessian.constraints.len());
    let k = job.spectrum.count.min(available).max(1);
    if k < job.spectrum.count {
        log::warn!(
            "spectrum.count = {} exceeds the {available} admissible directions; reporting {k}",
            job.spectrum.count
        );
    }
    let report = spectrum(&hessian, k)?;

    let rows: Vec<Vec<f64>> = report
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &ev)| vec![(i + 1) as f64, ev])
        .collect();
    export_series(&["k", "eigenvalue"], &rows, sink.file("eigenvalues.csv"))?;

    let grid = resolved.field.grid();
    let vector = &report.smallest_eigenvector;
    let rows: Vec<Vec<f64>> = (0..grid.n_nodes())
        .map(|i| {
            vec![
                grid.node(i),
                vector.alpha[i],
                vector.beta[i],
                vector.gamma[i],
            ]
        })
        .collect();
    export_series(
        &["s", "alpha", "beta", "gamma"],
        &rows,
        sink.file("eigenvector.csv"),
    )?;

    let text = format!(
        "smallest_eigenvalue,morse_index,normalization\n{},{},{}\n",
        full(report.eigenvalues[0]),
        report.index,
        report.normalization,
    );
    fs::write(sink.file("spectrum_summary.csv"), text)?;
    Ok(())
}

/// Critical loads of the straight state and the load-amplitude table of each
/// buckled branch up to `m_max`.
fn run_bifurcate(job: &JobConfig, resolved: &ResolvedJob, sink: &mut Sink) -> Result<()> {
    let params = &resolved.params;
    let forces = critical_forces(params, job.bifurcate.m_max)?;

    let rows: Vec<Vec<f64>> = forces
        .iter()
        .enumerate()
        .map(|(i, &f)| vec![(i + 1) as f64, f])
        .collect();
    export_series(
        &["m", "critical_force"],
        &rows,
        sink.file("critical_forces.csv"),
    )?;

    for (i, &f_m) in forces.iter().enumerate() {
        let m = (i + 1) as u32;
        // Load offsets scale with |F_m| so the window tracks the branch for
        // critical loads of either sign.
        let unit = f_m.abs().max(1e-6);
        let step = job.bifurcate.rel_step * unit;
        let range = (f_m + step, f_m + job.bifurcate.rel_span * unit);
        let branch = branch_continuation(&resolved.grid, params, m, range, step)?;
        if !branch.reached_end {
            log::warn!("branch m = {m} stopped before the end of its load window");
        }
        let rows: Vec<Vec<f64>> = branch
            .points
            .iter()
            .map(|p| vec![p.f, p.amplitude])
            .collect();
        export_series(
            &["force", "amplitude"],
            &rows,
            sink.file(&format!("branch_m{m}.csv")),
        )?;
    }
    Ok(())
}

/// Relax the state under the implicit gradient flow, recording the trajectory
/// and periodic field snapshots.
fn run_flow_action(job: &JobConfig, resolved: &ResolvedJob, sink: &mut Sink) -> Result<()> {
    let constraints: Vec<IsoConstraint> = resolved
        .bcs
        .iso_constraints
        .iter()
        .map(|&axis| IsoConstraint::fixing(axis, &resolved.field))
        .collect();
    let outcome = run_flow(
        resolved.field.clone(),
        &resolved.params,
        &resolved.bcs,
        &job.flow,
        &constraints,
        job.snapshot_every,
    )?;

    let mut columns = vec!["step".to_string(), "time".into(), "energy".into()];
    for c in &constraints {
        columns.push(format!("residual_{}", c.axis.label()));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = outcome
        .records
        .iter()
        .map(|r| {
            let mut row = vec![r.step as f64, r.time, r.energy];
            row.extend_from_slice(&r.residuals);
            row
        })
        .collect();
    export_series(&column_refs, &rows, sink.file("trajectory.csv"))?;

    for (step, field) in &outcome.snapshots {
        write_field_snapshot(field, sink.file(&format!("field_{step:06}.csv")))?;
        export_centerline(
            &centerline(field, [0.0; 3]),
            sink.file(&format!("centerline_{step:06}.txt")),
        )?;
    }

    let termination = match &outcome.termination {
        Termination::Converged => "converged".to_string(),
        Termination::MaxSteps => "max-steps".to_string(),
        Termination::StepFailure(msg) => format!("step-failure: {}", msg.replace(',', ";")),
    };
    let initial_energy = outcome.state.energy_history[0];
    let text = format!(
        "steps,final_time,initial_energy,final_energy,termination\n{},{},{},{},{termination}\n",
        outcome.state.step_index,
        full(outcome.state.time),
        full(initial_energy),
        full(outcome.state.energy()),
    );
    fs::write(sink.file("flow_summary.csv"), text)?;

    // A failed step leaves the partial trajectory on disk but still reports
    // the run as a numerical failure.
    if let Termination::StepFailure(msg) = &outcome.termination {
        return Err(RodError::numerical(
            "flow",
            format!(
                "step {} failed: {msg}",
                outcome.state.step_index + 1
            ),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::parse_config_str;

    fn job_with_output(text: &str, dir: &std::path::Path) -> JobConfig {
        let mut job = parse_config_str(text).unwrap();
        job.output_dir = dir.to_path_buf();
        job
    }

    #[test]
    fn classify_below_threshold_reports_stable_with_the_sharp_source() {
        let dir = tempfile::tempdir().unwrap();
        let job = job_with_output(
            "\
action = \"classify\"

[scenario]
kind = \"trivial\"

[params]
bend_a = 1.0
twist_c = 0.75
force = [4.0, 0.0, 0.0]
twist_m = 1.0
",
            dir.path(),
        );
        let report = run(&job).unwrap();
        assert_eq!(report.action, Action::Classify);
        let verdict = fs::read_to_string(dir.path().join("verdict.csv")).unwrap();
        let mut lines = verdict.lines();
        assert_eq!(
            lines.next().unwrap(),
            "classification,threshold_low,threshold_high,source,load_fl2"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("stable,"), "{row}");
        assert!(row.contains("Prop 4"), "{row}");
        // Sharp threshold (7/16) pi^2 appears in both threshold columns.
        let fields: Vec<&str> = row.split(',').collect();
        let low: f64 = fields[1].parse().unwrap();
        let high: f64 = fields[2].parse().unwrap();
        let expected = 7.0 / 16.0 * std::f64::consts::PI * std::f64::consts::PI;
        assert!((low - expected).abs() < 1e-10, "low = {low}");
        assert_eq!(low, high);
    }

    #[test]
    fn analyze_writes_the_full_artifact_set() {
        let dir = tempfile::tempdir().unwrap();
        let job = job_with_output(
            "\
action = \"analyze\"

[scenario]
kind = \"trivial\"

[params]
bend_a = 1.0
twist_c = 0.75
twist_m = 1.0

[grid]
n_cells = 40
",
            dir.path(),
        );
        let report = run(&job).unwrap();
        for name in [
            "config.toml",
            "field.csv",
            "centerline.txt",
            "strains.csv",
            "summary.csv",
        ] {
            assert!(dir.path().join(name).is_file(), "missing {name}");
        }
        assert_eq!(report.artifacts.len(), 5);
        // The straight state is an equilibrium: residual columns are tiny.
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let row = summary.lines().nth(1).unwrap();
        let values: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(values[1].abs() < 1e-10, "gradient_max = {}", values[1]);
        assert!(values[2].abs() < 1e-8, "el_residual_max = {}", values[2]);
    }

    #[test]
    fn identical_jobs_write_identical_bytes() {
        let text = "\
action = \"spectrum\"

[scenario]
kind = \"trivial\"

[params]
bend_a = 1.0
twist_c = 0.75
force = [3.0, 0.0, 0.0]
twist_m = 1.0

[grid]
n_cells = 60

[spectrum]
count = 4
";
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let job_a = job_with_output(text, dir_a.path());
        let job_b = job_with_output(text, dir_b.path());
        run(&job_a).unwrap();
        run(&job_b).unwrap();
        for name in ["eigenvalues.csv", "eigenvector.csv", "spectrum_summary.csv"] {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn missing_action_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut job = job_with_output(
            "\
[scenario]
kind = \"trivial\"

[params]
bend_a = 1.0
twist_c = 0.75
",
            dir.path(),
        );
        job.action = None;
        let err = run(&job).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
