//! Command-line front end: one job per invocation.
//!
//! ```text
//! rodlab <action> --config job.toml [--output-dir DIR] [--grid-n N] [--seed S]
//! ```
//!
//! The action names what to do with the configured rod state; the config file
//! supplies everything else. Log verbosity is controlled by the `RODLAB_LOG`
//! environment variable (`error`, `warn`, `info`, `debug`, `trace`; default
//! `info`). Exit codes: 0 on success, 2 for configuration or I/O problems,
//! 3 for numerical failures.

use clap::Parser;
use rodlab::error::{Result, RodError};
use rodlab::io::{self, Action, JobConfig};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "rodlab",
    version,
    about = "Kirchhoff rod equilibria, stability, and gradient-flow relaxation"
)]
struct Cli {
    /// What to do: analyze, spectrum, classify, bifurcate, or flow.
    #[arg(value_parser = parse_action)]
    action: Action,

    /// Job description in TOML.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,

    /// Where artifacts go; overrides the config's `output_dir`.
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Grid resolution in cells; overrides the config's `grid.n_cells`.
    #[arg(long, value_name = "N")]
    grid_n: Option<usize>,

    /// Seed echoed into artifacts; overrides the config's `seed`.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
}

fn parse_action(s: &str) -> std::result::Result<Action, String> {
    s.parse().map_err(|e: RodError| e.to_string())
}

fn build_job(cli: &Cli) -> Result<JobConfig> {
    let mut job = io::parse_config(&cli.config)?;

    if let Some(action) = job.action {
        if action != cli.action {
            return Err(RodError::validation(
                "action",
                format!(
                    "the config selects `{action}` but the command line asks for `{}`",
                    cli.action
                ),
            ));
        }
    }
    job.action = Some(cli.action);

    if let Some(dir) = &cli.output_dir {
        job.output_dir = dir.clone();
    }
    if let Some(n) = cli.grid_n {
        job.grid.n_cells = Some(n);
    }
    if let Some(seed) = cli.seed {
        job.seed = seed;
    }

    // Re-normalizing revalidates the overrides (a snapshot scenario pins the
    // resolution, for instance); scenario paths are already absolute here.
    job.normalized(Path::new("."))
}

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RODLAB_LOG", "info"))
        .format_timestamp(None)
        .init();

    let outcome = build_job(&cli).and_then(|job| io::run(&job));
    match outcome {
        Ok(report) => {
            log::info!(
                "{}: {} artifacts written",
                report.action,
                report.artifacts.len()
            );
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
