//! Configuration loading, job dispatch and report output for the `framelab`
//! command.

pub mod config;
pub mod error;
pub mod jobs;

use std::fs;

pub use config::{parse_config, Format, Job, JobConfig};
pub use error::CliError;
pub use jobs::{run_job, Report};

/// Exit status when the tool ran but the checked inequality failed.
pub const EXIT_CHECK_FAILED: i32 = 2;
/// Exit status on any runtime or configuration error.
pub const EXIT_ERROR: i32 = 1;

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<Format>,
}

/// What a run produced: the rendered report and where it went.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub rendered: String,
    pub written_to: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.check_failed() {
            EXIT_CHECK_FAILED
        } else {
            0
        }
    }
}

/// Loads `config_path`, applies the overrides, runs `job` and writes the
/// report to the requested path (or leaves it for the caller to print).
pub fn run(job: Job, config_path: &str, overrides: &Overrides) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|source| CliError::Read { path: config_path.to_string(), source })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = overrides.seed {
        cfg.options.seed = seed;
    }
    let format = overrides.format.unwrap_or(cfg.output.format);
    let out = overrides.out.clone().or_else(|| cfg.output.path.clone());
    let report = run_job(job, &cfg)?;
    let rendered = report.render(format);
    if let Some(path) = &out {
        fs::write(path, &rendered).map_err(|source| CliError::Write { path: path.clone(), source })?;
    }
    Ok(Outcome { report, rendered, written_to: out })
}
