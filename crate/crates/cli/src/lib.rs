//! Batch runner for J-aggregate simulations: TOML experiment configs in,
//! CSV tables, JSON metadata and SVG plots out.

pub mod config;
mod error;
pub mod experiments;
mod output;
pub mod plot;
mod pool;
pub mod svg;

use std::path::PathBuf;

use serde_json::json;

pub use config::{ExperimentConfig, Violation};
pub use error::{CliError, CliResult};
pub use output::Output;
pub use pool::{worker_count, WORKERS_ENV};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Overrides both the environment and the config when set.
    pub workers: Option<usize>,
    pub progress: bool,
    pub plots: bool,
}

#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// Validate, execute and write every output of one experiment.
pub fn run(config: &ExperimentConfig, options: RunOptions) -> CliResult<RunReport> {
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(CliError::Invalid(violations));
    }
    let workers = options.workers.unwrap_or_else(|| worker_count(config.parallelism));
    let pool = pool::build_pool(workers)?;
    let mut out = Output::create(&config.output_dir)?;
    let result = pool.install(|| experiments::execute(config, &mut out, options.progress))?;

    let metadata = json!({
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "experiment": config.experiment,
        "config": config,
        "constants": result.constants,
        "prng": jagg_core::disorder::PRNG_NAME,
        "master_seed": config.disorder.master_seed,
        "workers": pool.current_num_threads(),
    });
    out.write_json("metadata.json", &metadata)?;
    out.write_json("summary.json", &result.summary)?;
    let mut files = out.into_files();
    if options.plots {
        files.extend(plot::render_plots(&config.output_dir)?);
    }
    Ok(RunReport {
        files,
        summary: result.summary,
    })
}
