use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jagg::{CliError, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "jagg", version, about = "Run J-aggregate laser experiments from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment and write its results.
    Run {
        config: PathBuf,
        /// Worker threads; overrides `parallelism` and JAGG_WORKERS.
        #[arg(long)]
        workers: Option<usize>,
        /// Skip SVG rendering.
        #[arg(long)]
        no_plots: bool,
        /// Suppress progress lines on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Check a config and list every violation.
    Validate { config: PathBuf },
    /// Render SVG plots for an existing results directory.
    Plot { results_dir: PathBuf },
}

fn report(error: &CliError, output_dir: Option<&Path>) -> ExitCode {
    let record = error.record();
    eprintln!("{}", serde_json::to_string(&record).expect("plain json"));
    if let Some(dir) = output_dir {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(
                dir.join("error.json"),
                serde_json::to_string_pretty(&record).expect("plain json"),
            );
        }
    }
    ExitCode::from(error.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            workers,
            no_plots,
            quiet,
        } => {
            let config = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return report(&e, None),
            };
            let options = RunOptions {
                workers,
                progress: !quiet,
                plots: !no_plots,
            };
            match jagg::run(&config, options) {
                Ok(r) => {
                    for f in &r.files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => report(&e, Some(&config.output_dir)),
            }
        }
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(c) => {
                let violations = c.validate();
                if violations.is_empty() {
                    println!("ok");
                    ExitCode::SUCCESS
                } else {
                    report(&CliError::Invalid(violations), None)
                }
            }
            Err(e) => report(&e, None),
        },
        Command::Plot { results_dir } => match jagg::plot::render_plots(&results_dir) {
            Ok(files) => {
                for f in &files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => report(&e, None),
        },
    }
}
