//! Command-line front end: figure data as CSV/JSON, the virtual experiment,
//! and the invariant checks.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use std::path::{Path, PathBuf};

use args::{Cli, Command, Format};
use config::*;
use output::emit;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Model(#[from] polcorr::Error),
    #[error("validation failed")]
    Validation,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 validation failure, 2 usage or invalid parameters, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation => 1,
            CliError::Usage(_) | CliError::Model(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let run = RunConfig::resolve(&cli.global, &file)?;
    let out = run.output_path.as_deref();
    match &cli.command {
        Command::Figure1(a) => emit(
            out,
            &commands::figure1(&Figure1Params::resolve(a, &file.figure1))?.render(run.format),
        ),
        Command::Figure2(a) => emit(
            out,
            &commands::figure2(&Figure2Params::resolve(a, &file.figure2))?.render(run.format),
        ),
        Command::Figure3(a) => emit(
            out,
            &commands::figure3(&Figure3Params::resolve(a, &file.figure3))?.render(run.format),
        ),
        Command::Figure4(a) => emit(
            out,
            &commands::figure4(&Figure4Params::resolve(a, &file.figure4)?)?.render(run.format),
        ),
        Command::Experiment(a) => {
            let params = ExperimentParams::resolve(a, &file.experiment)?;
            let result = commands::experiment(&run, &params)?;
            let summary =
                serde_json::to_string_pretty(&result.summary).expect("summary serializes") + "\n";
            match run.format {
                Format::Csv => {
                    emit(out, &result.table.to_csv())?;
                    match &params.summary {
                        Some(p) => emit(Some(p), &summary),
                        None => {
                            eprint!("{summary}");
                            Ok(())
                        }
                    }
                }
                Format::Json => {
                    let doc =
                        serde_json::json!({ "table": result.table, "summary": result.summary });
                    let text =
                        serde_json::to_string_pretty(&doc).expect("document serializes") + "\n";
                    emit(out, &text)?;
                    match &params.summary {
                        Some(p) => emit(Some(p), &summary),
                        None => Ok(()),
                    }
                }
            }
        }
        Command::Validate(a) => {
            let report = validate::run(config::suite(a, &file.validate), &run)?;
            emit(out, &report.render())?;
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Validation)
            }
        }
    }
}
