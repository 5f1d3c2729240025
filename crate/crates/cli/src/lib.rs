//! Batch runner behind the `recur` binary: configs in, deterministic CSV or
//! JSON reports out.
//!
//! Exit status: 0 on success, 2 when `require_pass` is set and the
//! experiment's check fails, 1 on any error.

pub mod args;
pub mod config;
pub mod emit;
pub mod run;

use std::io::Write;
use std::process::ExitCode;

use thiserror::Error;

pub use args::Cli;
pub use config::{emit_config, parse_config, ConfigError, Experiment, ExperimentConfig};
pub use emit::{emit, Format};
pub use run::{run, Outputs, RunRecord};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] recur_core::Error),
    #[error("invalid config:\n{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{experiment}: {source}")]
    Context { experiment: &'static str, source: Box<RunError> },
}

impl RunError {
    pub fn context(self, experiment: &'static str) -> Self {
        RunError::Context { experiment, source: Box::new(self) }
    }
}

/// What one invocation produced.
#[derive(Debug)]
pub struct Invocation {
    pub bytes: Vec<u8>,
    /// False only when the config demanded a pass and the check failed.
    pub ok: bool,
}

/// Resolves the config for `cli` (validated, overrides applied).
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let config = match cli.command.experiment().map_err(RunError::Input)? {
        Some(experiment) => cli.global.config_for(experiment),
        None => {
            let args::Command::Run { config } = &cli.command else { unreachable!("only run has no experiment") };
            let text = std::fs::read_to_string(config)
                .map_err(|e| RunError::Input(format!("{}: {e}", config.display())))?;
            cli.global.override_config(parse_config(&text)?)
        }
    };
    let issues = config::validate(&config);
    if !issues.is_empty() {
        let issues = issues
            .into_iter()
            .map(|(key, message)| config::Issue { line: None, column: None, message: format!("{key}: {message}") })
            .collect();
        return Err(ConfigError { issues }.into());
    }
    Ok(config)
}

pub fn invoke(cli: &Cli) -> Result<Invocation, RunError> {
    let config = resolve_config(cli)?;
    if cli.global.print_config {
        let text = emit_config(&config).map_err(|e| RunError::Input(e.to_string()))?;
        return Ok(Invocation { bytes: text.into_bytes(), ok: true });
    }
    let record = match cli.global.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Input(e.to_string()))?
            .install(|| run(&config))?,
        None => run(&config)?,
    };
    eprintln!(
        "recur {}: {} in {:.3} s, config {}",
        record.version,
        config.experiment.kind(),
        record.wall_time.as_secs_f64(),
        &record.config_hash[..16]
    );
    Ok(Invocation { bytes: emit(&record, cli.global.format), ok: record.pass || !config.require_pass })
}

pub fn main_with(cli: &Cli) -> ExitCode {
    let inv = match invoke(cli) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &inv.bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().lock().write_all(&inv.bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if inv.ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("check failed");
        ExitCode::from(2)
    }
}
