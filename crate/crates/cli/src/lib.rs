//! Front end for `pascu-core`: TOML run configurations, sweep expansion,
//! and report rendering.
//!
//! Exit codes: 0 when every requested check passed, 1 when a check failed
//! or a computation errored (the report is still written when there is one),
//! 2 for usage and configuration errors.

pub mod app;
pub mod cli;
pub mod config;
pub mod output;
pub mod sweep;

use std::io::Write;

use anyhow::Result;

pub use app::{execute, Outcome};
pub use config::{Axis, Command, ConfigError, Format, RunConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Runs a configuration and writes its outputs; returns the exit code.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    let outcome = execute(cfg)?;
    match &cfg.output.path {
        Some(p) => output::write_atomic(p, &outcome.report)?,
        None => std::io::stdout().write_all(outcome.report.as_bytes())?,
    }
    if let (Some(p), Some(plot)) = (&cfg.output.plot, &outcome.plot) {
        output::write_atomic(p, plot)?;
    }
    Ok(if outcome.passed { EXIT_PASS } else { EXIT_FAIL })
}

/// Exit code for an error: 2 when it stems from the configuration.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<ConfigError>()) {
        EXIT_USAGE
    } else {
        EXIT_FAIL
    }
}
