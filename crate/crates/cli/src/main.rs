use std::process::ExitCode;

use clap::Parser;
use pascu_cli::cli::Cli;
use pascu_cli::{exit_code, output, run, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.to_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("pascu: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    if let Some(path) = &cli.save_config {
        let saved = cfg.to_toml().map_err(anyhow::Error::from).and_then(|t| output::write_atomic(path, &t));
        if let Err(e) = saved {
            eprintln!("pascu: saving config: {e:#}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    match run(&cfg) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("pascu: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
