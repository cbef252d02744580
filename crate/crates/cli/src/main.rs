mod args;
mod commands;
mod config;
mod error;
mod plot;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::FileConfig;
use error::{CliError, CliResult};

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs.or(cfg.jobs) {
        if n == 0 {
            return Err(CliError::usage("--jobs must be >= 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::usage(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Sivi { data, out } => commands::sivi_cmd(data, out, &cfg),
        Command::Size { data, model, out } => commands::size_cmd(data, model, out, &cfg),
        Command::Estimate(a) => commands::estimate_cmd(a),
        Command::Compare { data, model, coeffs, out } => {
            commands::compare_cmd(data, model, coeffs.as_deref(), out, &cfg)
        }
        Command::Sensitivity { data, model, axis, values, out } => {
            commands::sensitivity_cmd(data, model, axis, values, out, &cfg)
        }
        Command::FitBattery { curve, output } => commands::fit_battery_cmd(curve, output.as_deref()),
        Command::Synth(a) => commands::synth_cmd(a),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pvsmooth: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
