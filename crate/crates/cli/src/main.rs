use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tdefie::harness::{
    convergence_study, run_manufactured, selftest, speed_sweep, stability_study, RunConfig, RunReport,
};

/// Time-domain EFIE solver and verification campaigns.
#[derive(Parser)]
#[command(name = "tdefie", version, about)]
struct Cli {
    /// Print the full JSON report to stdout instead of the gate summary.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering run; a dipole source is checked against its exact field.
    Run { config: PathBuf },
    /// Manufactured runs over the configured mesh ladder.
    Converge { config: PathBuf },
    /// Long-horizon energy windows for a compactly supported pulse.
    Stability { config: PathBuf },
    /// Normalized stability ratios over the configured wave speeds.
    Sweep { config: PathBuf },
    /// Invariant suites; defaults are used without a config.
    Selftest { config: Option<PathBuf> },
}

fn load(path: &PathBuf) -> Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("reading config {}", path.display()))
}

fn execute(cli: &Cli) -> Result<RunReport> {
    let report = match &cli.command {
        Command::Run { config } => run_manufactured(&load(config)?)?,
        Command::Converge { config } => convergence_study(&load(config)?)?,
        Command::Stability { config } => stability_study(&load(config)?)?,
        Command::Sweep { config } => speed_sweep(&load(config)?)?,
        Command::Selftest { config } => {
            let cfg = match config {
                Some(path) => load(path)?,
                None => RunConfig::default(),
            };
            let report = selftest(&cfg);
            if let Some(path) = &cfg.outputs.report_json {
                report.write_json(path)?;
            }
            report
        }
    };
    Ok(report)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            if cli.json {
                match serde_json::to_string_pretty(&report) {
                    Ok(text) => println!("{text}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            } else {
                print!("{}", report.summary());
                println!(
                    "{}: {} ({:.1} s)",
                    report.campaign,
                    if report.pass() { "PASS" } else { "FAIL" },
                    report.seconds
                );
            }
            if report.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
