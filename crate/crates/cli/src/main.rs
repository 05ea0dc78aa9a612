use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use porovisco::simulation::{
    eta_tau_sweep, gradient_audit, material_audit, run_simulation, validate_config, Preset, RunConfig,
};
use porovisco::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "porovisco", version, about = "Staggered poro-visco-elastic simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation and write its outputs.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir` of the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
    /// Cauchy study in the regularization weight and the time step.
    Sweep {
        config: PathBuf,
        /// Regularization weights, strictly decreasing.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        eta: Vec<f64>,
        /// Time steps, strictly decreasing, each dividing the final time.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        tau: Vec<f64>,
    },
    /// Compare the incremental gradient against finite differences.
    Gradcheck {
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample the constitutive assumptions of the configured laws.
    AuditMaterial {
        config: PathBuf,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Print a built-in configuration as JSON.
    PrintConfig {
        #[arg(default_value = "benchmark", value_parser = ["benchmark", "closed", "compressive", "equilibrium"])]
        preset: String,
    },
}

/// Failure carrying a process exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn load(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).map_err(|e| match e {
        Error::ConfigInvalid(v) => Exit(EXIT_CONFIG, v.join("; ")).into(),
        other => anyhow::Error::new(other).context(format!("reading {}", path.display())),
    })
}

fn core_error(e: Error) -> anyhow::Error {
    match e.root() {
        Error::ConfigInvalid(v) => Exit(EXIT_CONFIG, format!("configuration invalid: {}", v.join("; "))).into(),
        Error::Io(_) => anyhow::Error::new(e),
        _ => Exit(EXIT_SOLVER, e.to_string()).into(),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn execute(command: Command) -> Result<u8> {
    match command {
        Command::Run { config, output } => {
            let mut cfg = load(&config)?;
            if output.is_some() {
                cfg.output.dir = output;
            }
            let outcome = run_simulation(&cfg).map_err(core_error)?;
            let status = serde_json::to_string(&outcome.status)?;
            println!(
                "{} steps, min EDI slack {:.3e}, min det {:.6}",
                outcome.steps.len(),
                outcome.ledger.min_slack(),
                outcome.min_det()
            );
            println!("{status}");
            if let Some(dir) = &cfg.output.dir {
                println!("outputs written to {}", dir.display());
            }
            Ok(outcome.exit_code() as u8)
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let violations = validate_config(&cfg);
            if violations.is_empty() {
                println!("configuration valid");
                Ok(0)
            } else {
                for v in &violations {
                    println!("{v}");
                }
                Ok(EXIT_CONFIG)
            }
        }
        Command::Sweep { config, eta, tau } => {
            let cfg = load(&config)?;
            let report = eta_tau_sweep(&cfg, &eta, &tau).map_err(core_error)?;
            print_json(&report)?;
            println!("monotone: {}", report.monotone());
            Ok(0)
        }
        Command::Gradcheck { config, states, seed } => {
            let cfg = load(&config)?;
            let audit = gradient_audit(&cfg, states, seed).map_err(core_error)?;
            println!(
                "worst relative gradient error {:.3e} over {} states: {}",
                audit.worst,
                audit.states,
                if audit.passed { "pass" } else { "fail" }
            );
            Ok(if audit.passed { 0 } else { EXIT_INVARIANT })
        }
        Command::AuditMaterial { config, seed } => {
            let cfg = load(&config)?;
            let report = material_audit(&cfg, seed).map_err(core_error)?;
            print_json(&report)?;
            Ok(if report.all_passed() { 0 } else { EXIT_CONFIG })
        }
        Command::PrintConfig { preset } => {
            let preset = Preset::from_name(&preset).context("unknown preset")?;
            print_json(&RunConfig::preset(preset))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.downcast_ref::<Exit>().map_or(1, |x| x.0))
        }
    }
}
