// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Command-line front end: `compile`, `quench`, `lightcone` and `verify`.

pub mod commands;
pub mod config;
pub mod presets;
pub mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_compile, cmd_lightcone, cmd_quench, LightconeReport, LightconeRun, QuenchSeries};
pub use config::ExperimentConfig;
pub use verify::{run_verify, SuiteResult, VerifyReport};

use crate::error::Error;

/// Failure classes with their process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 1.
    Numeric(String),
    /// Exit code 1.
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDimension(_)
            | Error::InvalidModes(_)
            | Error::Arity { .. }
            | Error::InvalidParameter(_)
            | Error::InvalidRegion(_)
            | Error::Geometry(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ota-sim", version, about = "Optical circuit compilation and Gaussian quench simulation")]
pub struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory, overriding `outputs.directory`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed, overriding the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile the configured Hamiltonian and write `circuit.json`.
    Compile(CommonArgs),
    /// Simulate the quench and write `quench.csv` and `predictions.csv`.
    Quench(CommonArgs),
    /// Sweep light-cone runs and write grids and front fits.
    Lightcone(CommonArgs),
    /// Run the invariant suites and write `verify_report.json`.
    Verify(CommonArgs),
    /// List built-in presets.
    Presets,
}

/// Reads the config named by `--config` or `--preset`.
pub fn load_config(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let text = match (&args.config, &args.preset) {
        (Some(path), _) => fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        (None, Some(name)) => presets::get(name)
            .ok_or_else(|| CliError::Config(format!("unknown preset {name:?}; available: {}", presets::names().join(", "))))?
            .to_string(),
        (None, None) => return Err(CliError::Config("need --config <path> or --preset <name>".into())),
    };
    let mut cfg = ExperimentConfig::from_json(&text).map_err(CliError::Config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(args: &CommonArgs, cfg: Option<&ExperimentConfig>) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.map(|c| PathBuf::from(&c.outputs.directory)))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn verify_cmd(args: &CommonArgs) -> Result<VerifyReport, CliError> {
    let cfg = if args.config.is_some() || args.preset.is_some() {
        Some(load_config(args)?)
    } else {
        None
    };
    let seed = args.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    let vc = cfg.as_ref().map(|c| c.verify).unwrap_or_default();
    let report = run_verify(seed, vc.max_n, vc.inject_corrupted_covariance);
    let dir = out_dir(args, cfg.as_ref());
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let path = dir.join("verify_report.json");
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numeric(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    for s in &report.suites {
        println!(
            "{} {:<26} cases {:>5}  max residual {:.3e} (tol {:.0e})",
            if s.passed { "PASS" } else { "FAIL" },
            s.name,
            s.cases,
            s.max_residual,
            s.tolerance
        );
        if let (false, Some(d)) = (s.passed, &s.detail) {
            println!("     {d}");
        }
    }
    if report.passed {
        Ok(report)
    } else {
        Err(CliError::Numeric("verification failed".into()))
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Compile(args) => {
            let cfg = load_config(args)?;
            cmd_compile(&cfg, &out_dir(args, Some(&cfg))).map(|_| ())
        }
        Command::Quench(args) => {
            let cfg = load_config(args)?;
            cmd_quench(&cfg, &out_dir(args, Some(&cfg))).map(|_| ())
        }
        Command::Lightcone(args) => {
            let cfg = load_config(args)?;
            cmd_lightcone(&cfg, &out_dir(args, Some(&cfg))).map(|_| ())
        }
        Command::Verify(args) => verify_cmd(args).map(|_| ()),
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
