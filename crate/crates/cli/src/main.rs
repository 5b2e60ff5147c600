// `!(x >= bound)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod config;
mod error;
mod output;
mod presets;
mod run;

use config::{Mode, ScenarioConfig};
use error::CliError;
use output::{Manifest, OutputDir};
use presets::{run_preset, Overrides, PRESETS};

/// Exact dissipative dynamics of qubit arrays in one-dimensional baths.
///
/// Every flag can also be set through the environment variable named in its
/// help text; flags win over the environment, which wins over the config.
#[derive(Parser)]
#[command(name = "superspin", version)]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true, env = "SUPERSPIN_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory [default: the config's `output`, else ./superspin-out].
    #[arg(long, global = true, env = "SUPERSPIN_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "SUPERSPIN_SEED")]
    seed: Option<u64>,
    /// Worker threads for trajectory and disorder runs.
    #[arg(long, global = true, env = "SUPERSPIN_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config (default: superspin evolution).
    Simulate,
    /// Dark-state search and Dicke decay bounds.
    Darkstates,
    /// Jump-operator Lie-algebra closure.
    Liealg,
    /// Superspin evolution checked against the full-space solver.
    OracleCompare,
    /// Monte Carlo wave-function evolution on the full space.
    Trajectories,
    /// Positional-disorder robustness scan.
    DisorderScan,
    /// Regenerate the data of a built-in scenario preset.
    Preset { name: String },
    /// List the built-in presets.
    ListPresets,
}

impl Command {
    fn mode(&self) -> Option<Mode> {
        match self {
            Command::Darkstates => Some(Mode::Darkstates),
            Command::Liealg => Some(Mode::Liealg),
            Command::OracleCompare => Some(Mode::Oracle),
            Command::Trajectories => Some(Mode::Trajectories),
            Command::DisorderScan => Some(Mode::Disorder),
            _ => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Darkstates => "darkstates",
            Command::Liealg => "liealg",
            Command::OracleCompare => "oracle-compare",
            Command::Trajectories => "trajectories",
            Command::DisorderScan => "disorder-scan",
            Command::Preset { .. } => "preset",
            Command::ListPresets => "list-presets",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("superspin: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let (configs, source, out) = match &cli.command {
        Command::ListPresets => {
            for p in &PRESETS {
                println!("{:<6}  {}", p.name, p.description);
            }
            return Ok(());
        }
        Command::Preset { name } => {
            let root = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("superspin-out"))
                .join(name);
            let mut out = OutputDir::create(&root)?;
            let used = run_preset(
                name,
                &Overrides {
                    seed: cli.seed,
                    workers: cli.workers,
                },
                &mut out,
            )?;
            (used, format!("preset {name}"), out)
        }
        command => {
            let path = cli.config.as_ref().ok_or_else(|| {
                CliError::Config(format!("{} needs --config <path>", command.name()))
            })?;
            let (mut cfg, text) = ScenarioConfig::load(path)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(workers) = cli.workers {
                cfg.workers = workers;
            }
            let mode = match (command.mode(), cfg.mode) {
                (Some(wanted), Some(given)) if wanted != given => {
                    return Err(CliError::Config(format!(
                        "config declares mode {given}, but `{}` runs mode {wanted}",
                        command.name()
                    )));
                }
                (Some(wanted), _) => wanted,
                (None, given) => given.unwrap_or(Mode::Superspin),
            };
            cfg.mode = Some(mode);
            let root = cli
                .out
                .clone()
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("superspin-out"));
            let mut out = OutputDir::create(&root)?;
            run::run(&cfg, mode, &mut out)?;
            (vec![cfg], text, out)
        }
    };
    let first = configs.first();
    let resolved: Vec<String> = configs.iter().map(ScenarioConfig::to_toml).collect();
    let outputs = out
        .written()
        .iter()
        .map(|p| {
            p.strip_prefix(out.root())
                .unwrap_or(p)
                .display()
                .to_string()
        })
        .collect();
    let manifest = Manifest {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        library_version: superspin::VERSION,
        seed: first.map_or(0, |c| c.seed),
        workers: first.map_or(1, |c| c.workers),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        resolved_config: resolved.join("\n# ---\n"),
        source,
        outputs,
    };
    let mut out = out;
    out.write_json("manifest.json", &manifest)?;
    println!(
        "wrote {} files to {}",
        out.written().len(),
        out.root().display()
    );
    Ok(())
}
