//! `isolink`: rate sweeps, Monte Carlo hitting estimates and energy reports
//! for isomer-based molecular links.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use config::{RunConfig, PRESETS};
use error::CliError;

pub const OUT_DIR_ENV: &str = "ISOLINK_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "isolink-out";

#[derive(Parser)]
#[command(name = "isolink", version, about = "Achievable-rate analysis for isomer-based molecular communication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimise receiver thresholds over an SNR grid for every configured scheme.
    RateSweep(CommonArgs),
    /// Estimate hitting probabilities by Brownian simulation, optionally
    /// calibrating the receiver radius first.
    McPhit(CommonArgs),
    /// Transmit-energy breakdown for the configured molecule counts.
    Energy(CommonArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
struct CommonArgs {
    /// TOML config, or any JSON/CSV output of a previous run.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "K")]
    jobs: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

/// Reads a config from TOML, from the `config` field of a JSON output, or
/// from the `# config:` line of a CSV output.
fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let origin = path.display().to_string();
    let from_json = |json: &str| -> Result<RunConfig, CliError> {
        let mut value: serde_json::Value =
            serde_json::from_str(json).map_err(|e| CliError::config(format!("{origin}: {e}")))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(|e| CliError::config(format!("{origin}: {e}")))
    };
    if text.trim_start().starts_with('{') {
        return from_json(&text);
    }
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# config: ")) {
        return from_json(line);
    }
    RunConfig::from_toml(&text, &origin)
}

fn resolve(args: &CommonArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::config(format!("output directory {}: {e}", out.display())))?;
    Ok((cfg, out))
}

fn set_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    let Some(k) = jobs else { return Ok(()) };
    if k == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| CliError::run(format!("cannot start {k} worker threads: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    if k > 1 {
        eprintln!("warning: built without the `parallel` feature; --jobs {k} ignored");
    }
    Ok(())
}

type Runner = fn(&RunConfig, &Path) -> Result<Vec<PathBuf>, CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, command): (&CommonArgs, Runner) = match &cli.command {
        Command::RateSweep(a) => (a, commands::rate_sweep),
        Command::McPhit(a) => (a, commands::mc_phit),
        Command::Energy(a) => (a, commands::energy),
        Command::Presets => {
            for (name, _) in PRESETS {
                let cfg = RunConfig::preset(name)?;
                let incomplete = cfg.incomplete_messengers();
                if incomplete.is_empty() {
                    println!("{name}");
                } else {
                    println!("{name}  (incomplete: supply {} constants)", incomplete.join(", "));
                }
            }
            return Ok(());
        }
    };
    set_jobs(args.jobs)?;
    let (cfg, out) = resolve(args)?;
    for path in command(&cfg, &out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("isolink: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
