use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use yflash_tm::harness::{run_experiment, verify, Experiment, SimConfig};

#[derive(Parser)]
#[command(name = "sim", about = "Y-Flash Tsetlin automaton co-simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key-value (TOML) parameter file; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Program/erase conductance staircase.
    Staircase(RunArgs),
    /// Program/erase cycling with wear.
    Endurance(RunArgs),
    /// Device-to-device population statistics.
    D2d(RunArgs),
    /// XOR training with automata mapped onto cells.
    XorMap(RunArgs),
    /// Per-mode power and energy table.
    Energy(RunArgs),
    /// Software-only XOR training.
    Train(RunArgs),
    /// Run every acceptance check; nonzero exit on any failure.
    Verify(VerifyArgs),
    /// Print the default configuration.
    PrintDefaults,
}

fn load(config: Option<&PathBuf>, seed: Option<u64>) -> yflash_tm::Result<SimConfig> {
    let mut cfg = match config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> yflash_tm::Result<bool> {
    let (experiment, args) = match cli.command {
        Command::PrintDefaults => {
            print!("{}", SimConfig::default().to_toml());
            return Ok(true);
        }
        Command::Verify(v) => {
            let cfg = load(v.config.as_ref(), v.seed)?;
            let checks = verify::run_all(&cfg)?;
            for c in &checks {
                println!("{c}");
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
        Command::Staircase(a) => (Experiment::Staircase, a),
        Command::Endurance(a) => (Experiment::Endurance, a),
        Command::D2d(a) => (Experiment::D2d, a),
        Command::XorMap(a) => (Experiment::XorMap, a),
        Command::Energy(a) => (Experiment::Energy, a),
        Command::Train(a) => (Experiment::Train, a),
    };
    let cfg = load(args.config.as_ref(), args.seed)?;
    let summary = run_experiment(experiment, &cfg, &args.out)?;
    print!("{summary}");
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
