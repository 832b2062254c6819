//! Experiment harness: deterministic CSV artifacts plus acceptance checks.
//!
//! Every run writes three kinds of file into its output directory:
//! `config.toml` (the fully resolved parameter set), `<experiment>.csv`, and
//! `summary.txt`. The xor-map experiment also writes `pulses.csv`.

pub mod config;
pub mod experiments;
pub mod verify;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use config::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Staircase,
    Endurance,
    D2d,
    XorMap,
    Energy,
    Train,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Staircase,
        Experiment::Endurance,
        Experiment::D2d,
        Experiment::XorMap,
        Experiment::Energy,
        Experiment::Train,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Staircase => "staircase",
            Experiment::Endurance => "endurance",
            Experiment::D2d => "d2d",
            Experiment::XorMap => "xor-map",
            Experiment::Energy => "energy",
            Experiment::Train => "train",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs one experiment into `out_dir` and returns its summary text.
pub fn run_experiment(experiment: Experiment, cfg: &SimConfig, out_dir: &Path) -> Result<String> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_text(
        &out_dir.join("config.toml"),
        &format!("# experiment = {}\n{}", experiment.as_str(), cfg.to_toml()),
    )?;
    let csv_path = out_dir.join(format!("{}.csv", experiment.as_str()));
    let summary = match experiment {
        Experiment::Staircase => {
            let r = experiments::run_staircase(cfg)?;
            r.write_csv(create(&csv_path)?)?;
            r.summary()
        }
        Experiment::Endurance => {
            let r = experiments::run_endurance(cfg)?;
            r.write_csv(create(&csv_path)?)?;
            r.summary()
        }
        Experiment::D2d => {
            let r = experiments::run_d2d(cfg)?;
            r.write_csv(create(&csv_path)?)?;
            r.summary()
        }
        Experiment::XorMap => {
            let r = experiments::run_xor_map(cfg)?;
            r.write_csv(create(&csv_path)?)?;
            r.write_pulses_csv(create(&out_dir.join("pulses.csv"))?)?;
            r.summary()
        }
        Experiment::Energy => {
            let r = experiments::run_energy(cfg)?;
            r.write_csv(create(&csv_path)?)?;
            r.summary()
        }
        Experiment::Train => {
            let r = experiments::run_train(cfg)?;
            r.write_csv(create(&csv_path)?)?;
            r.summary()
        }
    };
    write_text(&out_dir.join("summary.txt"), &summary)?;
    Ok(summary)
}
