//! Experiment runners. Each returns an in-memory result that can write its
//! CSV artifact and a short plain-text summary.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::array::{ledger_report, EnergyLedger};
use crate::automata::{train, xor_accuracy, xor_dataset, TransitionEvent, TsetlinMachine};
use crate::bridge::{
    decision_agreement, map_machine, run_mapped_training, ActionThreshold, Agreement,
    LoggedPulse, MappedAutomaton, MappedRun,
};
use crate::device::{
    cycle_endurance, drive_to_rail, sample_device, EnduranceRecord, PulseMode, YFlashCell,
};
use crate::error::{Error, Result};

use super::config::SimConfig;

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn non_decreasing(xs: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = xs.collect();
    v.windows(2).all(|w| w[1] >= w[0])
}

fn min_max(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

// ---------------------------------------------------------------- staircase

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircaseRow {
    pub pulse_index: usize,
    /// `None` for the initial read before any pulse.
    pub mode: Option<PulseMode>,
    pub conductance: f64,
    pub i_read: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Staircase {
    pub width: f64,
    pub rows: Vec<StaircaseRow>,
}

impl Staircase {
    /// The initial state followed by every program-pulse state.
    pub fn program_side(&self) -> impl Iterator<Item = &StaircaseRow> {
        self.rows
            .iter()
            .filter(|r| r.mode != Some(PulseMode::Erase))
    }

    pub fn program_pulses(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.mode == Some(PulseMode::Program))
            .count()
    }

    pub fn erase_pulses(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.mode == Some(PulseMode::Erase))
            .count()
    }

    pub fn distinct_program_states(&self) -> usize {
        self.program_side()
            .map(|r| r.conductance.to_bits())
            .collect::<HashSet<_>>()
            .len()
    }

    pub fn program_side_decreasing(&self) -> bool {
        let g: Vec<f64> = self.program_side().map(|r| r.conductance).collect();
        g.windows(2).all(|w| w[1] < w[0])
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pulse_index", "mode", "g_S", "i_read_A"])?;
        for r in &self.rows {
            w.write_record([
                r.pulse_index.to_string(),
                r.mode.map_or("initial", PulseMode::as_str).to_string(),
                sci(r.conductance),
                sci(r.i_read),
            ])?;
        }
        finish(w)
    }

    pub fn summary(&self) -> String {
        let program: Vec<_> = self.program_side().collect();
        let mut s = String::new();
        let _ = writeln!(s, "pulse_width_s = {}", sci(self.width));
        let _ = writeln!(s, "program_pulses = {}", self.program_pulses());
        let _ = writeln!(s, "erase_pulses = {}", self.erase_pulses());
        let _ = writeln!(s, "distinct_program_states = {}", self.distinct_program_states());
        let _ = writeln!(s, "program_side_decreasing = {}", self.program_side_decreasing());
        let _ = writeln!(s, "g_first_S = {}", sci(program[0].conductance));
        let _ = writeln!(s, "g_last_program_S = {}", sci(program[program.len() - 1].conductance));
        s
    }
}

/// Programs a fresh cell onto the LCS rail, then erases it back.
pub fn run_staircase(cfg: &SimConfig) -> Result<Staircase> {
    let params = cfg.device_params()?;
    let v = params.v_read;
    let width = cfg.staircase_width;
    let mut cell = YFlashCell::new(params, cfg.seed)?;
    let mut rows = vec![StaircaseRow {
        pulse_index: 0,
        mode: None,
        conductance: cell.conductance(),
        i_read: cell.read(v)?,
    }];
    for mode in [PulseMode::Program, PulseMode::Erase] {
        let rail = if mode == PulseMode::Program { 0.0 } else { 1.0 };
        let mut n = 0;
        while cell.q() != rail {
            if n == cfg.staircase_pulse_cap {
                return Err(Error::EnduranceFailure {
                    cycle: 1,
                    mode,
                    cap: cfg.staircase_pulse_cap,
                });
            }
            let p = match mode {
                PulseMode::Program => cell.program_pulse(width)?,
                _ => cell.erase_pulse(width)?,
            };
            n += 1;
            rows.push(StaircaseRow {
                pulse_index: rows.len(),
                mode: Some(mode),
                conductance: p.g_after,
                i_read: cell.read(v)?,
            });
        }
    }
    Ok(Staircase { width, rows })
}

// --------------------------------------------------------------- endurance

#[derive(Debug, Clone, PartialEq)]
pub struct Endurance {
    pub records: Vec<EnduranceRecord>,
}

impl Endurance {
    pub fn max_t_program(&self) -> f64 {
        min_max(self.records.iter().map(|r| r.t_program)).1
    }

    pub fn max_t_erase(&self) -> f64 {
        min_max(self.records.iter().map(|r| r.t_erase)).1
    }

    pub fn program_non_decreasing(&self) -> bool {
        non_decreasing(self.records.iter().map(|r| r.t_program))
    }

    pub fn erase_non_decreasing(&self) -> bool {
        non_decreasing(self.records.iter().map(|r| r.t_erase))
    }

    pub fn lcs_range(&self) -> (f64, f64) {
        min_max(self.records.iter().map(|r| r.lcs_read))
    }

    pub fn hcs_range(&self) -> (f64, f64) {
        min_max(self.records.iter().map(|r| r.hcs_read))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cycle", "lcs_S", "hcs_S", "t_program_s", "t_erase_s"])?;
        for r in &self.records {
            w.write_record([
                r.cycle.to_string(),
                sci(r.lcs_read),
                sci(r.hcs_read),
                sci(r.t_program),
                sci(r.t_erase),
            ])?;
        }
        finish(w)
    }

    pub fn summary(&self) -> String {
        let (lcs_lo, lcs_hi) = self.lcs_range();
        let (hcs_lo, hcs_hi) = self.hcs_range();
        let mut s = String::new();
        let _ = writeln!(s, "cycles = {}", self.records.len());
        let _ = writeln!(s, "max_t_program_s = {}", sci(self.max_t_program()));
        let _ = writeln!(s, "max_t_erase_s = {}", sci(self.max_t_erase()));
        let _ = writeln!(s, "t_program_non_decreasing = {}", self.program_non_decreasing());
        let _ = writeln!(s, "t_erase_non_decreasing = {}", self.erase_non_decreasing());
        let _ = writeln!(s, "lcs_min_S = {}\nlcs_max_S = {}", sci(lcs_lo), sci(lcs_hi));
        let _ = writeln!(s, "hcs_min_S = {}\nhcs_max_S = {}", sci(hcs_lo), sci(hcs_hi));
        s
    }
}

pub fn run_endurance(cfg: &SimConfig) -> Result<Endurance> {
    let mut cell = YFlashCell::new(cfg.endurance_device_params()?, cfg.seed)?;
    let records = cycle_endurance(
        &mut cell,
        cfg.endurance_cycles,
        cfg.endurance_width,
        cfg.endurance_pulse_cap,
    )?;
    Ok(Endurance { records })
}

// --------------------------------------------------------------------- d2d

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D2dRow {
    pub device_id: usize,
    pub lcs: f64,
    pub hcs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct D2d {
    pub rows: Vec<D2dRow>,
}

impl D2d {
    pub fn lcs_stats(&self) -> (f64, f64) {
        mean_std(&self.rows.iter().map(|r| r.lcs).collect::<Vec<_>>())
    }

    pub fn hcs_stats(&self) -> (f64, f64) {
        mean_std(&self.rows.iter().map(|r| r.hcs).collect::<Vec<_>>())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["device_id", "lcs_S", "hcs_S"])?;
        for r in &self.rows {
            w.write_record([r.device_id.to_string(), sci(r.lcs), sci(r.hcs)])?;
        }
        finish(w)
    }

    pub fn summary(&self) -> String {
        let (lm, ls) = self.lcs_stats();
        let (hm, hs) = self.hcs_stats();
        let (llo, lhi) = min_max(self.rows.iter().map(|r| r.lcs));
        let (hlo, hhi) = min_max(self.rows.iter().map(|r| r.hcs));
        let mut s = String::new();
        let _ = writeln!(s, "devices = {}", self.rows.len());
        let _ = writeln!(s, "lcs_mean_S = {}\nlcs_std_S = {}", sci(lm), sci(ls));
        let _ = writeln!(s, "lcs_min_S = {}\nlcs_max_S = {}", sci(llo), sci(lhi));
        let _ = writeln!(s, "hcs_mean_S = {}\nhcs_std_S = {}", sci(hm), sci(hs));
        let _ = writeln!(s, "hcs_min_S = {}\nhcs_max_S = {}", sci(hlo), sci(hhi));
        s
    }
}

/// Samples `n_devices` cells, programs each onto the LCS rail and erases it
/// back, reading both endpoints at the nominal read bias.
pub fn run_d2d(cfg: &SimConfig) -> Result<D2d> {
    let pop = cfg.population()?;
    let base = cfg.device_params()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cap = cfg.endurance_pulse_cap;
    let mut rows = Vec::with_capacity(cfg.n_devices);
    for device_id in 0..cfg.n_devices {
        let mut cell = sample_device(&pop, &base, &mut rng)?;
        for mode in [PulseMode::Program, PulseMode::Erase] {
            if drive_to_rail(&mut cell, mode, cfg.d2d_width, cap)?.is_none() {
                return Err(Error::EnduranceFailure { cycle: 1, mode, cap });
            }
            if mode == PulseMode::Program {
                rows.push(D2dRow {
                    device_id,
                    lcs: cell.read_conductance(),
                    hcs: 0.0,
                });
            }
        }
        rows.last_mut().expect("pushed above").hcs = cell.read_conductance();
    }
    Ok(D2d { rows })
}

// ------------------------------------------------------------------- train

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub machine: TsetlinMachine,
    pub events: Vec<TransitionEvent>,
    pub accuracy: f64,
}

impl TrainRun {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sample_index", "ta_index", "old_state", "new_state"])?;
        for e in &self.events {
            w.write_record([
                e.sample_index.to_string(),
                e.ta_index.to_string(),
                e.old_state.to_string(),
                e.new_state.to_string(),
            ])?;
        }
        finish(w)
    }

    pub fn summary(&self) -> String {
        let states: Vec<String> = self.machine.automata().map(|t| t.state().to_string()).collect();
        format!(
            "transitions = {}\nxor_accuracy = {}\nfinal_states = [{}]\n",
            self.events.len(),
            self.accuracy,
            states.join(", ")
        )
    }
}

/// Software-only XOR training. The dataset and the feedback draws share one
/// stream seeded from `cfg.seed`.
pub fn run_train(cfg: &SimConfig) -> Result<TrainRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let data = xor_dataset(cfg.xor_samples, &mut rng)?;
    let mut machine = TsetlinMachine::new(cfg.tm_config())?;
    let events = train(&mut machine, &data, &mut rng)?;
    let accuracy = xor_accuracy(&machine)?;
    Ok(TrainRun {
        machine,
        events,
        accuracy,
    })
}

// ----------------------------------------------------------------- xor-map

#[derive(Debug, Clone)]
pub struct XorMap {
    pub machine: TsetlinMachine,
    pub cells: Vec<MappedAutomaton>,
    pub run: MappedRun,
    pub accuracy: f64,
    pub agreement: Agreement,
    /// Automata reported as the tracked set.
    pub tracked: Vec<usize>,
}

impl XorMap {
    pub fn tracked_pulses(&self) -> usize {
        self.tracked
            .iter()
            .map(|&i| self.cells[i].pulse_log().len())
            .sum()
    }

    pub fn tracked_transitions(&self) -> usize {
        let set: HashSet<usize> = self.tracked.iter().copied().collect();
        self.run
            .trace
            .iter()
            .filter(|r| set.contains(&r.ta_index))
            .count()
    }

    /// Every logged pulse, ordered by sample then automaton.
    pub fn pulse_log(&self) -> Vec<LoggedPulse> {
        let mut all: Vec<LoggedPulse> = self
            .cells
            .iter()
            .flat_map(|m| m.pulse_log().iter().copied())
            .collect();
        all.sort_by_key(|p| (p.sample_index, p.ta_index));
        all
    }

    pub fn reduction_factor(&self) -> f64 {
        self.run.transitions as f64 / self.run.pulse_count.max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "sample_index",
            "ta_index",
            "ta_state",
            "dc_value",
            "pulse_issued",
            "g_S",
        ])?;
        for r in &self.run.trace {
            w.write_record([
                r.sample_index.to_string(),
                r.ta_index.to_string(),
                r.ta_state.to_string(),
                r.dc_value.to_string(),
                r.pulse_issued.map_or("none", PulseMode::as_str).to_string(),
                sci(r.conductance),
            ])?;
        }
        finish(w)
    }

    pub fn write_pulses_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "sample_index",
            "ta_index",
            "mode",
            "width_s",
            "energy_J",
            "g_before_S",
            "g_after_S",
        ])?;
        for p in self.pulse_log() {
            w.write_record([
                p.sample_index.to_string(),
                p.ta_index.to_string(),
                p.pulse.mode.as_str().to_string(),
                sci(p.pulse.width),
                sci(p.pulse.energy),
                sci(p.pulse.g_before),
                sci(p.pulse.g_after),
            ])?;
        }
        finish(w)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let n = self.machine.n_half();
        let _ = writeln!(s, "xor_accuracy = {}", self.accuracy);
        let _ = writeln!(s, "transitions = {}", self.run.transitions);
        let _ = writeln!(s, "pulses_total = {}", self.run.pulse_count);
        let _ = writeln!(s, "reduction_factor = {:.3}", self.reduction_factor());
        let _ = writeln!(s, "tracked_automata = {:?}", self.tracked);
        let _ = writeln!(s, "tracked_transitions = {}", self.tracked_transitions());
        let _ = writeln!(s, "tracked_pulses = {}", self.tracked_pulses());
        let per_ta: Vec<usize> = self.cells.iter().map(|m| m.pulse_log().len()).collect();
        let _ = writeln!(s, "pulses_per_automaton = {per_ta:?}");
        let tracked_g: Vec<(u32, f64)> = self
            .tracked
            .iter()
            .map(|&i| (self.machine.automaton(i).state(), self.run.final_conductances[i]))
            .collect();
        let inc = tracked_g.iter().filter(|(st, _)| *st > n).map(|t| t.1);
        let exc = tracked_g.iter().filter(|(st, _)| *st <= n).map(|t| t.1);
        let max_inc = inc.fold(f64::NAN, f64::max);
        let min_exc = exc.fold(f64::NAN, f64::min);
        let _ = writeln!(
            s,
            "tracked_included = {}",
            tracked_g.iter().filter(|(st, _)| *st > n).count()
        );
        let _ = writeln!(s, "max_included_g_S = {}", sci(max_inc));
        let _ = writeln!(s, "min_excluded_g_S = {}", sci(min_exc));
        let _ = writeln!(s, "agreement_checked = {}", self.agreement.checked);
        let _ = writeln!(s, "agreement_mismatched = {:?}", self.agreement.mismatched);
        let _ = writeln!(s, "agreement = {}", self.agreement.all_agree());
        let reads: usize = self.cells.iter().map(|m| m.read_count()).sum();
        let _ = writeln!(s, "reads_after_training = {reads}");
        for (i, m) in self.cells.iter().enumerate() {
            let _ = writeln!(
                s,
                "ta {i:>3}: state {:>3} g_S {} pulses {}",
                self.machine.automaton(i).state(),
                sci(m.cell().conductance()),
                m.pulse_log().len()
            );
        }
        s
    }
}

/// XOR training with every automaton mapped onto its own cell. Agreement is
/// judged after training, at a margin equal to the counter threshold.
pub fn run_xor_map(cfg: &SimConfig) -> Result<XorMap> {
    let bridge = cfg.bridge_config()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let data = xor_dataset(cfg.xor_samples, &mut rng)?;
    let mut machine = TsetlinMachine::new(cfg.tm_config())?;
    let mut cells = map_machine(&machine, &bridge, cfg.seed)?;
    let run = run_mapped_training(&mut machine, &mut cells, &data, &mut rng)?;
    let accuracy = xor_accuracy(&machine)?;
    let thr = ActionThreshold::midpoint(&bridge.device);
    let agreement = decision_agreement(&machine, &mut cells, &thr, bridge.dc_threshold);
    let tracked = (0..cfg.tracked_automata.min(machine.num_automata())).collect();
    Ok(XorMap {
        machine,
        cells,
        run,
        accuracy,
        agreement,
        tracked,
    })
}

// ------------------------------------------------------------------ energy

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub mode: PulseMode,
    pub voltage: f64,
    pub states: usize,
    pub width: f64,
    pub average_power: f64,
    pub average_energy: f64,
    pub total_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable {
    pub rows: Vec<EnergyRow>,
}

impl EnergyTable {
    pub fn row(&self, mode: PulseMode) -> &EnergyRow {
        self.rows
            .iter()
            .find(|r| r.mode == mode)
            .expect("table covers every mode")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "mode",
            "voltage_V",
            "states",
            "width_s",
            "average_power_W",
            "average_energy_J",
            "total_energy_J",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.mode.as_str().to_string(),
                sci(r.voltage),
                r.states.to_string(),
                sci(r.width),
                sci(r.average_power),
                sci(r.average_energy),
                sci(r.total_energy),
            ])?;
        }
        finish(w)
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{:<8} {:>6} {:>7} {:>12} {:>12} {:>12}\n",
            "mode", "V", "states", "power_uW", "energy_nJ", "total_nJ"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<8} {:>6} {:>7} {:>12.3e} {:>12.3e} {:>12.3e}",
                r.mode.as_str(),
                r.voltage,
                r.states,
                r.average_power * 1e6,
                r.average_energy * 1e9,
                r.total_energy * 1e9
            );
        }
        s
    }
}

/// Replays the per-mode pulse trains through a ledger and reports the
/// per-pulse averages.
pub fn run_energy(cfg: &SimConfig) -> Result<EnergyTable> {
    let mut params = cfg.device_params()?.noise_free();
    params.read_pulse_width = cfg.energy_read_width;
    let (v_read, v_program, v_erase) = (params.v_read, params.v_program, params.v_erase);
    let power = params.power;
    let mut cell = YFlashCell::new(params, cfg.seed)?;
    let mut ledger = EnergyLedger::default();
    for _ in 0..cfg.energy_read_states {
        ledger.record(&cell.read_pulse());
    }
    for _ in 0..cfg.energy_program_states {
        ledger.record(&cell.program_pulse(cfg.energy_program_width)?);
    }
    for _ in 0..cfg.energy_erase_states {
        ledger.record(&cell.erase_pulse(cfg.energy_erase_width)?);
    }
    let report = ledger_report(&ledger, &power);
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let (voltage, width) = match r.mode {
                PulseMode::Read => (v_read, cfg.energy_read_width),
                PulseMode::Program => (v_program, cfg.energy_program_width),
                PulseMode::Erase => (v_erase, cfg.energy_erase_width),
            };
            EnergyRow {
                mode: r.mode,
                voltage,
                states: r.pulses,
                width,
                average_power: power.power(r.mode),
                average_energy: r.energy_per_pulse,
                total_energy: r.total_energy,
            }
        })
        .collect();
    Ok(EnergyTable { rows })
}
