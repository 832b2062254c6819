//! Mapping of automaton state motion onto sparse blind writes.
//!
//! Every automaton is paired with one cell and a signed divergence counter.
//! Unit state changes accumulate in the counter; once it reaches `+threshold`
//! the cell receives one erase pulse (toward Include), at `-threshold` one
//! program pulse (toward Exclude), and the counter resets to zero. No cell is
//! read while training runs.

use rand::Rng;

use crate::automata::{Action, Sample, TsetlinMachine};
use crate::device::{DeviceParams, PulseMode, PulseResult, YFlashCell};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivergenceCounter {
    value: i32,
    threshold: i32,
}

impl DivergenceCounter {
    pub fn new(threshold: u32) -> Result<Self> {
        if threshold == 0 || threshold > i32::MAX as u32 {
            return Err(Error::invalid("dc_threshold", "must be a positive integer"));
        }
        Ok(Self {
            value: 0,
            threshold: threshold as i32,
        })
    }

    pub fn value(&self) -> i32 {
        self.value
    }

    pub fn threshold(&self) -> u32 {
        self.threshold as u32
    }

    /// Adds one unit step. Returns the write the counter asks for, if any,
    /// and resets itself when it fires.
    pub fn accumulate(&mut self, delta: i32) -> Result<Option<PulseMode>> {
        if delta.abs() > 1 {
            return Err(Error::InvalidDelta(delta));
        }
        self.value += delta;
        let fire = if self.value >= self.threshold {
            Some(PulseMode::Erase)
        } else if self.value <= -self.threshold {
            Some(PulseMode::Program)
        } else {
            None
        };
        if fire.is_some() {
            self.value = 0;
        }
        Ok(fire)
    }
}

/// Include/Exclude decision level on the cell conductance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionThreshold {
    g_mid: f64,
}

impl ActionThreshold {
    pub fn new(g_mid: f64, params: &DeviceParams) -> Result<Self> {
        if !(g_mid > params.g_lcs && g_mid < params.g_hcs) {
            return Err(Error::invalid(
                "g_mid",
                format!("{g_mid:e} S is not between g_lcs and g_hcs"),
            ));
        }
        Ok(Self { g_mid })
    }

    /// Geometric mean of the nominal endpoints.
    pub fn midpoint(params: &DeviceParams) -> Self {
        Self {
            g_mid: (params.g_lcs * params.g_hcs).sqrt(),
        }
    }

    pub fn g_mid(&self) -> f64 {
        self.g_mid
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoggedPulse {
    pub sample_index: usize,
    pub ta_index: usize,
    /// Counter value that triggered the pulse, before reset.
    pub trigger: i32,
    pub pulse: PulseResult,
}

#[derive(Debug, Clone)]
pub struct MappedAutomaton {
    ta_index: usize,
    cell: YFlashCell,
    dc: DivergenceCounter,
    pulse_width: f64,
    pulse_log: Vec<LoggedPulse>,
    reads: usize,
}

impl MappedAutomaton {
    pub fn new(ta_index: usize, cell: YFlashCell, threshold: u32, pulse_width: f64) -> Result<Self> {
        if !(pulse_width > 0.0) {
            return Err(Error::invalid("pulse_width", "must be positive"));
        }
        Ok(Self {
            ta_index,
            cell,
            dc: DivergenceCounter::new(threshold)?,
            pulse_width,
            pulse_log: Vec::new(),
            reads: 0,
        })
    }

    pub fn ta_index(&self) -> usize {
        self.ta_index
    }

    pub fn cell(&self) -> &YFlashCell {
        &self.cell
    }

    pub fn counter(&self) -> &DivergenceCounter {
        &self.dc
    }

    pub fn pulse_width(&self) -> f64 {
        self.pulse_width
    }

    pub fn pulse_log(&self) -> &[LoggedPulse] {
        &self.pulse_log
    }

    pub fn read_count(&self) -> usize {
        self.reads
    }

    /// Forwards one automaton step to the counter and issues at most one
    /// pulse.
    pub fn update(&mut self, delta: i32, sample_index: usize) -> Result<Option<PulseResult>> {
        let before = self.dc.value() + delta;
        let Some(mode) = self.dc.accumulate(delta)? else {
            return Ok(None);
        };
        let pulse = match mode {
            PulseMode::Erase => self.cell.erase_pulse(self.pulse_width)?,
            _ => self.cell.program_pulse(self.pulse_width)?,
        };
        self.pulse_log.push(LoggedPulse {
            sample_index,
            ta_index: self.ta_index,
            trigger: before,
            pulse,
        });
        Ok(Some(pulse))
    }

    pub fn read_action(&mut self, thr: &ActionThreshold) -> Action {
        self.reads += 1;
        if self.cell.conductance() >= thr.g_mid {
            Action::Include
        } else {
            Action::Exclude
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeConfig {
    pub dc_threshold: u32,
    pub pulse_width: f64,
    pub device: DeviceParams,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self {
            dc_threshold: 15,
            pulse_width: 0.5e-3,
            device: DeviceParams::default(),
        }
    }
}

/// One cell per automaton of `tm`, each starting at the conductance midpoint.
/// Cell `i` draws its noise stream from `seed` and `i`.
pub fn map_machine(tm: &TsetlinMachine, config: &BridgeConfig, seed: u64) -> Result<Vec<MappedAutomaton>> {
    (0..tm.num_automata())
        .map(|i| {
            let cell_seed = seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let cell = YFlashCell::with_state(config.device.clone(), 0.5, cell_seed)?;
            MappedAutomaton::new(i, cell, config.dc_threshold, config.pulse_width)
        })
        .collect()
}

/// One row per automaton transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub sample_index: usize,
    pub ta_index: usize,
    pub ta_state: u32,
    pub dc_value: i32,
    pub pulse_issued: Option<PulseMode>,
    pub conductance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappedRun {
    pub pulse_count: usize,
    pub transitions: usize,
    pub final_conductances: Vec<f64>,
    pub trace: Vec<TraceRow>,
}

/// Trains `tm` over `dataset`, forwarding every transition to its cell.
pub fn run_mapped_training<R: Rng + ?Sized>(
    tm: &mut TsetlinMachine,
    cells: &mut [MappedAutomaton],
    dataset: &[Sample],
    rng: &mut R,
) -> Result<MappedRun> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if cells.len() != tm.num_automata() {
        return Err(Error::MappingMismatch {
            expected: tm.num_automata(),
            actual: cells.len(),
        });
    }
    let mut pulse_count = 0;
    let mut trace = Vec::new();
    for (i, (x, y)) in dataset.iter().enumerate() {
        for ev in tm.train_step(x, *y, i, rng)? {
            let m = &mut cells[ev.ta_index];
            let pulse = m.update(ev.delta(), i)?;
            pulse_count += usize::from(pulse.is_some());
            trace.push(TraceRow {
                sample_index: i,
                ta_index: ev.ta_index,
                ta_state: ev.new_state,
                dc_value: m.dc.value(),
                pulse_issued: pulse.map(|p| p.mode),
                conductance: m.cell.conductance(),
            });
        }
    }
    Ok(MappedRun {
        pulse_count,
        transitions: trace.len(),
        final_conductances: cells.iter().map(|m| m.cell.conductance()).collect(),
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Agreement {
    /// Automata far enough from the boundary to be judged.
    pub checked: usize,
    pub mismatched: Vec<usize>,
}

impl Agreement {
    pub fn all_agree(&self) -> bool {
        self.mismatched.is_empty()
    }
}

/// Compares the conductance-read action of every automaton whose final state
/// is at least `margin` states from the boundary against its software action.
pub fn decision_agreement(
    tm: &TsetlinMachine,
    cells: &mut [MappedAutomaton],
    thr: &ActionThreshold,
    margin: u32,
) -> Agreement {
    let n = tm.n_half();
    let mut out = Agreement::default();
    for m in cells.iter_mut() {
        let ta = tm.automaton(m.ta_index);
        let s = ta.state();
        if s >= n + margin || s + margin <= n {
            out.checked += 1;
            if m.read_action(thr) != ta.action() {
                out.mismatched.push(m.ta_index);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{train, xor_dataset, TmConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mapped(threshold: u32) -> MappedAutomaton {
        let cell = YFlashCell::with_state(DeviceParams::default().noise_free(), 0.5, 0).unwrap();
        MappedAutomaton::new(0, cell, threshold, 0.5e-3).unwrap()
    }

    #[test]
    fn fires_erase_at_plus_threshold() {
        let mut m = mapped(15);
        for _ in 0..14 {
            assert!(m.update(1, 0).unwrap().is_none());
        }
        assert_eq!(m.counter().value(), 14);
        let p = m.update(1, 0).unwrap().unwrap();
        assert_eq!(p.mode, PulseMode::Erase);
        assert!(p.g_after > p.g_before);
        assert_eq!(m.counter().value(), 0);
        assert_eq!(m.pulse_log().len(), 1);
        assert_eq!(m.pulse_log()[0].trigger, 15);
    }

    #[test]
    fn fires_program_at_minus_threshold() {
        let mut m = mapped(15);
        for _ in 0..14 {
            m.update(-1, 0).unwrap();
        }
        let p = m.update(-1, 0).unwrap().unwrap();
        assert_eq!(p.mode, PulseMode::Program);
        assert!(p.g_after < p.g_before);
        assert_eq!(m.counter().value(), 0);
    }

    #[test]
    fn rejects_large_delta() {
        let mut m = mapped(15);
        assert!(matches!(m.update(2, 0), Err(Error::InvalidDelta(2))));
        assert!(DivergenceCounter::new(0).is_err());
    }

    #[test]
    fn read_action_examples() {
        let p = DeviceParams::default();
        let thr = ActionThreshold::midpoint(&p);
        assert!((thr.g_mid() - 5e-8).abs() < 1e-20);
        let g_of = |g: f64| ((g / p.g_lcs).ln() / (p.g_hcs / p.g_lcs).ln()).clamp(0.0, 1.0);
        let mut m = mapped(15);
        m.cell.set_state(g_of(2.33e-6)).unwrap();
        assert_eq!(m.read_action(&thr), Action::Include);
        m.cell.set_state(g_of(23.2e-9)).unwrap();
        assert_eq!(m.read_action(&thr), Action::Exclude);
        m.cell.set_state(0.5).unwrap();
        assert_eq!(m.read_action(&thr), Action::Include);
        assert_eq!(m.read_count(), 3);
        assert!(ActionThreshold::new(1e-3, &p).is_err());
    }

    #[test]
    fn threshold_one_writes_every_transition() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = xor_dataset(2000, &mut rng).unwrap();
        let mut tm = TsetlinMachine::new(TmConfig::default()).unwrap();
        let cfg = BridgeConfig {
            dc_threshold: 1,
            ..BridgeConfig::default()
        };
        let mut cells = map_machine(&tm, &cfg, 2).unwrap();
        let run = run_mapped_training(&mut tm, &mut cells, &data, &mut rng).unwrap();
        assert!(run.transitions > 0);
        assert_eq!(run.pulse_count, run.transitions);
    }

    #[test]
    fn mapped_training_matches_plain_training() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = xor_dataset(5000, &mut rng).unwrap();
        let mut rng_a = ChaCha8Rng::seed_from_u64(80);
        let mut rng_b = ChaCha8Rng::seed_from_u64(80);
        let mut plain = TsetlinMachine::new(TmConfig::default()).unwrap();
        let events = train(&mut plain, &data, &mut rng_a).unwrap();
        let mut tm = TsetlinMachine::new(TmConfig::default()).unwrap();
        let mut cells = map_machine(&tm, &BridgeConfig::default(), 8).unwrap();
        let run = run_mapped_training(&mut tm, &mut cells, &data, &mut rng_b).unwrap();
        assert_eq!(plain, tm);
        assert_eq!(run.transitions, events.len());
        let motion: usize = events.iter().map(|e| e.delta().unsigned_abs() as usize).sum();
        assert!(run.pulse_count <= motion / 15);
        assert!(cells.iter().all(|m| m.read_count() == 0));
    }

    #[test]
    fn mapping_requires_one_cell_per_automaton() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let data = xor_dataset(10, &mut rng).unwrap();
        let mut tm = TsetlinMachine::new(TmConfig::default()).unwrap();
        let mut cells = map_machine(&tm, &BridgeConfig::default(), 0).unwrap();
        cells.pop();
        assert!(run_mapped_training(&mut tm, &mut cells, &data, &mut rng).is_err());
        let mut cells = map_machine(&tm, &BridgeConfig::default(), 0).unwrap();
        assert!(matches!(
            run_mapped_training(&mut tm, &mut cells, &[], &mut rng),
            Err(Error::EmptyDataset)
        ));
    }
}
