//! Phenomenological two-terminal Y-Flash cell.
//!
//! The stored state is a normalized charge `q` in `[0, 1]`: `0` is the fully
//! programmed low-conductance state, `1` the fully erased high-conductance
//! state. Conductance at the 2 V read point is log-linear in `q`, so each
//! program or erase pulse moves the cell by a roughly constant ratio.
//!
//! Cycle-to-cycle variation shows up where the cell saturates: every time a
//! pulse drives it onto the LCS floor or HCS ceiling, the landing conductance
//! is redrawn from a clipped lognormal around the nominal endpoint. An optional
//! per-pulse step jitter is also available (off by default).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};

/// Snapping distance for the `q` rails, absorbs float drift from summing steps.
const RAIL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseMode {
    Read,
    Program,
    Erase,
}

impl PulseMode {
    pub const ALL: [PulseMode; 3] = [PulseMode::Read, PulseMode::Program, PulseMode::Erase];

    pub fn as_str(self) -> &'static str {
        match self {
            PulseMode::Read => "read",
            PulseMode::Program => "program",
            PulseMode::Erase => "erase",
        }
    }
}

impl fmt::Display for PulseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PulseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "read" => Ok(PulseMode::Read),
            "program" => Ok(PulseMode::Program),
            "erase" => Ok(PulseMode::Erase),
            other => Err(Error::invalid("mode", format!("unknown pulse mode `{other}`"))),
        }
    }
}

/// Average power drawn in each operation mode, in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTable {
    pub read: f64,
    pub program: f64,
    pub erase: f64,
}

impl Default for PowerTable {
    fn default() -> Self {
        Self {
            read: 1.828e-6,
            program: 695e-6,
            erase: 8e-9,
        }
    }
}

impl PowerTable {
    pub fn power(&self, mode: PulseMode) -> f64 {
        match mode {
            PulseMode::Read => self.read,
            PulseMode::Program => self.program,
            PulseMode::Erase => self.erase,
        }
    }

    pub fn energy(&self, mode: PulseMode, width: f64) -> Result<f64> {
        if !(width > 0.0) {
            return Err(Error::invalid("width", format!("{width} s is not positive")));
        }
        Ok(self.power(mode) * width)
    }
}

/// Energy of one pulse under the default power table.
pub fn energy_of_pulse(mode: PulseMode, width: f64) -> Result<f64> {
    PowerTable::default().energy(mode, width)
}

/// Pulse width to full-range step count map.
///
/// Anchors are `(width_s, steps)` pairs. Between anchors the count is
/// interpolated on log-log axes; outside them the nearest segment is
/// extrapolated. An exact anchor width returns its step count verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCalibration {
    anchors: Vec<(f64, f64)>,
}

impl StepCalibration {
    pub fn new(mut anchors: Vec<(f64, f64)>) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::invalid("calibration", "need at least two anchors"));
        }
        if anchors.iter().any(|&(w, n)| !(w > 0.0) || !(n >= 1.0)) {
            return Err(Error::invalid(
                "calibration",
                "anchor widths must be positive and step counts at least 1",
            ));
        }
        anchors.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in anchors.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::invalid("calibration", "duplicate anchor width"));
            }
            if pair[1].1 > pair[0].1 {
                return Err(Error::invalid(
                    "calibration",
                    "step count must not increase with pulse width",
                ));
            }
        }
        Ok(Self { anchors })
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn steps(&self, width: f64) -> f64 {
        if let Some(&(_, n)) = self.anchors.iter().find(|(w, _)| *w == width) {
            return n;
        }
        let last = self.anchors.len() - 1;
        let seg = self
            .anchors
            .windows(2)
            .position(|p| width < p[1].0)
            .unwrap_or(last - 1);
        let (w0, n0) = self.anchors[seg];
        let (w1, n1) = self.anchors[seg + 1];
        let slope = (n1.ln() - n0.ln()) / (w1.ln() - w0.ln());
        (n0.ln() + slope * (width.ln() - w0.ln())).exp().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    /// Conductance at full erase (S).
    pub g_hcs: f64,
    /// Conductance at full program (S).
    pub g_lcs: f64,
    pub program_steps: StepCalibration,
    pub erase_steps: StepCalibration,
    pub v_read: f64,
    pub v_program: f64,
    pub v_erase: f64,
    /// Drain bias above which a read would start programming the cell.
    pub write_threshold: f64,
    pub read_pulse_width: f64,
    /// Log-space sigma of the endpoint landing jitter.
    pub c2c_sigma: f64,
    /// Log-space sigma of the per-pulse step-size jitter.
    pub step_sigma: f64,
    /// Jitter draws are clipped to this many sigmas.
    pub noise_clip: f64,
    /// Fractional growth of the program step count per completed cycle.
    pub program_degradation_rate: f64,
    /// Fractional growth of the erase step count per completed cycle.
    pub erase_degradation_rate: f64,
    pub reverse_leak_ceiling: f64,
    pub power: PowerTable,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            g_hcs: 2.5e-6,
            g_lcs: 1e-9,
            program_steps: StepCalibration::new(vec![(200e-6, 40.0), (10e-6, 1000.0)])
                .expect("valid default calibration"),
            erase_steps: StepCalibration::new(vec![(200e-6, 32.0), (10e-6, 800.0)])
                .expect("valid default calibration"),
            v_read: 2.0,
            v_program: 5.0,
            v_erase: 8.0,
            write_threshold: 4.0,
            read_pulse_width: 5e-9,
            c2c_sigma: 0.012,
            step_sigma: 0.0,
            noise_clip: 3.0,
            program_degradation_rate: 2.5e-4,
            erase_degradation_rate: 2.9e-3,
            reverse_leak_ceiling: 1e-12,
            power: PowerTable::default(),
        }
    }
}

impl DeviceParams {
    /// Same device with every stochastic term disabled.
    pub fn noise_free(mut self) -> Self {
        self.c2c_sigma = 0.0;
        self.step_sigma = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_lcs > 0.0) {
            return Err(Error::invalid("g_lcs", "must be positive"));
        }
        if !(self.g_hcs > self.g_lcs) {
            return Err(Error::invalid("g_hcs", "must exceed g_lcs"));
        }
        for (name, v) in [
            ("v_read", self.v_read),
            ("write_threshold", self.write_threshold),
            ("read_pulse_width", self.read_pulse_width),
        ] {
            if !(v > 0.0) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        if self.v_read > self.write_threshold {
            return Err(Error::invalid("v_read", "read bias exceeds write threshold"));
        }
        for (name, v) in [
            ("c2c_sigma", self.c2c_sigma),
            ("step_sigma", self.step_sigma),
            ("noise_clip", self.noise_clip),
            ("program_degradation_rate", self.program_degradation_rate),
            ("erase_degradation_rate", self.erase_degradation_rate),
            ("reverse_leak_ceiling", self.reverse_leak_ceiling),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, "must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Largest relative excursion of a landing conductance from nominal.
    pub fn c2c_tolerance(&self) -> f64 {
        (self.c2c_sigma * self.noise_clip).exp() - 1.0
    }

    pub fn steps(&self, mode: PulseMode, width: f64) -> f64 {
        match mode {
            PulseMode::Program => self.program_steps.steps(width),
            PulseMode::Erase => self.erase_steps.steps(width),
            PulseMode::Read => f64::INFINITY,
        }
    }

    fn degradation_rate(&self, mode: PulseMode) -> f64 {
        match mode {
            PulseMode::Program => self.program_degradation_rate,
            PulseMode::Erase => self.erase_degradation_rate,
            PulseMode::Read => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseResult {
    pub mode: PulseMode,
    pub width: f64,
    pub energy: f64,
    pub g_before: f64,
    pub g_after: f64,
}

#[derive(Debug, Clone)]
pub struct YFlashCell {
    q: f64,
    params: DeviceParams,
    lcs_jitter: f64,
    hcs_jitter: f64,
    cycle_count: usize,
    reached_lcs: bool,
    rng: ChaCha8Rng,
}

impl YFlashCell {
    /// A freshly erased cell (`q = 1`).
    pub fn new(params: DeviceParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            q: 1.0,
            params,
            lcs_jitter: 1.0,
            hcs_jitter: 1.0,
            cycle_count: 0,
            reached_lcs: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn with_state(params: DeviceParams, q: f64, seed: u64) -> Result<Self> {
        let mut cell = Self::new(params, seed)?;
        cell.set_state(q)?;
        Ok(cell)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Overwrites the stored state directly, bypassing the pulse path.
    pub fn set_state(&mut self, q: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid("q", format!("{q} outside [0, 1]")));
        }
        self.q = q;
        Ok(())
    }

    pub fn params(&self) -> &DeviceParams {
        &self.params
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_count
    }

    pub fn g_lcs(&self) -> f64 {
        self.params.g_lcs * self.lcs_jitter
    }

    pub fn g_hcs(&self) -> f64 {
        self.params.g_hcs * self.hcs_jitter
    }

    /// Secant conductance at the read bias; deterministic in the stored state.
    pub fn conductance(&self) -> f64 {
        let lo = self.g_lcs();
        lo * (self.g_hcs() / lo).powf(self.q)
    }

    /// Two-terminal current at drain bias `v`. Forward bias conducts `G * v`;
    /// reverse bias leaks at most `reverse_leak_ceiling`.
    pub fn read(&self, v: f64) -> Result<f64> {
        if v.abs() > self.params.write_threshold {
            return Err(Error::ReadDisturb {
                volts: v,
                threshold: self.params.write_threshold,
            });
        }
        if v >= 0.0 {
            Ok(self.conductance() * v)
        } else {
            let state = (self.conductance() / self.g_hcs()).min(1.0);
            let bias = (v.abs() / self.params.v_read).min(1.0);
            Ok(-self.params.reverse_leak_ceiling * state * bias)
        }
    }

    /// Conductance measured through the read path at the nominal read bias.
    pub fn read_conductance(&self) -> f64 {
        let v = self.params.v_read;
        self.read(v).expect("nominal read bias is validated") / v
    }

    pub fn read_pulse(&self) -> PulseResult {
        let g = self.conductance();
        let width = self.params.read_pulse_width;
        PulseResult {
            mode: PulseMode::Read,
            width,
            energy: self.params.power.power(PulseMode::Read) * width,
            g_before: g,
            g_after: g,
        }
    }

    pub fn program_pulse(&mut self, width: f64) -> Result<PulseResult> {
        self.write(PulseMode::Program, width)
    }

    pub fn erase_pulse(&mut self, width: f64) -> Result<PulseResult> {
        self.write(PulseMode::Erase, width)
    }

    /// Nominal `q` change of one pulse at the current cycle count.
    pub fn step_size(&self, mode: PulseMode, width: f64) -> f64 {
        let wear = 1.0 + self.params.degradation_rate(mode) * self.cycle_count as f64;
        1.0 / (self.params.steps(mode, width) * wear)
    }

    fn jitter(&mut self, sigma: f64) -> f64 {
        if sigma == 0.0 {
            return 1.0;
        }
        let clip = self.params.noise_clip;
        let z: f64 = StandardNormal.sample(&mut self.rng);
        (sigma * z.clamp(-clip, clip)).exp()
    }

    fn write(&mut self, mode: PulseMode, width: f64) -> Result<PulseResult> {
        let energy = self.params.power.energy(mode, width)?;
        let g_before = self.conductance();
        let step = self.step_size(mode, width) * self.jitter(self.params.step_sigma);
        match mode {
            PulseMode::Program => {
                let was_above = self.q > 0.0;
                self.q -= step;
                if self.q <= RAIL_EPS {
                    self.q = 0.0;
                    if was_above {
                        self.lcs_jitter = self.jitter(self.params.c2c_sigma);
                    }
                    self.reached_lcs = true;
                }
            }
            PulseMode::Erase => {
                let was_below = self.q < 1.0;
                self.q += step;
                if self.q >= 1.0 - RAIL_EPS {
                    self.q = 1.0;
                    if was_below {
                        self.hcs_jitter = self.jitter(self.params.c2c_sigma);
                    }
                    if self.reached_lcs {
                        self.cycle_count += 1;
                        self.reached_lcs = false;
                    }
                }
            }
            PulseMode::Read => {
                return Err(Error::invalid("mode", "read is not a write pulse"));
            }
        }
        Ok(PulseResult {
            mode,
            width,
            energy,
            g_before,
            g_after: self.conductance(),
        })
    }
}

/// Device-to-device spread of the two endpoint conductances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationParams {
    pub lcs_mean: f64,
    pub lcs_sigma: f64,
    pub hcs_mean: f64,
    pub hcs_sigma: f64,
}

impl Default for PopulationParams {
    fn default() -> Self {
        Self {
            lcs_mean: 0.92e-9,
            lcs_sigma: 0.047e-9,
            hcs_mean: 1.04e-6,
            hcs_sigma: 0.027e-6,
        }
    }
}

impl PopulationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lcs_mean > 0.0 && self.hcs_mean > 0.0) {
            return Err(Error::invalid("population", "means must be positive"));
        }
        if !(self.lcs_sigma >= 0.0 && self.hcs_sigma >= 0.0) {
            return Err(Error::invalid("population", "sigmas must be non-negative"));
        }
        if self.lcs_mean + 4.0 * self.lcs_sigma >= self.hcs_mean - 4.0 * self.hcs_sigma {
            return Err(Error::invalid(
                "population",
                "LCS and HCS 4-sigma envelopes overlap",
            ));
        }
        Ok(())
    }
}

fn positive_normal<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> f64 {
    if sigma == 0.0 {
        return mean;
    }
    let dist = Normal::new(mean, sigma).expect("validated sigma");
    loop {
        let x = dist.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
}

/// Draws one device from the population: endpoint conductances are sampled,
/// everything else comes from `base`. The cell starts erased.
pub fn sample_device<R: Rng + ?Sized>(
    pop: &PopulationParams,
    base: &DeviceParams,
    rng: &mut R,
) -> Result<YFlashCell> {
    pop.validate()?;
    let mut params = base.clone();
    params.g_lcs = positive_normal(pop.lcs_mean, pop.lcs_sigma, rng);
    params.g_hcs = positive_normal(pop.hcs_mean, pop.hcs_sigma, rng);
    let seed = rng.random();
    YFlashCell::new(params, seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnduranceRecord {
    pub cycle: usize,
    pub lcs_read: f64,
    pub hcs_read: f64,
    pub t_program: f64,
    pub t_erase: f64,
}

/// Pulses `mode` until the cell sits on the matching rail. Returns the pulse
/// count, or `None` if `cap` pulses were not enough.
pub fn drive_to_rail(cell: &mut YFlashCell, mode: PulseMode, width: f64, cap: usize) -> Result<Option<usize>> {
    let target = match mode {
        PulseMode::Program => 0.0,
        PulseMode::Erase => 1.0,
        PulseMode::Read => return Err(Error::invalid("mode", "read is not a write pulse")),
    };
    for n in 1..=cap {
        cell.write(mode, width)?;
        if cell.q == target {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Full program/erase cycling. Each cycle programs the cell onto the LCS
/// floor, reads it, erases it back to the HCS ceiling and reads again.
pub fn cycle_endurance(
    cell: &mut YFlashCell,
    n_cycles: usize,
    width: f64,
    pulse_cap: usize,
) -> Result<Vec<EnduranceRecord>> {
    if n_cycles == 0 {
        return Err(Error::invalid("n_cycles", "must be at least 1"));
    }
    if !(width > 0.0) {
        return Err(Error::invalid("width", "must be positive"));
    }
    let mut records = Vec::with_capacity(n_cycles);
    for cycle in 1..=n_cycles {
        let n_program = drive_to_rail(cell, PulseMode::Program, width, pulse_cap)?.ok_or(
            Error::EnduranceFailure {
                cycle,
                mode: PulseMode::Program,
                cap: pulse_cap,
            },
        )?;
        let lcs_read = cell.read_conductance();
        let n_erase = drive_to_rail(cell, PulseMode::Erase, width, pulse_cap)?.ok_or(
            Error::EnduranceFailure {
                cycle,
                mode: PulseMode::Erase,
                cap: pulse_cap,
            },
        )?;
        let hcs_read = cell.read_conductance();
        records.push(EnduranceRecord {
            cycle,
            lcs_read,
            hcs_read,
            t_program: n_program as f64 * width,
            t_erase: n_erase as f64 * width,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        ((a - b) / b).abs() <= tol
    }

    fn quiet_cell() -> YFlashCell {
        YFlashCell::new(DeviceParams::default().noise_free(), 1).unwrap()
    }

    #[test]
    fn conductance_endpoints() {
        let mut cell = quiet_cell();
        assert!(rel_eq(cell.conductance(), 2.5e-6, 1e-12));
        cell.set_state(0.0).unwrap();
        assert!(rel_eq(cell.conductance(), 1e-9, 1e-12));
        cell.set_state(0.975).unwrap();
        // 1e-9 * 2500^0.975, evaluated independently
        let expected = 1e-9 * (0.975 * 2500f64.ln()).exp();
        assert!(rel_eq(cell.conductance(), expected, 1e-12));
        assert!(rel_eq(cell.conductance(), 2.06e-6, 3e-3));
    }

    #[test]
    fn read_forward_and_reverse() {
        let mut cell = quiet_cell();
        assert!(rel_eq(cell.read(2.0).unwrap(), 5e-6, 1e-12));
        assert!(cell.read(-2.0).unwrap().abs() <= 1e-12);
        cell.set_state(0.0).unwrap();
        assert!(rel_eq(cell.read(2.0).unwrap(), 2e-9, 1e-12));
        assert!(matches!(cell.read(5.0), Err(Error::ReadDisturb { .. })));
        assert!(matches!(cell.read(-8.0), Err(Error::ReadDisturb { .. })));
    }

    #[test]
    fn program_staircase_has_41_states() {
        let mut cell = quiet_cell();
        let mut states = vec![cell.conductance()];
        for _ in 0..40 {
            states.push(cell.program_pulse(200e-6).unwrap().g_after);
        }
        assert_eq!(cell.q(), 0.0);
        assert!(states.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(states.len(), 41);
        let r = cell.program_pulse(200e-6).unwrap();
        assert_eq!(cell.q(), 0.0);
        assert_eq!(r.g_before, r.g_after);
    }

    #[test]
    fn erase_from_fresh_lcs_takes_32_pulses() {
        let mut cell = YFlashCell::with_state(DeviceParams::default().noise_free(), 0.0, 1).unwrap();
        let n = drive_to_rail(&mut cell, PulseMode::Erase, 200e-6, 100).unwrap();
        assert_eq!(n, Some(32));
        let before = cell.q();
        cell.erase_pulse(200e-6).unwrap();
        assert_eq!(cell.q(), before);
    }

    #[test]
    fn pulse_energies() {
        let mut cell = quiet_cell();
        let r = cell.program_pulse(200e-6).unwrap();
        assert!(rel_eq(r.energy, 139e-9, 1e-12));
        let r = cell.erase_pulse(200e-6).unwrap();
        assert!(rel_eq(r.energy, 1.6e-12, 1e-12));
        assert!(rel_eq(energy_of_pulse(PulseMode::Program, 0.5e-3).unwrap(), 347.5e-9, 1e-12));
        assert!(energy_of_pulse(PulseMode::Read, 0.0).is_err());
        assert!(cell.program_pulse(-1.0).is_err());
    }

    #[test]
    fn calibration_interpolates_log_log() {
        let p = DeviceParams::default();
        assert_eq!(p.program_steps.steps(200e-6), 40.0);
        assert_eq!(p.program_steps.steps(10e-6), 1000.0);
        let half_ms = p.program_steps.steps(0.5e-3);
        // 40 * 2.5^(ln 25 / ln 0.05)
        let expected = 40.0 * 2.5f64.powf(25f64.ln() / 0.05f64.ln());
        assert!(rel_eq(half_ms, expected, 1e-12));
        assert!((14.0..17.0).contains(&half_ms));
        let mid = p.program_steps.steps(50e-6);
        assert!(mid < 1000.0 && mid > 40.0);
        assert!(StepCalibration::new(vec![(1e-6, 10.0), (2e-6, 20.0)]).is_err());
        assert!(StepCalibration::new(vec![(1e-6, 10.0)]).is_err());
    }

    #[test]
    fn population_zero_sigma_is_deterministic() {
        let pop = PopulationParams {
            lcs_sigma: 0.0,
            hcs_sigma: 0.0,
            ..PopulationParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let cell = sample_device(&pop, &DeviceParams::default(), &mut rng).unwrap();
            assert_eq!(cell.params().g_lcs, pop.lcs_mean);
            assert_eq!(cell.params().g_hcs, pop.hcs_mean);
            assert_eq!(cell.q(), 1.0);
        }
    }

    #[test]
    fn population_rejects_overlap() {
        let pop = PopulationParams {
            lcs_mean: 1e-6,
            ..PopulationParams::default()
        };
        assert!(pop.validate().is_err());
    }

    #[test]
    fn degradation_free_endurance_is_flat() {
        let mut params = DeviceParams::default().noise_free();
        params.program_degradation_rate = 0.0;
        params.erase_degradation_rate = 0.0;
        let mut cell = YFlashCell::new(params, 0).unwrap();
        let recs = cycle_endurance(&mut cell, 50, 200e-6, 200).unwrap();
        assert!(recs.iter().all(|r| r.t_program == recs[0].t_program));
        assert!(recs.iter().all(|r| r.t_erase == recs[0].t_erase));
        assert_eq!(cell.cycle_count(), 50);
    }

    #[test]
    fn endurance_cap_reports_failure() {
        let mut cell = quiet_cell();
        let err = cycle_endurance(&mut cell, 1, 200e-6, 10).unwrap_err();
        assert!(matches!(
            err,
            Error::EnduranceFailure { cycle: 1, mode: PulseMode::Program, cap: 10 }
        ));
    }

    #[test]
    fn c2c_landing_stays_inside_tolerance() {
        let params = DeviceParams::default();
        let tol = params.c2c_tolerance();
        let mut cell = YFlashCell::new(params.clone(), 9).unwrap();
        for _ in 0..30 {
            drive_to_rail(&mut cell, PulseMode::Program, 200e-6, 200).unwrap();
            let g = cell.conductance();
            assert!(g >= params.g_lcs * (1.0 - tol) && g <= params.g_lcs * (1.0 + tol));
            drive_to_rail(&mut cell, PulseMode::Erase, 200e-6, 200).unwrap();
            let g = cell.conductance();
            assert!(g >= params.g_hcs * (1.0 - tol) && g <= params.g_hcs * (1.0 + tol));
        }
    }
}
