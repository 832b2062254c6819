//! Acceptance checks. Each returns a [`Check`] with a one-line verdict; the
//! thresholds are fixed here and do not depend on the config beyond seeds.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::array::CrossbarArray;
use crate::automata::{Feedback, TsetlinAutomaton};
use crate::bridge::{DivergenceCounter, MappedAutomaton};
use crate::device::{DeviceParams, PulseMode, YFlashCell};
use crate::error::Result;

use super::config::SimConfig;
use super::experiments::{
    run_d2d, run_endurance, run_energy, run_staircase, run_train, run_xor_map,
};

pub const PROPERTY_TRIALS: usize = 10_000;
pub const META_SEEDS: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}. {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

fn check(id: u8, name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        id,
        name,
        passed,
        detail,
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn rel_close(x: f64, target: f64, tol: f64) -> bool {
    ((x - target) / target).abs() <= tol
}

/// Three significant figures, as printed in scientific notation.
pub fn sig3(x: f64) -> String {
    format!("{x:.2e}")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed())
}

pub fn staircase(cfg: &SimConfig) -> Result<Check> {
    let mut cfg = cfg.clone();
    cfg.c2c_sigma = 0.0;
    cfg.step_sigma = 0.0;
    cfg.staircase_width = 200e-6;
    let (st, dt) = timed(|| run_staircase(&cfg));
    let st = st?;
    let program: Vec<f64> = st.program_side().map(|r| r.conductance).collect();
    let (first, last) = (program[0], program[program.len() - 1]);
    let passed = st.program_pulses() == 40
        && st.distinct_program_states() == 41
        && st.program_side_decreasing()
        && rel_close(first, 2.5e-6, 0.10)
        && rel_close(last, 1e-9, 0.10)
        && dt < Duration::from_secs(1);
    Ok(check(
        1,
        "staircase reproduction",
        passed,
        format!(
            "{} pulses, {} states, decreasing={}, {:.3e} S -> {:.3e} S, {:.3?}",
            st.program_pulses(),
            st.distinct_program_states(),
            st.program_side_decreasing(),
            first,
            last,
            dt
        ),
    ))
}

pub fn resolution(cfg: &SimConfig) -> Result<Check> {
    let mut cfg = cfg.clone();
    cfg.c2c_sigma = 0.0;
    cfg.step_sigma = 0.0;
    cfg.staircase_width = 10e-6;
    let (st, dt) = timed(|| run_staircase(&cfg));
    let st = st?;
    let n = st.distinct_program_states();
    Ok(check(
        2,
        "resolution scaling",
        n >= 1000 && dt < Duration::from_secs(5),
        format!("{n} distinct states at 10 us, {dt:.3?}"),
    ))
}

pub fn energy(cfg: &SimConfig) -> Result<Check> {
    let table = run_energy(cfg)?;
    let got = [
        sig3(table.row(PulseMode::Read).average_energy),
        sig3(table.row(PulseMode::Program).average_energy),
        sig3(table.row(PulseMode::Erase).average_energy),
    ];
    let want = [sig3(9.14e-15), sig3(139e-9), sig3(1.6e-12)];
    Ok(check(
        3,
        "energy table",
        got == want,
        format!("read/program/erase J = {got:?}, expected {want:?}"),
    ))
}

pub fn endurance(cfg: &SimConfig) -> Result<Check> {
    let mut cfg = cfg.clone();
    cfg.endurance_cycles = 250;
    cfg.endurance_width = 200e-6;
    let (e, dt) = timed(|| run_endurance(&cfg));
    let e = e?;
    let (lcs_lo, lcs_hi) = e.lcs_range();
    let (hcs_lo, hcs_hi) = e.hcs_range();
    let slack = 1.0 + 1e-9;
    let passed = e.max_t_program() <= 8.6e-3 * slack
        && e.max_t_erase() <= 11.2e-3 * slack
        && e.program_non_decreasing()
        && e.erase_non_decreasing()
        && within(lcs_lo, 0.77e-9, 0.99e-9)
        && within(lcs_hi, 0.77e-9, 0.99e-9)
        && within(hcs_lo, 1.0e-6, 1.13e-6)
        && within(hcs_hi, 1.0e-6, 1.13e-6)
        && dt < Duration::from_secs(30);
    Ok(check(
        4,
        "endurance",
        passed,
        format!(
            "max t_program {:.2} ms, max t_erase {:.2} ms, monotone {}/{}, LCS [{:.3e}, {:.3e}] S, HCS [{:.3e}, {:.3e}] S, {:.3?}",
            e.max_t_program() * 1e3,
            e.max_t_erase() * 1e3,
            e.program_non_decreasing(),
            e.erase_non_decreasing(),
            lcs_lo,
            lcs_hi,
            hcs_lo,
            hcs_hi,
            dt
        ),
    ))
}

pub fn d2d(cfg: &SimConfig) -> Result<Check> {
    let t0 = Instant::now();
    let verdicts = (0..META_SEEDS)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(i);
            c.n_devices = 100;
            let d = run_d2d(&c)?;
            let (lm, _) = d.lcs_stats();
            let (hm, _) = d.hcs_stats();
            Ok(within(lm, 0.905e-9, 0.935e-9) && within(hm, 1.031e-6, 1.049e-6))
        })
        .collect::<Result<Vec<bool>>>()?;
    let dt = t0.elapsed();
    let ok = verdicts.iter().filter(|&&v| v).count();
    Ok(check(
        5,
        "D2D statistics",
        ok >= 95 && dt < Duration::from_secs(60),
        format!("{ok}/{META_SEEDS} meta-seeds inside 3 SE of both means, {dt:.3?}"),
    ))
}

pub fn xor_learning(cfg: &SimConfig) -> Result<Check> {
    let runs = (0..META_SEEDS)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(i);
            c.xor_samples = 5000;
            let (r, dt) = timed(|| run_train(&c));
            Ok((r?.accuracy == 1.0, dt))
        })
        .collect::<Result<Vec<_>>>()?;
    let ok = runs.iter().filter(|r| r.0).count();
    let slowest = runs.iter().map(|r| r.1).max().unwrap_or_default();
    Ok(check(
        6,
        "XOR learning",
        ok >= 95 && slowest < Duration::from_secs(10),
        format!("{ok}/{META_SEEDS} seeds at 100% accuracy, slowest {slowest:.3?}"),
    ))
}

pub fn write_reduction(cfg: &SimConfig) -> Result<Check> {
    let map = run_xor_map(cfg)?;
    let mut degenerate = cfg.clone();
    degenerate.dc_threshold = 1;
    let one = run_xor_map(&degenerate)?;
    let reduced = cfg.dc_threshold == 15 && map.run.pulse_count * 10 <= map.run.transitions;
    let exact = one.run.pulse_count == one.run.transitions;
    let tracked = map.tracked_pulses();
    let band = map.tracked.len() == 8 && (10..=40).contains(&tracked);
    Ok(check(
        7,
        "write-traffic reduction",
        reduced && exact && band,
        format!(
            "{} pulses / {} transitions at threshold 15; threshold 1: {} pulses / {} transitions; {} pulses on {} tracked TAs",
            map.run.pulse_count,
            map.run.transitions,
            one.run.pulse_count,
            one.run.transitions,
            tracked,
            map.tracked.len()
        ),
    ))
}

pub fn decision_agreement(cfg: &SimConfig) -> Result<Check> {
    let verdicts = (0..META_SEEDS)
        .into_par_iter()
        .map(|i| {
            let mut c = cfg.clone();
            c.seed = cfg.seed.wrapping_add(i);
            let m = run_xor_map(&c)?;
            Ok((m.agreement.all_agree(), m.agreement.checked))
        })
        .collect::<Result<Vec<_>>>()?;
    let ok = verdicts.iter().filter(|v| v.0).count();
    let judged: usize = verdicts.iter().map(|v| v.1).sum();
    Ok(check(
        8,
        "oracle decision agreement",
        ok >= 90 && cfg.c2c_sigma > 0.0,
        format!("{ok}/{META_SEEDS} seeds agree on every judged TA ({judged} judged in total)"),
    ))
}

fn property(name: &str, failures: usize) -> String {
    format!("{name} {}/{PROPERTY_TRIALS}", PROPERTY_TRIALS - failures)
}

/// Randomized invariant suites, `PROPERTY_TRIALS` trials each.
pub fn properties(cfg: &SimConfig) -> Result<Check> {
    let base = cfg.device_params()?;
    let seed = cfg.seed;
    let suites: [(&str, fn(&DeviceParams, &mut ChaCha8Rng) -> Result<bool>); 7] = [
        ("ta_bounds", trial_ta_bounds),
        ("dc_reset", trial_dc_reset),
        ("pulse_direction", trial_pulse_direction),
        ("q_bounds", trial_q_bounds),
        ("read_isolation", trial_read_isolation),
        ("ledger_conservation", trial_ledger_conservation),
        ("sneak_bound", trial_sneak_bound),
    ];
    let mut parts = Vec::new();
    let mut all = true;
    for (k, (name, trial)) in suites.iter().enumerate() {
        let failures = (0..PROPERTY_TRIALS)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((k * PROPERTY_TRIALS + t) as u64);
                trial(&base, &mut rng).map(|ok| usize::from(!ok))
            })
            .sum::<Result<usize>>()?;
        all &= failures == 0;
        parts.push(property(name, failures));
    }
    Ok(check(9, "property suites", all, parts.join(", ")))
}

fn trial_ta_bounds(_: &DeviceParams, rng: &mut ChaCha8Rng) -> Result<bool> {
    let n = rng.random_range(1..=200);
    let mut ta = TsetlinAutomaton::with_state(rng.random_range(1..=2 * n), n)?;
    for _ in 0..400 {
        let fb = if rng.random() { Feedback::Reward } else { Feedback::Penalty };
        let old = ta.state();
        ta.apply(fb);
        if !(1..=2 * n).contains(&ta.state()) || ta.state().abs_diff(old) > 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn random_delta(rng: &mut ChaCha8Rng, bias: f64) -> i32 {
    let x: f64 = rng.random();
    if x < bias {
        1
    } else if x < 0.5 + bias / 2.0 {
        -1
    } else {
        0
    }
}

fn trial_dc_reset(_: &DeviceParams, rng: &mut ChaCha8Rng) -> Result<bool> {
    let threshold = rng.random_range(1..=30u32);
    let bias = rng.random_range(0.1..0.6);
    let mut dc = DivergenceCounter::new(threshold)?;
    for _ in 0..300 {
        let fired = dc.accumulate(random_delta(rng, bias))?;
        if fired.is_some() && dc.value() != 0 {
            return Ok(false);
        }
        if dc.value().unsigned_abs() >= threshold {
            return Ok(false);
        }
    }
    Ok(true)
}

fn trial_pulse_direction(base: &DeviceParams, rng: &mut ChaCha8Rng) -> Result<bool> {
    let threshold = rng.random_range(1..=20u32);
    let bias = rng.random_range(0.1..0.6);
    let cell = YFlashCell::with_state(base.clone(), rng.random(), rng.random())?;
    let mut m = MappedAutomaton::new(0, cell, threshold, rng.random_range(10e-6..1e-3))?;
    let t = threshold as i32;
    for i in 0..200 {
        m.update(random_delta(rng, bias), i)?;
    }
    Ok(m.pulse_log().iter().all(|p| match p.pulse.mode {
        PulseMode::Erase => p.trigger >= t,
        PulseMode::Program => p.trigger <= -t,
        PulseMode::Read => false,
    }) && m.read_count() == 0)
}

fn trial_q_bounds(base: &DeviceParams, rng: &mut ChaCha8Rng) -> Result<bool> {
    let mut params = base.clone();
    params.step_sigma = rng.random_range(0.0..0.3);
    params.c2c_sigma = rng.random_range(0.0..0.1);
    params.program_degradation_rate = rng.random_range(0.0..0.01);
    let mut cell = YFlashCell::with_state(params, rng.random(), rng.random())?;
    for _ in 0..100 {
        let width = rng.random_range(1e-6..2e-3);
        if rng.random() {
            cell.program_pulse(width)?;
        } else {
            cell.erase_pulse(width)?;
        }
        if !(0.0..=1.0).contains(&cell.q()) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn trial_read_isolation(base: &DeviceParams, rng: &mut ChaCha8Rng) -> Result<bool> {
    let cell = YFlashCell::with_state(base.clone(), rng.random(), rng.random())?;
    let before = (cell.q().to_bits(), cell.conductance().to_bits());
    let v = rng.random_range(-base.write_threshold..=base.write_threshold);
    let i = cell.read(v)?;
    let after = (cell.q().to_bits(), cell.conductance().to_bits());
    let leak_ok = v >= 0.0 || i.abs() <= base.reverse_leak_ceiling;
    Ok(before == after && leak_ok)
}

fn trial_ledger_conservation(base: &DeviceParams, rng: &mut ChaCha8Rng) -> Result<bool> {
    let rows = rng.random_range(1..=4);
    let cols = rng.random_range(1..=4);
    let mut arr = CrossbarArray::new(rows, cols, base.clone(), rng.random())?;
    for _ in 0..40 {
        let (r, c) = (rng.random_range(0..rows), rng.random_range(0..cols));
        match rng.random_range(0..3) {
            0 => {
                arr.read(r, c, base.v_read)?;
            }
            1 => {
                arr.program(r, c, rng.random_range(10e-6..1e-3))?;
            }
            _ => {
                arr.erase(r, c, rng.random_range(10e-6..1e-3))?;
            }
        }
    }
    let ledger = *arr.ledger();
    for mode in PulseMode::ALL {
        let mut count = 0;
        let mut energy = 0.0;
        for r in 0..rows {
            for c in 0..cols {
                for p in arr.pulse_log(r, c)?.iter().filter(|p| p.mode == mode) {
                    count += 1;
                    energy += p.energy;
                }
            }
        }
        let e = ledger.energy(mode);
        if count != ledger.count(mode) || (e - energy).abs() > 1e-12 * e.abs().max(1e-30) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn trial_sneak_bound(base: &DeviceParams, rng: &mut ChaCha8Rng) -> Result<bool> {
    let rows = rng.random_range(1..=8);
    let cols = rng.random_range(1..=8);
    let mut arr = CrossbarArray::new(rows, cols, base.clone(), rng.random())?;
    for r in 0..rows {
        for c in 0..cols {
            arr.set_state(r, c, rng.random())?;
        }
    }
    let before: Vec<u64> = arr.cells().iter().map(|c| c.q().to_bits()).collect();
    let read = arr.read(rng.random_range(0..rows), rng.random_range(0..cols), base.v_read)?;
    let after: Vec<u64> = arr.cells().iter().map(|c| c.q().to_bits()).collect();
    let bound = (rows * cols - 1) as f64 * base.reverse_leak_ceiling;
    Ok(read.i_sneak_total <= bound * (1.0 + 1e-12) && before == after)
}

pub fn run_all(cfg: &SimConfig) -> Result<Vec<Check>> {
    Ok(vec![
        staircase(cfg)?,
        resolution(cfg)?,
        energy(cfg)?,
        endurance(cfg)?,
        d2d(cfg)?,
        xor_learning(cfg)?,
        write_reduction(cfg)?,
        decision_agreement(cfg)?,
        properties(cfg)?,
    ])
}
