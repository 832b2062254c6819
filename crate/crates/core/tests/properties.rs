use proptest::prelude::*;

use yflash_tm::array::CrossbarArray;
use yflash_tm::automata::{Action, Feedback, TsetlinAutomaton};
use yflash_tm::bridge::DivergenceCounter;
use yflash_tm::device::{DeviceParams, PowerTable, PulseMode, YFlashCell};

const N_HALF: u32 = 150;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(10_000)
}

fn feedback() -> impl Strategy<Value = Feedback> {
    prop_oneof![Just(Feedback::Reward), Just(Feedback::Penalty)]
}

fn write_mode() -> impl Strategy<Value = PulseMode> {
    prop_oneof![Just(PulseMode::Program), Just(PulseMode::Erase)]
}

fn width() -> impl Strategy<Value = f64> {
    (-5.0f64..-2.5).prop_map(|e| 10f64.powf(e))
}

fn pulse(cell: &mut YFlashCell, mode: PulseMode, w: f64) {
    match mode {
        PulseMode::Program => cell.program_pulse(w).unwrap(),
        _ => cell.erase_pulse(w).unwrap(),
    };
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn automaton_stays_in_range(
        start in 1..=2 * N_HALF,
        seq in prop::collection::vec(feedback(), 0..400),
    ) {
        let mut ta = TsetlinAutomaton::with_state(start, N_HALF).unwrap();
        for fb in seq {
            let before = ta.state();
            let d = ta.apply(fb);
            prop_assert!((1..=2 * N_HALF).contains(&ta.state()));
            prop_assert!(d.abs() <= 1);
            prop_assert_eq!(ta.state() as i32 - before as i32, d);
            let include = ta.state() > N_HALF;
            prop_assert_eq!(ta.action() == Action::Include, include);
        }
    }

    #[test]
    fn counter_resets_after_firing(
        thr in 1u32..40,
        deltas in prop::collection::vec(prop_oneof![Just(-1i32), Just(0), Just(1)], 0..300),
    ) {
        let mut dc = DivergenceCounter::new(thr).unwrap();
        for d in deltas {
            let before = dc.value();
            match dc.accumulate(d).unwrap() {
                Some(mode) => {
                    prop_assert_eq!(dc.value(), 0);
                    let expected = if before + d > 0 { PulseMode::Erase } else { PulseMode::Program };
                    prop_assert_eq!(mode, expected);
                }
                None => prop_assert!(dc.value().unsigned_abs() < thr),
            }
        }
    }

    #[test]
    fn pulses_move_state_one_way(
        seed in any::<u64>(),
        q in 0.0f64..=1.0,
        mode in write_mode(),
        w in width(),
    ) {
        let mut cell = YFlashCell::with_state(DeviceParams::default(), q, seed).unwrap();
        let g0 = cell.conductance();
        pulse(&mut cell, mode, w);
        match mode {
            PulseMode::Program => prop_assert!(cell.q() <= q),
            _ => prop_assert!(cell.q() >= q),
        }
        // Landing jitter may move a rail value, but never past the nominal
        // endpoint band.
        let tol = cell.params().c2c_tolerance();
        match mode {
            PulseMode::Program => prop_assert!(cell.conductance() <= g0 * (1.0 + tol)),
            _ => prop_assert!(cell.conductance() >= g0 * (1.0 - tol)),
        }
    }

    #[test]
    fn state_stays_in_unit_interval(
        seed in any::<u64>(),
        seq in prop::collection::vec((write_mode(), width()), 0..60),
    ) {
        let mut cell = YFlashCell::new(DeviceParams::default(), seed).unwrap();
        for (mode, w) in seq {
            pulse(&mut cell, mode, w);
            prop_assert!((0.0..=1.0).contains(&cell.q()));
        }
    }

    #[test]
    fn reads_do_not_disturb(seed in any::<u64>(), q in 0.0f64..=1.0, v in -4.0f64..=4.0) {
        let cell = YFlashCell::with_state(DeviceParams::default(), q, seed).unwrap();
        let before = cell.q().to_bits();
        let i = cell.read(v).unwrap();
        prop_assert_eq!(cell.q().to_bits(), before);
        prop_assert!(i.is_finite());
        if v > 0.0 {
            prop_assert!(i > 0.0);
        }
    }

    #[test]
    fn energy_is_linear_in_width(mode in write_mode(), w in width(), k in 1.0f64..100.0) {
        let p = PowerTable::default();
        let e1 = p.energy(mode, w).unwrap();
        let ek = p.energy(mode, k * w).unwrap();
        prop_assert!((ek - k * e1).abs() <= 1e-12 * ek);
    }

    #[test]
    fn program_staircase_is_monotone(q in 0.0f64..=1.0, w in width(), n in 1usize..50) {
        let params = DeviceParams::default().noise_free();
        let mut cell = YFlashCell::with_state(params, q, 0).unwrap();
        let mut g = cell.conductance();
        for _ in 0..n {
            cell.program_pulse(w).unwrap();
            prop_assert!(cell.conductance() <= g);
            g = cell.conductance();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn ledger_matches_pulses(
        seed in any::<u64>(),
        ops in prop::collection::vec((0usize..3, 0usize..4, 0usize..4, width()), 0..40),
    ) {
        let mut arr = CrossbarArray::new(4, 4, DeviceParams::default(), seed).unwrap();
        let mut expected = 0.0;
        let mut counts = [0usize; 3];
        for (op, r, c, w) in ops {
            let e = match op {
                0 => {
                    arr.read(r, c, 2.0).unwrap();
                    arr.cell(r, c).unwrap().read_pulse().energy
                }
                1 => arr.program(r, c, w).unwrap().energy,
                _ => arr.erase(r, c, w).unwrap().energy,
            };
            expected += e;
            counts[op] += 1;
        }
        let l = arr.ledger();
        prop_assert_eq!(l.count(PulseMode::Read), counts[0]);
        prop_assert_eq!(l.count(PulseMode::Program), counts[1]);
        prop_assert_eq!(l.count(PulseMode::Erase), counts[2]);
        prop_assert!((l.total_energy() - expected).abs() <= 1e-12 * expected.max(1e-30));
    }

    #[test]
    fn sneak_current_is_bounded(
        seed in any::<u64>(),
        rows in 1usize..9,
        cols in 1usize..9,
        states in prop::collection::vec(0.0f64..=1.0, 64),
    ) {
        let params = DeviceParams::default();
        let ceiling = params.reverse_leak_ceiling;
        let mut arr = CrossbarArray::new(rows, cols, params, seed).unwrap();
        for r in 0..rows {
            for c in 0..cols {
                arr.set_state(r, c, states[r * 8 + c]).unwrap();
            }
        }
        let before: Vec<u64> = arr.cells().iter().map(|c| c.q().to_bits()).collect();
        let read = arr.read(rows / 2, cols / 2, 2.0).unwrap();
        let after: Vec<u64> = arr.cells().iter().map(|c| c.q().to_bits()).collect();
        prop_assert_eq!(before, after);
        prop_assert!(read.i_sneak_total >= 0.0);
        prop_assert!(read.i_sneak_total <= (rows * cols - 1) as f64 * ceiling * (1.0 + 1e-12));
    }
}
