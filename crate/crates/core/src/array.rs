//! Selector-free crossbar of Y-Flash cells and the energy ledger.
//!
//! Bias scheme for a read of `(r, c)`: row `r` is driven at the read voltage,
//! column `c` senses at virtual ground, every other line is held at 0 V.
//! Cells on row `r` conduct into their own grounded columns and cells on
//! column `c` see no bias, so the only paths into the sense line run through
//! a cell `(r', c')` with `r' != r`, `c' != c` that is reverse biased. Each
//! such path is bounded by that cell's reverse leakage at the read voltage.

use std::fmt;
use std::io::{Read, Write};

use crate::device::{DeviceParams, PowerTable, PulseMode, PulseResult, YFlashCell};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub n_reads: usize,
    pub n_programs: usize,
    pub n_erases: usize,
    pub e_read: f64,
    pub e_program: f64,
    pub e_erase: f64,
}

impl EnergyLedger {
    pub fn record(&mut self, pulse: &PulseResult) {
        match pulse.mode {
            PulseMode::Read => {
                self.n_reads += 1;
                self.e_read += pulse.energy;
            }
            PulseMode::Program => {
                self.n_programs += 1;
                self.e_program += pulse.energy;
            }
            PulseMode::Erase => {
                self.n_erases += 1;
                self.e_erase += pulse.energy;
            }
        }
    }

    pub fn count(&self, mode: PulseMode) -> usize {
        match mode {
            PulseMode::Read => self.n_reads,
            PulseMode::Program => self.n_programs,
            PulseMode::Erase => self.n_erases,
        }
    }

    pub fn energy(&self, mode: PulseMode) -> f64 {
        match mode {
            PulseMode::Read => self.e_read,
            PulseMode::Program => self.e_program,
            PulseMode::Erase => self.e_erase,
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.e_read + self.e_program + self.e_erase
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub mode: PulseMode,
    pub pulses: usize,
    pub average_power: f64,
    pub total_energy: f64,
    /// Zero when no pulses were issued.
    pub energy_per_pulse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerReport {
    pub rows: Vec<LedgerRow>,
}

impl fmt::Display for LedgerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:>8} {:>14} {:>14} {:>14}",
            "mode", "pulses", "avg_power_W", "total_J", "per_pulse_J"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<8} {:>8} {:>14.3e} {:>14.3e} {:>14.3e}",
                r.mode.as_str(),
                r.pulses,
                r.average_power,
                r.total_energy,
                r.energy_per_pulse
            )?;
        }
        Ok(())
    }
}

pub fn ledger_report(ledger: &EnergyLedger, power: &PowerTable) -> LedgerReport {
    let rows = PulseMode::ALL
        .iter()
        .map(|&mode| {
            let pulses = ledger.count(mode);
            let total_energy = ledger.energy(mode);
            LedgerRow {
                mode,
                pulses,
                average_power: if pulses == 0 { 0.0 } else { power.power(mode) },
                total_energy,
                energy_per_pulse: if pulses == 0 {
                    0.0
                } else {
                    total_energy / pulses as f64
                },
            }
        })
        .collect();
    LedgerReport { rows }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayRead {
    pub i_selected: f64,
    pub i_sneak_total: f64,
}

impl ArrayRead {
    /// Selected current over total sneak current; infinite with no sneak.
    pub fn sneak_margin(&self) -> f64 {
        if self.i_sneak_total == 0.0 {
            f64::INFINITY
        } else {
            self.i_selected / self.i_sneak_total
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrossbarArray {
    rows: usize,
    cols: usize,
    cells: Vec<YFlashCell>,
    logs: Vec<Vec<PulseResult>>,
    ledger: EnergyLedger,
}

impl CrossbarArray {
    /// All cells start erased; cell `i` (row-major) is seeded from `seed + i`.
    pub fn new(rows: usize, cols: usize, params: DeviceParams, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("array", "rows and cols must be positive"));
        }
        let cells = (0..rows * cols)
            .map(|i| YFlashCell::new(params.clone(), seed.wrapping_add(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows,
            cols,
            logs: vec![Vec::new(); cells.len()],
            cells,
            ledger: EnergyLedger::default(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn index(&self, row: usize, col: usize) -> Result<usize> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::OutOfBounds {
                row,
                col,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(row * self.cols + col)
    }

    pub fn cell(&self, row: usize, col: usize) -> Result<&YFlashCell> {
        Ok(&self.cells[self.index(row, col)?])
    }

    pub fn cells(&self) -> &[YFlashCell] {
        &self.cells
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn pulse_log(&self, row: usize, col: usize) -> Result<&[PulseResult]> {
        Ok(&self.logs[self.index(row, col)?])
    }

    pub fn set_state(&mut self, row: usize, col: usize, q: f64) -> Result<()> {
        let i = self.index(row, col)?;
        self.cells[i].set_state(q)
    }

    pub fn read(&mut self, row: usize, col: usize, v_read: f64) -> Result<ArrayRead> {
        let target = self.index(row, col)?;
        let i_selected = self.cells[target].read(v_read)?;
        let mut i_sneak_total = 0.0;
        for r in (0..self.rows).filter(|&r| r != row) {
            for c in (0..self.cols).filter(|&c| c != col) {
                i_sneak_total += self.cells[r * self.cols + c].read(-v_read)?.abs();
            }
        }
        let pulse = self.cells[target].read_pulse();
        self.ledger.record(&pulse);
        self.logs[target].push(pulse);
        Ok(ArrayRead {
            i_selected,
            i_sneak_total,
        })
    }

    pub fn program(&mut self, row: usize, col: usize, width: f64) -> Result<PulseResult> {
        self.write(row, col, PulseMode::Program, width)
    }

    pub fn erase(&mut self, row: usize, col: usize, width: f64) -> Result<PulseResult> {
        self.write(row, col, PulseMode::Erase, width)
    }

    fn write(&mut self, row: usize, col: usize, mode: PulseMode, width: f64) -> Result<PulseResult> {
        let i = self.index(row, col)?;
        let pulse = match mode {
            PulseMode::Program => self.cells[i].program_pulse(width)?,
            PulseMode::Erase => self.cells[i].erase_pulse(width)?,
            PulseMode::Read => return Err(Error::invalid("mode", "read is not a write pulse")),
        };
        self.ledger.record(&pulse);
        self.logs[i].push(pulse);
        Ok(pulse)
    }

    /// CSV snapshot with header `row,col,q,g_at_2V`.
    pub fn export_snapshot<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "q", "g_at_2V"])?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let cell = &self.cells[r * self.cols + c];
                w.write_record([
                    r.to_string(),
                    c.to_string(),
                    format!("{:.17e}", cell.q()),
                    format!("{:.6e}", cell.read(2.0)? / 2.0),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<snapshot>", e))?;
        Ok(())
    }

    /// Restores cell states from a snapshot of the same shape. The
    /// conductance column is informational and not re-applied.
    pub fn import_snapshot<R: Read>(&mut self, input: R) -> Result<()> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["row", "col", "q", "g_at_2V"] {
            return Err(Error::Snapshot(format!("unexpected header {header:?}")));
        }
        let mut seen = vec![false; self.cells.len()];
        let mut states = vec![0.0; self.cells.len()];
        for rec in rdr.records() {
            let rec = rec?;
            let parse_err = |what: &str| Error::Snapshot(format!("bad {what} in {rec:?}"));
            let row: usize = rec[0].parse().map_err(|_| parse_err("row"))?;
            let col: usize = rec[1].parse().map_err(|_| parse_err("col"))?;
            let q: f64 = rec[2].parse().map_err(|_| parse_err("q"))?;
            let i = self.index(row, col)?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Snapshot(format!("duplicate cell ({row}, {col})")));
            }
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Snapshot(format!("q = {q} outside [0, 1]")));
            }
            states[i] = q;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Snapshot("snapshot does not cover every cell".into()));
        }
        for (cell, q) in self.cells.iter_mut().zip(states) {
            cell.set_state(q)?;
        }
        Ok(())
    }
}
