//! Flat key-value experiment configuration.
//!
//! Files are flat TOML: one `key = value` per line, `#` comments, no tables.
//! Every key is optional and unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automata::TmConfig;
use crate::bridge::BridgeConfig;
use crate::device::{DeviceParams, PopulationParams, PowerTable, StepCalibration};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,

    // device
    pub g_hcs: f64,
    pub g_lcs: f64,
    pub v_read: f64,
    pub v_program: f64,
    pub v_erase: f64,
    pub write_threshold: f64,
    pub read_pulse_width: f64,
    pub c2c_sigma: f64,
    pub step_sigma: f64,
    pub noise_clip: f64,
    pub program_degradation_rate: f64,
    pub erase_degradation_rate: f64,
    pub reverse_leak_ceiling: f64,
    pub power_read: f64,
    pub power_program: f64,
    pub power_erase: f64,
    pub program_anchor_widths: Vec<f64>,
    pub program_anchor_steps: Vec<f64>,
    pub erase_anchor_widths: Vec<f64>,
    pub erase_anchor_steps: Vec<f64>,

    // device population
    pub lcs_mean: f64,
    pub lcs_sigma: f64,
    pub hcs_mean: f64,
    pub hcs_sigma: f64,
    pub n_devices: usize,
    pub d2d_width: f64,

    // staircase
    pub staircase_width: f64,
    pub staircase_pulse_cap: usize,

    // endurance
    pub endurance_cycles: usize,
    pub endurance_width: f64,
    pub endurance_g_lcs: f64,
    pub endurance_g_hcs: f64,
    pub endurance_pulse_cap: usize,

    // tsetlin machine
    pub tm_clauses: usize,
    pub tm_threshold: u32,
    pub tm_specificity: f64,
    pub tm_n_half: u32,
    pub xor_samples: usize,

    // bridge
    pub dc_threshold: u32,
    pub bridge_pulse_width: f64,
    pub tracked_automata: usize,

    // energy table
    pub energy_read_width: f64,
    pub energy_program_width: f64,
    pub energy_erase_width: f64,
    pub energy_read_states: usize,
    pub energy_program_states: usize,
    pub energy_erase_states: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        let d = DeviceParams::default();
        let pop = PopulationParams::default();
        let tm = TmConfig::default();
        let bridge = BridgeConfig::default();
        let (pw, ps): (Vec<_>, Vec<_>) = d.program_steps.anchors().iter().copied().unzip();
        let (ew, es): (Vec<_>, Vec<_>) = d.erase_steps.anchors().iter().copied().unzip();
        Self {
            seed: 1,
            g_hcs: d.g_hcs,
            g_lcs: d.g_lcs,
            v_read: d.v_read,
            v_program: d.v_program,
            v_erase: d.v_erase,
            write_threshold: d.write_threshold,
            read_pulse_width: d.read_pulse_width,
            c2c_sigma: d.c2c_sigma,
            step_sigma: d.step_sigma,
            noise_clip: d.noise_clip,
            program_degradation_rate: d.program_degradation_rate,
            erase_degradation_rate: d.erase_degradation_rate,
            reverse_leak_ceiling: d.reverse_leak_ceiling,
            power_read: d.power.read,
            power_program: d.power.program,
            power_erase: d.power.erase,
            program_anchor_widths: pw,
            program_anchor_steps: ps,
            erase_anchor_widths: ew,
            erase_anchor_steps: es,
            lcs_mean: pop.lcs_mean,
            lcs_sigma: pop.lcs_sigma,
            hcs_mean: pop.hcs_mean,
            hcs_sigma: pop.hcs_sigma,
            n_devices: 100,
            d2d_width: 200e-6,
            staircase_width: 200e-6,
            staircase_pulse_cap: 100_000,
            endurance_cycles: 250,
            endurance_width: 200e-6,
            endurance_g_lcs: 0.85e-9,
            endurance_g_hcs: 1.04e-6,
            endurance_pulse_cap: 200,
            tm_clauses: tm.clauses,
            tm_threshold: tm.threshold,
            tm_specificity: tm.specificity,
            tm_n_half: tm.n_half,
            xor_samples: 5000,
            dc_threshold: bridge.dc_threshold,
            bridge_pulse_width: bridge.pulse_width,
            tracked_automata: 8,
            energy_read_width: 5e-9,
            energy_program_width: 200e-6,
            energy_erase_width: 200e-6,
            energy_read_states: 40,
            energy_program_states: 40,
            energy_erase_states: 32,
        }
    }
}

fn anchors(widths: &[f64], steps: &[f64], name: &'static str) -> Result<StepCalibration> {
    if widths.len() != steps.len() {
        return Err(Error::invalid(name, "anchor widths and steps differ in length"));
    }
    StepCalibration::new(widths.iter().copied().zip(steps.iter().copied()).collect())
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.device_params()?;
        self.endurance_device_params()?;
        self.population()?.validate()?;
        self.bridge_config()?;
        if self.tm_clauses == 0 || self.tm_clauses % 2 != 0 {
            return Err(Error::invalid("tm_clauses", "must be a positive even number"));
        }
        for (name, n) in [
            ("n_devices", self.n_devices),
            ("endurance_cycles", self.endurance_cycles),
            ("xor_samples", self.xor_samples),
            ("staircase_pulse_cap", self.staircase_pulse_cap),
            ("endurance_pulse_cap", self.endurance_pulse_cap),
        ] {
            if n == 0 {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        for (name, w) in [
            ("d2d_width", self.d2d_width),
            ("staircase_width", self.staircase_width),
            ("endurance_width", self.endurance_width),
            ("energy_read_width", self.energy_read_width),
            ("energy_program_width", self.energy_program_width),
            ("energy_erase_width", self.energy_erase_width),
        ] {
            if !(w > 0.0) {
                return Err(Error::invalid(name, "must be positive"));
            }
        }
        Ok(())
    }

    pub fn device_params(&self) -> Result<DeviceParams> {
        let p = DeviceParams {
            g_hcs: self.g_hcs,
            g_lcs: self.g_lcs,
            program_steps: anchors(
                &self.program_anchor_widths,
                &self.program_anchor_steps,
                "program_anchor_widths",
            )?,
            erase_steps: anchors(
                &self.erase_anchor_widths,
                &self.erase_anchor_steps,
                "erase_anchor_widths",
            )?,
            v_read: self.v_read,
            v_program: self.v_program,
            v_erase: self.v_erase,
            write_threshold: self.write_threshold,
            read_pulse_width: self.read_pulse_width,
            c2c_sigma: self.c2c_sigma,
            step_sigma: self.step_sigma,
            noise_clip: self.noise_clip,
            program_degradation_rate: self.program_degradation_rate,
            erase_degradation_rate: self.erase_degradation_rate,
            reverse_leak_ceiling: self.reverse_leak_ceiling,
            power: PowerTable {
                read: self.power_read,
                program: self.power_program,
                erase: self.power_erase,
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn endurance_device_params(&self) -> Result<DeviceParams> {
        let mut p = self.device_params()?;
        p.g_lcs = self.endurance_g_lcs;
        p.g_hcs = self.endurance_g_hcs;
        p.validate()?;
        Ok(p)
    }

    pub fn population(&self) -> Result<PopulationParams> {
        let pop = PopulationParams {
            lcs_mean: self.lcs_mean,
            lcs_sigma: self.lcs_sigma,
            hcs_mean: self.hcs_mean,
            hcs_sigma: self.hcs_sigma,
        };
        pop.validate()?;
        Ok(pop)
    }

    pub fn tm_config(&self) -> TmConfig {
        TmConfig {
            n_features: 2,
            clauses: self.tm_clauses,
            threshold: self.tm_threshold,
            specificity: self.tm_specificity,
            n_half: self.tm_n_half,
        }
    }

    pub fn bridge_config(&self) -> Result<BridgeConfig> {
        if self.dc_threshold == 0 {
            return Err(Error::invalid("dc_threshold", "must be positive"));
        }
        if !(self.bridge_pulse_width > 0.0) {
            return Err(Error::invalid("bridge_pulse_width", "must be positive"));
        }
        Ok(BridgeConfig {
            dc_threshold: self.dc_threshold,
            pulse_width: self.bridge_pulse_width,
            device: self.device_params()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = SimConfig::default();
        let text = cfg.to_toml();
        assert_eq!(SimConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(cfg.device_params().unwrap(), DeviceParams::default());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = SimConfig::from_toml("# quiet device\nc2c_sigma = 0.0\ndc_threshold = 1\n").unwrap();
        assert_eq!(cfg.c2c_sigma, 0.0);
        assert_eq!(cfg.dc_threshold, 1);
        assert_eq!(cfg.g_hcs, 2.5e-6);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = SimConfig::from_toml("g_hsc = 1e-6\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(SimConfig::from_toml("g_lcs = 5e-6\n").is_err());
        assert!(SimConfig::from_toml("tm_clauses = 3\n").is_err());
        assert!(SimConfig::from_toml("program_anchor_steps = [40.0]\n").is_err());
    }
}
