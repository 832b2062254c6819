use std::fs;
use std::path::Path;
use std::process::Command;

use yflash_tm::harness::experiments::run_staircase;
use yflash_tm::harness::{run_experiment, Experiment, SimConfig};
use yflash_tm::Error;

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn every_experiment_writes_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimConfig::default();
    let headers = [
        (Experiment::Staircase, "pulse_index,mode,g_S,i_read_A"),
        (Experiment::Endurance, "cycle,lcs_S,hcs_S,t_program_s,t_erase_s"),
        (Experiment::D2d, "device_id,lcs_S,hcs_S"),
        (
            Experiment::XorMap,
            "sample_index,ta_index,ta_state,dc_value,pulse_issued,g_S",
        ),
        (
            Experiment::Energy,
            "mode,voltage_V,states,width_s,average_power_W,average_energy_J,total_energy_J",
        ),
        (Experiment::Train, "sample_index,ta_index,old_state,new_state"),
    ];
    for (exp, header) in headers {
        let out = dir.path().join(exp.as_str());
        let summary = run_experiment(exp, &cfg, &out).unwrap();
        assert!(!summary.is_empty());
        assert_eq!(
            first_line(&out.join("config.toml")),
            format!("# experiment = {}", exp.as_str())
        );
        let echoed = fs::read_to_string(out.join("config.toml")).unwrap();
        assert_eq!(SimConfig::from_toml(&echoed).unwrap(), cfg);
        assert_eq!(first_line(&out.join(format!("{}.csv", exp.as_str()))), header);
        assert_eq!(fs::read_to_string(out.join("summary.txt")).unwrap(), summary);
    }
    assert_eq!(
        first_line(&dir.path().join("xor-map/pulses.csv")),
        "sample_index,ta_index,mode,width_s,energy_J,g_before_S,g_after_S"
    );
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimConfig {
        seed: 42,
        ..SimConfig::default()
    };
    for exp in [Experiment::XorMap, Experiment::D2d, Experiment::Endurance] {
        let a = dir.path().join(format!("{}-a", exp.as_str()));
        let b = dir.path().join(format!("{}-b", exp.as_str()));
        run_experiment(exp, &cfg, &a).unwrap();
        run_experiment(exp, &cfg, &b).unwrap();
        let name = format!("{}.csv", exp.as_str());
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
    let other = SimConfig {
        seed: 43,
        ..cfg.clone()
    };
    let c = dir.path().join("xor-map-c");
    run_experiment(Experiment::XorMap, &other, &c).unwrap();
    assert_ne!(
        fs::read(dir.path().join("xor-map-a/xor-map.csv")).unwrap(),
        fs::read(c.join("xor-map.csv")).unwrap()
    );
}

#[test]
fn fine_pulses_resolve_a_thousand_states() {
    let cfg = SimConfig {
        staircase_width: 10e-6,
        c2c_sigma: 0.0,
        ..SimConfig::default()
    };
    let s = run_staircase(&cfg).unwrap();
    assert_eq!(s.program_pulses(), 1000);
    assert!(s.distinct_program_states() >= 1000);
    assert!(s.program_side_decreasing());
}

#[test]
fn bad_config_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "seed = 3\nclause_count = 4\n").unwrap();
    assert!(matches!(SimConfig::load(&path), Err(Error::Config(_))));
    assert!(matches!(
        SimConfig::load(&dir.path().join("missing.toml")),
        Err(Error::Io { .. })
    ));
}

fn sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sim"))
}

#[test]
fn cli_prints_loadable_defaults() {
    let out = sim().arg("print-defaults").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(SimConfig::from_toml(&text).unwrap(), SimConfig::default());
}

#[test]
fn cli_runs_an_experiment_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    fs::write(&cfg_path, "# short run\nxor_samples = 500\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = sim()
        .args(["xor-map", "--seed", "9", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("accuracy"));
    let echoed = SimConfig::from_toml(&fs::read_to_string(out_dir.join("config.toml")).unwrap()).unwrap();
    assert_eq!(echoed.seed, 9);
    assert_eq!(echoed.xor_samples, 500);
    assert!(out_dir.join("pulses.csv").exists());
}

#[test]
fn cli_reports_errors_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    fs::write(&cfg_path, "tm_clauses = 3\n").unwrap();
    let out = sim()
        .args(["train", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tm_clauses"));
}
