//! Acceptance suite: runs every criterion against the default configuration
//! and prints one pass/fail line each. Exits nonzero if any criterion fails.

use std::process::ExitCode;

use yflash_tm::harness::{verify, SimConfig};

type CheckFn = fn(&SimConfig) -> yflash_tm::Result<verify::Check>;

fn main() -> ExitCode {
    let cfg = SimConfig::default();
    let checks: [(&str, CheckFn); 9] = [
        ("staircase reproduction", verify::staircase),
        ("resolution scaling", verify::resolution),
        ("energy table", verify::energy),
        ("endurance", verify::endurance),
        ("D2D statistics", verify::d2d),
        ("XOR learning", verify::xor_learning),
        ("write-traffic reduction", verify::write_reduction),
        ("oracle decision agreement", verify::decision_agreement),
        ("property suites", verify::properties),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check(&cfg) {
            Ok(c) => {
                println!("{c}");
                failed += usize::from(!c.passed);
            }
            Err(e) => {
                println!("[FAIL] {name}: error: {e}");
                failed += 1;
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
