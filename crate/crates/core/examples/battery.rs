//! Runs the full verification battery at default sizes and prints one
//! summary line per check.
//!
//! cargo run --release -p octnorm-core --example battery

use octnorm_core::space::TowerSpace;
use octnorm_core::verify::{verify_all, VerifyOptions};

fn main() {
    let space = TowerSpace::with_defaults(3, 48, 0x0c7a_4ed1).unwrap();
    let reports = verify_all(&space, &VerifyOptions::default()).unwrap();
    let mut all_passed = true;
    for r in &reports {
        all_passed &= r.passed;
        println!(
            "{:<12} samples={:<5} violations={:<3} worst={:+.3e} runtime={}ms {}",
            r.check_name,
            r.samples,
            r.violations,
            r.worst_violation,
            r.runtime_ms,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    std::process::exit(if all_passed { 0 } else { 1 });
}
