//! Acceptance suite: runs every numbered criterion at its stated
//! tolerance and prints one pass/fail line per criterion.

use std::time::Instant;

use thetakit::selftest::{run_all, SelftestConfig};

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    let cfg = SelftestConfig::default();
    let reports = run_all(&cfg);
    let mut all_ok = true;
    for r in &reports {
        let status = if r.passed { "pass" } else { "FAIL" };
        println!(
            "criterion {:>2} [{status}] {:<46} {:>7.2}s  {}",
            r.id, r.name, r.seconds, r.detail
        );
        all_ok &= r.passed;
    }
    let total = start.elapsed().as_secs_f64();
    // Criterion 17: the full suite completes in under ten minutes.
    println!(
        "criterion 17 [{}] end-to-end selftest runtime                  {total:>7.2}s (< 600 s)",
        if total < 600.0 { "pass" } else { "FAIL" }
    );
    assert!(all_ok, "one or more acceptance criteria failed");
    assert!(total < 600.0, "selftest exceeded the ten-minute budget");
}
