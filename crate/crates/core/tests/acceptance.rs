//! One line per acceptance check, then a determinism comparison.

use hsc_core::selftest::run_all;

#[test]
fn acceptance() {
    let start = std::time::Instant::now();
    let report = run_all(0);
    let elapsed = start.elapsed();
    for line in report.lines() {
        println!("{line}");
    }
    for o in report.outcomes.iter().filter(|o| o.erratum.is_some() && !o.passed) {
        println!("  erratum {}/{}: {}", o.criterion, o.check, o.erratum.as_deref().unwrap_or(""));
    }
    println!("suite time {:.1}s", elapsed.as_secs_f64());

    let again = run_all(0);
    let (a, b) = (serde_json::to_string(&report).unwrap(), serde_json::to_string(&again).unwrap());
    let deterministic = a == b;
    println!(
        "{} determinism/selftest_seed_0 measured={} tol=0 byte-identical JSON reports",
        if deterministic { "PASS" } else { "FAIL" },
        if deterministic { 0 } else { 1 }
    );
    println!(
        "{} checks, {} failed, {} errata",
        report.outcomes.len() + 1,
        report.failures + usize::from(!deterministic),
        report.errata
    );
    assert!(deterministic);
    assert!(report.passed, "failing checks: {:?}", report.outcomes.iter().filter(|o| !o.counts_as_passed()).map(|o| &o.check).collect::<Vec<_>>());
}
