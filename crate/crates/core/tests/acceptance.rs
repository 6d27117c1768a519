//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

use std::sync::OnceLock;

use gibbs_series::claims::{run_claim, ClaimOptions, ClaimOutcome};

fn outcome(id: &str) -> ClaimOutcome {
    run_claim(id, &ClaimOptions::default()).unwrap_or_else(|e| panic!("{id} errored: {e}"))
}

/// c4 is expensive (witness windows up to 10^7 terms) and feeds two tests.
fn plateau() -> &'static ClaimOutcome {
    static C4: OnceLock<ClaimOutcome> = OnceLock::new();
    C4.get_or_init(|| outcome("c4"))
}

fn verdict(label: &str, pass: bool, detail: &str) {
    println!("[{}] {label}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn check(id: &str) {
    let o = outcome(id);
    let worst = o
        .reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} {} gap={:e} tol={:e} meta={}", r.claim, r.params, r.abs_gap, r.tolerance, r.meta))
        .next()
        .unwrap_or_default();
    verdict(
        &format!("{id} {}", o.title),
        o.pass,
        &format!("{}/{} checks pass {worst}", o.checks - o.failed, o.checks),
    );
    assert!(o.pass, "{id} failed: {worst}");
}

#[test]
fn criterion_01_geometric_closed_form() {
    check("c1");
}

#[test]
fn criterion_02_conjugate_exactness() {
    check("c2");
}

#[test]
fn criterion_03_gibbs_weights() {
    check("c3");
}

#[test]
fn criterion_04a_plateau_slope() {
    let o = plateau();
    let slopes = o.part("c4.slope");
    let worst = slopes.iter().map(|r| r.abs_gap).fold(0.0, f64::max);
    let pass = o.part_passes("c4.slope");
    verdict("c4a plateau slope -alpha", pass, &format!("max |Δf* + Δu| = {worst:e} (tol 1e-8)"));
    assert!(pass);
}

#[test]
fn criterion_04b_plateau_witness() {
    let o = plateau();
    let witnesses = o.part("c4.witness");
    let detail: Vec<String> = witnesses
        .iter()
        .map(|r| format!("u={} gap={:e}", r.params["u"], r.lhs))
        .collect();
    let pass = o.part_passes("c4.witness");
    verdict("c4b plateau witness gap <= 1e-2", pass, &detail.join(", "));
    assert!(pass, "plateau witness gaps: {}", detail.join(", "));
}

#[test]
fn criterion_05_box_degenerate_and_interior() {
    check("c5");
}

#[test]
fn criterion_06_gradient_sum() {
    check("c6");
}

#[test]
fn criterion_07_alternating_gradient_series() {
    check("c7");
}

#[test]
fn criterion_08_alternating_attainment() {
    check("c8");
}

#[test]
fn criterion_09_fenchel_young_sweep() {
    check("c9");
}

#[test]
fn criterion_10_domain_table() {
    check("c10");
}
