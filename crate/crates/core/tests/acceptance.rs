//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line with timings and the measured values.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see every line.

use lightlock_core::acceptance::{run_criterion, CriterionResult};

fn check(id: u32) {
    let r: CriterionResult = run_criterion(id);
    println!(
        "criterion {:2} [{}] {:<35} ({:6.2}s / budget {:.0}s) {}",
        r.id,
        if r.pass { "PASS" } else { "FAIL" },
        r.name,
        r.seconds,
        r.budget_seconds,
        r.details
    );
    assert!(r.pass, "criterion {} failed: {}", r.id, r.details);
}

#[test]
fn criterion_01_fbb84_completeness() {
    check(1);
}

#[test]
fn criterion_02_intercept_resend_bound() {
    check(2);
}

#[test]
fn criterion_03_epr_attack_plain_bb84() {
    check(3);
}

#[test]
fn criterion_04_classical_copy_attack() {
    check(4);
}

#[test]
fn criterion_05_commitment_completeness() {
    check(5);
}

#[test]
fn criterion_06_position_binding() {
    check(6);
}

#[test]
fn criterion_07_hiding_surrogate() {
    check(7);
}

#[test]
fn criterion_08_zk_soundness() {
    check(8);
}

#[test]
fn criterion_09_zkpv_end_to_end() {
    check(9);
}

#[test]
fn criterion_10_optimized_per_tick_work() {
    check(10);
}

#[test]
fn criterion_11_denial_privacy_attack() {
    check(11);
}

#[test]
fn criterion_12_determinism_and_causality() {
    check(12);
}
