//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.

use std::io::Write;

use historic::verify::{run_criterion, CRITERIA};

fn run(id: usize) {
    let outcome = run_criterion(id).expect("known criterion");
    // Written past the harness capture so the line shows in every run.
    let _ = writeln!(std::io::stdout().lock(), "{}", outcome.summary_line());
    assert!(outcome.passed, "{}", outcome.summary_line());
}

#[test]
fn criterion_1_variational_principle() {
    run(1);
}

#[test]
fn criterion_2_doubling_map() {
    run(2);
}

#[test]
fn criterion_3_jointly_irregular() {
    run(3);
}

#[test]
fn criterion_4_full_pressure_family() {
    run(4);
}

#[test]
fn criterion_5_beta_shift() {
    run(5);
}

#[test]
fn criterion_6_bowen_equation() {
    run(6);
}

#[test]
fn criterion_7_dichotomy() {
    run(7);
}

#[test]
fn criterion_8_maximal_oscillation() {
    run(8);
}

#[test]
fn criterion_9_brute_force() {
    run(9);
}

#[test]
fn every_criterion_has_a_test() {
    assert_eq!(CRITERIA.len(), 9);
}
