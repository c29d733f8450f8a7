//! Acceptance suite: one test per criterion of the reproduction table.
//! Each prints its pass/fail line and asserts the verdict; the same
//! checks back the `nls reproduce` subcommand.

use nls_core::harness::acceptance::{self, CriterionResult};

fn assert_criterion(result: CriterionResult) {
    println!("{}", result.line());
    assert!(result.passed, "{}: {}", result.id, result.detail);
}

#[test]
fn criterion_01_dilation_scaling() {
    assert_criterion(acceptance::criterion_dilation_scaling());
}

#[test]
fn criterion_02_kwong_soliton() {
    assert_criterion(acceptance::criterion_kwong_soliton());
}

#[test]
fn criterion_03_fibering() {
    assert_criterion(acceptance::criterion_fibering());
}

#[test]
fn criterion_04_k1_consistency() {
    assert_criterion(acceptance::criterion_k1_consistency());
}

#[test]
fn criterion_05_attractive_ground() {
    assert_criterion(acceptance::criterion_attractive_ground());
}

#[test]
fn criterion_06_beta_decay() {
    assert_criterion(acceptance::criterion_beta_decay());
}

#[test]
fn criterion_07_nonexistence() {
    assert_criterion(acceptance::criterion_nonexistence());
}

#[test]
fn criterion_08_multiplicity() {
    assert_criterion(acceptance::criterion_multiplicity());
}

#[test]
fn criterion_09_spectral_counting() {
    assert_criterion(acceptance::criterion_spectral_counting());
}

#[test]
fn criterion_10_condition_arithmetic() {
    assert_criterion(acceptance::criterion_condition_arithmetic());
}
