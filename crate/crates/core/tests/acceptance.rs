//! Exit criteria. Each test prints a PASS/FAIL line with the measured
//! numbers and fails if any bound is violated.

use ndweak_core::spinhalf::generic_setup;
use ndweak_core::verification::{self, Check, DEFAULT_SEED};

fn gate(id: u8, check: Check) {
    let report = check.report();
    println!("criterion {id}: {report}");
    assert!(check.passed(), "criterion {id} failed:\n{report}");
}

#[test]
fn criterion_1_propagator_lemma() {
    gate(1, verification::propagator_lemma().unwrap());
}

#[test]
fn criterion_2_generic_engine_matches_spin_closed_forms() {
    gate(
        2,
        verification::spin_cross_check(100, DEFAULT_SEED, generic_setup).unwrap(),
    );
}

#[test]
fn criterion_3_small_dispersion_readout() {
    gate(3, verification::fig2_reproduction().unwrap());
}

#[test]
fn criterion_4_coherent_oscillations() {
    gate(4, verification::fig3_reproduction().unwrap());
}

#[test]
fn criterion_5_expansion_error_scaling() {
    gate(5, verification::expansion_scaling().unwrap());
}

#[test]
fn criterion_6_trivial_limits() {
    gate(6, verification::trivial_limits(DEFAULT_SEED).unwrap());
}

#[test]
fn criterion_7_decoherence_regimes() {
    gate(7, verification::decoherence_regimes().unwrap());
}

#[test]
fn criterion_8_nopps_robustness() {
    gate(8, verification::nopps_robustness().unwrap());
}
