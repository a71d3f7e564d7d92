#![allow(dead_code)]

pub mod pins;

use seqdec::ensembles::{preset_ensemble, Ensemble};

pub fn canonical() -> Ensemble {
    preset_ensemble("two-pure-theta", &[pins::THETA]).unwrap()
}

pub fn depolarized() -> Ensemble {
    preset_ensemble("depolarized-pair", &[pins::THETA, pins::DEPOLARIZING]).unwrap()
}

pub fn orthogonal() -> Ensemble {
    preset_ensemble("orthogonal-pair", &[]).unwrap()
}

#[track_caller]
pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: got {actual:.17e}, expected {expected:.17e} (tol {tol:e})"
    );
}
