//! Library values checked against numbers frozen from the independent
//! numpy/mpmath oracle in `tests/oracles/pin_values.py`.

mod common;

use common::{assert_close, canonical, depolarized, pins};
use seqdec::analysis::{
    average_error_exact, f0_direct, f_sequence, log_y_threshold, sequential_success_lower_bound, AveragingContext,
};
use seqdec::coding::Codebook;
use seqdec::decoding::{
    build_pgm_povm, build_sequential_povm, code_error_probability, decode_confusion_matrix, sequential_code_error, Povm,
};
use seqdec::typicality::{
    atypical_mass_conditional, average_typical_projector, conditional_typical_projector, MassMode,
};
use seqdec::Settings;

#[test]
fn canonical_spectrum_and_entropy() {
    let e = canonical();
    assert_close(e.entropy(), pins::CANONICAL_ENTROPY, 1e-12, "S(rho)");
    // Pure letters: chi equals the entropy of the average.
    assert_close(e.chi(), pins::CANONICAL_ENTROPY, 1e-12, "chi");
    let mut eigs = e.average_spectrum().eigenvalues.clone();
    eigs.sort_by(|a, b| b.total_cmp(a));
    for (got, want) in eigs.iter().zip(pins::CANONICAL_AVG_EIGS) {
        assert_close(*got, want, 1e-12, "eigenvalue");
    }
}

#[test]
fn canonical_typical_projector_pins() {
    let e = canonical();
    let s = Settings::default();
    for (n, rank, typical, atypical) in pins::CANONICAL_TYPICAL_D025 {
        let p = average_typical_projector(&e, n, 0.25, &s).unwrap();
        assert_eq!(p.rank(), rank, "rank at n={n}");
        assert_close(p.typical_mass(), typical, 1e-9, "typical mass");
        assert_close(p.atypical_mass(), atypical, 1e-9, "atypical mass");
    }
}

#[test]
fn depolarized_pins() {
    let e = depolarized();
    let s = Settings::default();
    assert_close(e.chi(), pins::DEPOLARIZED_CHI, 1e-12, "chi");
    let cond = conditional_typical_projector(&e, &pins::DEPOLARIZED_N4_D03_WORD, 0.3, &s).unwrap();
    assert_eq!(cond.rank(), pins::DEPOLARIZED_N4_D03_WORD_RANK);
    let mass = atypical_mass_conditional(&e, 6, 0.3, MassMode::Exact, &s).unwrap();
    assert_close(mass.value, pins::DEPOLARIZED_N6_D03_COND_ATYPICAL, 1e-9, "conditional atypical mass");
    assert!(mass.stderr.is_none());
}

#[test]
fn f_sequence_pins() {
    let e = canonical();
    let ctx = AveragingContext::exact(&e, 6, 0.2, &Settings::default()).unwrap();
    assert_eq!(ctx.average_projector().rank(), pins::CANONICAL_N6_D02_RANK);
    let f = f_sequence(&ctx, 4).unwrap();
    for (z, (got, want)) in f.iter().zip(pins::CANONICAL_N6_D02_F).enumerate() {
        assert_close(*got, want, 1e-8, &format!("f_{z}"));
    }
    let bound = sequential_success_lower_bound(&ctx, 2).unwrap();
    assert_close(bound.a_exact, pins::CANONICAL_N6_D02_N2_A_EXACT, 1e-10, "A");
    assert_close(bound.certified, pins::CANONICAL_N6_D02_N2_CERTIFIED, 1e-10, "certified");
    let err = average_error_exact(&ctx, 2).unwrap();
    assert_close(err, pins::CANONICAL_N6_D02_N2_AVG_ERR, 1e-10, "average error");
}

#[test]
fn f0_matrix_free_matches_dense_pin() {
    let e = canonical();
    let f0 = f0_direct(&e, 6, 0.2, MassMode::Exact, &Settings::default()).unwrap();
    assert_close(f0.value, pins::CANONICAL_N6_D02_F[0], 1e-10, "f0");
}

#[test]
fn f0_is_not_monotone_in_n_at_wide_window() {
    // Window edges move with n, so f0 jumps around at small n rather than
    // climbing steadily. Pinned to document the observed shape.
    let e = canonical();
    let s = Settings::default();
    let got: Vec<f64> = pins::CANONICAL_D05_F0
        .iter()
        .map(|&(n, want)| {
            let v = f0_direct(&e, n, 0.5, MassMode::Exact, &s).unwrap().value;
            assert_close(v, want, 1e-10, &format!("f0 at n={n}"));
            v
        })
        .collect();
    assert!(got[1] > got[0] && got[2] < got[1]);
}

#[test]
fn log_y_diagonal_pins() {
    for (x, n, want) in pins::LOG_Y_DIAGONAL {
        let got = log_y_threshold(x, x, n).unwrap();
        assert_close(got, want, 1e-12 * want.abs().max(1.0), &format!("log Y({x}, {x}, {n})"));
    }
}

fn n4_code() -> Codebook {
    Codebook::new(pins::CODE_N4.iter().map(|w| w.to_vec()).collect(), 2).unwrap()
}

fn fixture_matrix(key: &str) -> Vec<Vec<(f64, f64)>> {
    let all: serde_json::Value = serde_json::from_str(include_str!("fixtures/oracle_pins.json")).unwrap();
    serde_json::from_value(all["canonical_n4_d0.3_code"][key].clone()).unwrap()
}

#[test]
fn sequential_elements_match_fixture() {
    let e = canonical();
    let s = Settings::default();
    let povm = build_sequential_povm(&e, &n4_code(), 0.3, &s).unwrap();
    for (u, key) in ["E1", "E2"].iter().enumerate() {
        let want = fixture_matrix(key);
        let got = povm.elements()[u].matrix();
        for (a, row) in want.iter().enumerate() {
            for (b, &(re, im)) in row.iter().enumerate() {
                let z = got.get(a, b);
                assert!((z.re - re).abs() < 1e-12 && (z.im - im).abs() < 1e-12, "{key}[{a}][{b}]");
            }
        }
    }
}

#[test]
fn confusion_and_code_errors() {
    let e = canonical();
    let s = Settings::default();
    let code = n4_code();
    let povm = build_sequential_povm(&e, &code, 0.3, &s).unwrap();
    let conf = decode_confusion_matrix(&povm, &e, &code, &s).unwrap();
    for (u, row) in pins::CODE_N4_CONFUSION.iter().enumerate() {
        for (v, want) in row.iter().enumerate() {
            assert_close(conf[u][v], *want, 1e-12, &format!("confusion[{u}][{v}]"));
        }
    }
    let dense = code_error_probability(&povm, &e, &code, &s).unwrap();
    let free = sequential_code_error(&e, &code, 0.3, &s).unwrap();
    assert_close(dense, pins::CODE_N4_SEQUENTIAL_ERR, 1e-12, "sequential error");
    assert_close(free, pins::CODE_N4_SEQUENTIAL_ERR, 1e-12, "matrix-free sequential error");
    let pgm = build_pgm_povm(&e, &code, 0.3, &s).unwrap();
    let pgm_err = code_error_probability(&pgm, &e, &code, &s).unwrap();
    assert_close(pgm_err, pins::CODE_N4_PGM_ERR, 1e-10, "pgm error");
}

#[test]
fn canonical_n4_average_error_pin() {
    let e = canonical();
    let ctx = AveragingContext::exact(&e, 4, 0.3, &Settings::default()).unwrap();
    let err = average_error_exact(&ctx, 2).unwrap();
    assert_close(err, pins::CANONICAL_N4_D03_N2_AVG_ERR, 1e-10, "average error");
}
