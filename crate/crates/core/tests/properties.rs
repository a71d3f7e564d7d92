//! Structural invariants over randomly drawn ensembles and codes.

mod common;

use proptest::prelude::*;
use seqdec::analysis::{
    average_error_exact, certified_lower_bound, f_sequence, log_y_threshold, monotonicity_check, phi_apply,
    q_operator, sequential_success_lower_bound, verify_operator_orderings, w1_q_traces, AveragingContext,
    MONOTONE_SLACK,
};
use seqdec::coding::{sample_code, SeedStream};
use seqdec::decoding::{build_pgm_povm, build_sequential_povm, sequential_code_error, code_error_probability, Povm};
use seqdec::ensembles::{preset_ensemble, Ensemble};
use seqdec::operators::{tensor_power, HermitianOperator};
use seqdec::typicality::average_typical_projector;
use seqdec::Settings;

fn pair(theta: f64, lambda: f64) -> Ensemble {
    preset_ensemble("depolarized-pair", &[theta, lambda]).unwrap()
}

fn completeness_gap(povm: &impl Povm) -> f64 {
    let dim = povm.dim();
    let mut sum = HermitianOperator::zeros(dim);
    for el in povm.all_elements() {
        sum = sum.add(el);
    }
    sum.sub(&HermitianOperator::identity(dim)).matrix().frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn povms_are_complete_and_psd(
        theta in 0.2f64..1.4,
        lambda in 0.0f64..0.6,
        n in 2usize..=3,
        size in 1usize..=3,
        delta in 0.05f64..0.7,
        seed in any::<u64>(),
    ) {
        let e = pair(theta, lambda);
        let s = Settings::default();
        let code = sample_code(&e, n, size, &mut SeedStream::new(seed).rng(0)).unwrap();
        let seq = build_sequential_povm(&e, &code, delta, &s).unwrap();
        let pgm = build_pgm_povm(&e, &code, delta, &s).unwrap();
        prop_assert!(completeness_gap(&seq) <= 1e-8);
        prop_assert!(completeness_gap(&pgm) <= 1e-8);
        for el in seq.all_elements().into_iter().chain(pgm.all_elements()) {
            prop_assert!(el.min_eigenvalue().unwrap() >= -1e-9);
        }
        // Dense and matrix-free evaluations of the same decoder agree.
        let dense = code_error_probability(&seq, &e, &code, &s).unwrap();
        let free = sequential_code_error(&e, &code, delta, &s).unwrap();
        prop_assert!((dense - free).abs() <= 1e-10);
    }

    #[test]
    fn typical_projector_rank_and_mass(
        theta in 0.2f64..1.4,
        lambda in 0.0f64..0.6,
        n in 1usize..=10,
        delta in 0.01f64..0.8,
    ) {
        let e = pair(theta, lambda);
        let p = average_typical_projector(&e, n, delta, &Settings::default()).unwrap();
        let cap = (n as f64 * (e.entropy() + delta)).exp2();
        prop_assert!(p.rank() as f64 <= cap + 1e-9);
        let mass = p.typical_mass();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&mass));
        prop_assert!((mass + p.atypical_mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn averaged_step_is_trace_non_increasing_and_q_is_a_contraction(
        theta in 0.2f64..1.4,
        lambda in 0.0f64..0.6,
        n in 2usize..=3,
        delta in 0.05f64..0.7,
    ) {
        let e = pair(theta, lambda);
        let s = Settings::default();
        let ctx = AveragingContext::exact(&e, n, delta, &s).unwrap();
        let rho_n = HermitianOperator::new(tensor_power(e.average().matrix(), n, s.max_dim).unwrap(), 1e-10).unwrap();
        let mapped = phi_apply(&ctx, &rho_n).unwrap();
        prop_assert!(mapped.trace() <= rho_n.trace() + 1e-12);
        prop_assert!(mapped.min_eigenvalue().unwrap() >= -1e-10);
        let q = q_operator(&ctx).unwrap();
        for lam in q.eigenvalues().unwrap() {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&lam));
        }
    }

    #[test]
    fn bound_chain_holds_on_exact_instances(
        theta in 0.2f64..1.4,
        lambda in 0.0f64..0.6,
        n in 2usize..=3,
        delta in 0.05f64..0.7,
        size in 1usize..=4,
    ) {
        let e = pair(theta, lambda);
        let s = Settings::default();
        let ctx = AveragingContext::exact(&e, n, delta, &s).unwrap();
        let report = verify_operator_orderings(&ctx).unwrap();
        prop_assert!(report.all_hold(), "{report:?}");

        let f = f_sequence(&ctx, 4).unwrap();
        let shrink = (-(n as f64) * ctx.chi_eff()).exp2();
        for z in 1..f.len() {
            prop_assert!(f[z] <= f[z - 1] * shrink + 1e-12, "f_{z} = {} > {}", f[z], f[z - 1] * shrink);
        }

        let traces = w1_q_traces(&ctx, 5).unwrap();
        for w in traces.windows(2) {
            prop_assert!(w[1] <= w[0] + MONOTONE_SLACK);
        }
        prop_assert!(monotonicity_check(&ctx, 5).is_ok());

        let bound = sequential_success_lower_bound(&ctx, size).unwrap();
        let success = 1.0 - average_error_exact(&ctx, size).unwrap();
        prop_assert!(success >= bound.a_exact.powi(2) - 1e-9);
        prop_assert!(bound.a_exact.powi(2) >= bound.certified - 1e-9);
        if let Some(a) = bound.a_expansion {
            prop_assert!((a - bound.a_exact).abs() <= 1e-9);
        }
        prop_assert_eq!(bound.certified, certified_lower_bound(f[0], n, ctx.chi_eff(), size));
    }

    #[test]
    fn log_y_is_monotone_in_y(x in 1.0f64..3.0, y in 1.0f64..3.0, bump in 0.0f64..0.5, n in 1usize..60) {
        let a = log_y_threshold(x, y, n).unwrap();
        let b = log_y_threshold(x, y + bump, n).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!(b >= a * (1.0 - 1e-12));
    }
}
