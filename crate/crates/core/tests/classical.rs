//! Commuting ensembles reduce to classical decoding: every projector is
//! diagonal, so the decoders can be replayed on strings.

mod common;

use common::{assert_close, orthogonal};
use rand::Rng;
use seqdec::analysis::{average_error_exact, AveragingContext};
use seqdec::coding::{enumerate_codes, sample_code, Codebook, SeedStream};
use seqdec::decoding::{build_pgm_povm, build_sequential_povm, code_error_probability, sequential_code_error};
use seqdec::ensembles::Ensemble;
use seqdec::operators::{ComplexMatrix, DensityMatrix, HermitianOperator};
use seqdec::Settings;

fn diagonal_ensemble(probs: &[f64], letters: &[&[f64]]) -> Ensemble {
    let states = letters
        .iter()
        .map(|q| {
            let h = HermitianOperator::new(ComplexMatrix::diagonal(q), 1e-12).unwrap();
            DensityMatrix::new(h, 1e-12).unwrap()
        })
        .collect();
    Ensemble::new(probs.to_vec(), states).unwrap()
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.log2()).sum::<f64>()
}

struct Classical {
    probs: Vec<f64>,
    letters: Vec<Vec<f64>>,
    d: usize,
}

impl Classical {
    fn average(&self) -> Vec<f64> {
        (0..self.d)
            .map(|x| self.probs.iter().zip(&self.letters).map(|(p, q)| p * q[x]).sum())
            .collect()
    }

    fn strings(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (0..self.d).map(move |x| {
                        let mut t = s.clone();
                        t.push(x);
                        t
                    })
                })
                .collect();
        }
        out
    }

    /// `(sequential error, pgm error)` by walking every output string.
    fn code_errors(&self, code: &[Vec<usize>], delta: f64) -> (f64, f64) {
        let n = code[0].len();
        let avg = self.average();
        let s = entropy(&avg);
        let cond_s: f64 = self.probs.iter().zip(&self.letters).map(|(p, q)| p * entropy(q)).sum();
        let chi = s - cond_s;
        let nf = n as f64;
        let in_window = |surprisal: f64, centre: f64| {
            surprisal >= nf * (centre - delta) - 1e-12 && surprisal <= nf * (centre + delta) + 1e-12
        };
        let mut seq_success = 0.0;
        let mut pgm_success = 0.0;
        for x in self.strings(n) {
            let typ = x.iter().all(|&c| avg[c] > 1e-12)
                && in_window(-x.iter().map(|&c| avg[c].log2()).sum::<f64>(), s);
            if !typ {
                continue;
            }
            let hits: Vec<bool> = code
                .iter()
                .map(|w| {
                    let q: Vec<f64> = w.iter().zip(&x).map(|(&j, &c)| self.letters[j][c]).collect();
                    q.iter().all(|&v| v > 1e-12) && in_window(-q.iter().map(|v| v.log2()).sum::<f64>(), s - chi)
                })
                .collect();
            let count = hits.iter().filter(|&&h| h).count();
            let first = hits.iter().position(|&h| h);
            for (u, w) in code.iter().enumerate() {
                let px: f64 = w.iter().zip(&x).map(|(&j, &c)| self.letters[j][c]).product();
                if first == Some(u) {
                    seq_success += px;
                }
                if hits[u] {
                    pgm_success += px / count as f64;
                }
            }
        }
        let big_n = code.len() as f64;
        (1.0 - seq_success / big_n, 1.0 - pgm_success / big_n)
    }
}

fn fixtures() -> Vec<(Classical, f64)> {
    vec![
        (
            Classical {
                probs: vec![0.6, 0.4],
                letters: vec![vec![0.9, 0.1], vec![0.3, 0.7]],
                d: 2,
            },
            0.35,
        ),
        (
            Classical {
                probs: vec![0.5, 0.3, 0.2],
                letters: vec![vec![0.8, 0.15, 0.05], vec![0.1, 0.7, 0.2], vec![0.25, 0.05, 0.7]],
                d: 3,
            },
            0.4,
        ),
    ]
}

fn to_ensemble(c: &Classical) -> Ensemble {
    let letters: Vec<&[f64]> = c.letters.iter().map(Vec::as_slice).collect();
    diagonal_ensemble(&c.probs, &letters)
}

#[test]
fn diagonal_ensembles_match_classical_decoders() {
    let s = Settings::default();
    let mut informative = 0;
    for (classical, delta) in fixtures() {
        let e = to_ensemble(&classical);
        let mut rng = SeedStream::new(11).rng(0);
        for _ in 0..12 {
            let n = rng.random_range(2..=4);
            let size = rng.random_range(1..=3);
            let code = sample_code(&e, n, size, &mut rng).unwrap();
            let (seq_want, pgm_want) = classical.code_errors(code.codewords(), delta);
            let seq = sequential_code_error(&e, &code, delta, &s).unwrap();
            let povm = build_sequential_povm(&e, &code, delta, &s).unwrap();
            let seq_dense = code_error_probability(&povm, &e, &code, &s).unwrap();
            let pgm = build_pgm_povm(&e, &code, delta, &s).unwrap();
            let pgm_got = code_error_probability(&pgm, &e, &code, &s).unwrap();
            assert_close(seq, seq_want, 1e-10, "sequential (matrix-free)");
            assert_close(seq_dense, seq_want, 1e-10, "sequential (dense)");
            assert_close(pgm_got, pgm_want, 1e-10, "pgm");
            if seq_want > 1e-6 && seq_want < 1.0 - 1e-6 {
                informative += 1;
            }
        }
    }
    // Guard against every instance having an empty typical set.
    assert!(informative >= 6, "only {informative} informative instances");
}

#[test]
fn diagonal_average_error_matches_classical_enumeration() {
    let s = Settings::default();
    let (classical, delta) = fixtures().remove(0);
    let e = to_ensemble(&classical);
    let ctx = AveragingContext::exact(&e, 3, delta, &s).unwrap();
    for size in 1..=3 {
        let mut want = 0.0;
        for (code, weight) in enumerate_codes(&e, 3, size, &s).unwrap() {
            want += weight.prob() * classical.code_errors(code.codewords(), delta).0;
        }
        let got = average_error_exact(&ctx, size).unwrap();
        assert_close(got, want, 1e-10, &format!("average error, N={size}"));
    }
}

#[test]
fn orthogonal_pair_decodes_distinct_codewords_perfectly() {
    let e = orthogonal();
    let s = Settings::default();
    for n in 2..=3 {
        for size in 2..=4 {
            for (code, _) in enumerate_codes(&e, n, size, &s).unwrap() {
                let words = code.codewords();
                let distinct = (0..size).all(|a| (a + 1..size).all(|b| words[a] != words[b]));
                if !distinct {
                    continue;
                }
                for delta in [0.1, 0.3] {
                    let seq = sequential_code_error(&e, &code, delta, &s).unwrap();
                    let pgm = build_pgm_povm(&e, &code, delta, &s).unwrap();
                    let pgm_err = code_error_probability(&pgm, &e, &code, &s).unwrap();
                    assert!(seq.abs() <= 1e-10, "sequential error {seq} on {words:?}");
                    assert!(pgm_err.abs() <= 1e-10, "pgm error {pgm_err} on {words:?}");
                }
            }
        }
    }
}

#[test]
fn orthogonal_pair_repeated_codeword_is_ambiguous() {
    let e = orthogonal();
    let s = Settings::default();
    let code = Codebook::new(vec![vec![0, 1], vec![0, 1]], 2).unwrap();
    // The sequential decoder always declares the first copy.
    assert_close(sequential_code_error(&e, &code, 0.2, &s).unwrap(), 0.5, 1e-12, "sequential");
    let pgm = build_pgm_povm(&e, &code, 0.2, &s).unwrap();
    assert_close(code_error_probability(&pgm, &e, &code, &s).unwrap(), 0.5, 1e-12, "pgm");
}

#[test]
fn sampled_codes_follow_product_distribution() {
    // n = 2, N = 2 over a binary alphabet: 16 codes. Chi-square with 15
    // degrees of freedom; 37.7 is the 0.1% critical value.
    let e = diagonal_ensemble(&[0.7, 0.3], &[&[1.0, 0.0], &[0.0, 1.0]]);
    let s = Settings::default();
    let codes: Vec<(Codebook, f64)> = enumerate_codes(&e, 2, 2, &s)
        .unwrap()
        .map(|(c, w)| (c, w.prob()))
        .collect();
    assert_eq!(codes.len(), 16);
    let samples = 100_000;
    let mut counts = vec![0usize; codes.len()];
    let mut rng = SeedStream::new(2024).rng(0);
    for _ in 0..samples {
        let code = sample_code(&e, 2, 2, &mut rng).unwrap();
        let k = codes.iter().position(|(c, _)| c == &code).unwrap();
        counts[k] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&codes)
        .map(|(&obs, (_, p))| {
            let expected = p * samples as f64;
            (obs as f64 - expected).powi(2) / expected
        })
        .sum();
    assert!(chi2 < 37.7, "chi-square {chi2}");
}
