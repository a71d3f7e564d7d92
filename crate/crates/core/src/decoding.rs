//! Decoders: the sequential typical-subspace measurement and the pretty good
//! measurement, their error probabilities, and a collapse-trajectory simulator
//! of the sequential protocol.
//!
//! Messages are numbered `1..=N` in decoder outputs; outcome `0` is the
//! residual element (no codeword declared).

use std::collections::HashMap;

use rand::Rng;

use crate::coding::{codeword_state, Codebook};
use crate::ensembles::Ensemble;
use crate::operators::{c64, pinv_sqrt, ComplexMatrix, DensityMatrix, HermitianOperator, Projector};
use crate::settings::{checked_pow, Settings};
use crate::typicality::{
    average_typical_projector, conditional_typical_projector, product_spectrum, AverageTypicalProjector,
    ConditionalTypicalProjector,
};
use crate::{Error, Result};

/// Collapse denominators below this resample the whole trajectory.
pub const COLLAPSE_FLOOR: f64 = 1e-14;
const MAX_RESAMPLES: usize = 10_000;

/// A measurement with one element per codeword plus a residual.
pub trait Povm {
    /// `E_1..E_N` in codebook order.
    fn elements(&self) -> &[HermitianOperator];
    /// `E_0 = I - sum_u E_u`.
    fn residual(&self) -> &HermitianOperator;

    fn dim(&self) -> usize {
        self.residual().dim()
    }

    /// `E_0, E_1, ..., E_N`.
    fn all_elements(&self) -> Vec<&HermitianOperator> {
        std::iter::once(self.residual()).chain(self.elements()).collect()
    }
}

/// `{E_u = M_u^dagger M_u}` with `M_u = P_{j_u} P Qbar_{j_{u-1}} ... Qbar_{j_1}`.
#[derive(Debug, Clone)]
pub struct SequentialPovm {
    elements: Vec<HermitianOperator>,
    residual: HermitianOperator,
    chain: Vec<ComplexMatrix>,
    empty_typical: bool,
}

impl SequentialPovm {
    /// The `M_u` factors.
    pub fn chain(&self) -> &[ComplexMatrix] {
        &self.chain
    }

    /// The average typical set was empty, so every `E_u` vanishes.
    pub fn empty_typical(&self) -> bool {
        self.empty_typical
    }
}

impl Povm for SequentialPovm {
    fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    fn residual(&self) -> &HermitianOperator {
        &self.residual
    }
}

/// `X_j = S^(-1/2) P P_j P S^(-1/2)` with `S = sum_h P P_h P`.
#[derive(Debug, Clone)]
pub struct PgmPovm {
    elements: Vec<HermitianOperator>,
    residual: HermitianOperator,
    empty_typical: bool,
}

impl PgmPovm {
    pub fn empty_typical(&self) -> bool {
        self.empty_typical
    }
}

impl Povm for PgmPovm {
    fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    fn residual(&self) -> &HermitianOperator {
        &self.residual
    }
}

/// Dense `P` and one dense `P_j` per distinct codeword, in codebook order.
struct DenseProjectors {
    average: AverageTypicalProjector,
    p: Projector,
    conditional: Vec<Projector>,
}

fn dense_projectors(e: &Ensemble, code: &Codebook, delta: f64, settings: &Settings) -> Result<DenseProjectors> {
    let n = code.block_length();
    settings.check_dim(checked_pow(e.dim(), n))?;
    let average = average_typical_projector(e, n, delta, settings)?;
    let p = average.matrix(settings)?;
    let mut cache: HashMap<&[usize], Projector> = HashMap::new();
    let mut conditional = Vec::with_capacity(code.len());
    for word in code.codewords() {
        let pj = match cache.get(word.as_slice()) {
            Some(pj) => pj.clone(),
            None => {
                let pj = conditional_typical_projector(e, word, delta, settings)?.matrix(settings)?;
                cache.insert(word, pj.clone());
                pj
            }
        };
        conditional.push(pj);
    }
    Ok(DenseProjectors {
        average,
        p,
        conditional,
    })
}

/// `I - sum_u E_u`, checked PSD.
fn residual_of(elements: &[HermitianOperator], dim: usize, settings: &Settings) -> Result<HermitianOperator> {
    let mut residual = HermitianOperator::identity(dim);
    for el in elements {
        residual = residual.sub(el);
    }
    let min = residual.min_eigenvalue()?;
    if min < -settings.tol_psd {
        return Err(Error::InvariantViolation(format!(
            "residual POVM element has eigenvalue {min:e}"
        )));
    }
    Ok(residual)
}

pub fn build_sequential_povm(e: &Ensemble, code: &Codebook, delta: f64, settings: &Settings) -> Result<SequentialPovm> {
    let DenseProjectors {
        average,
        p,
        conditional,
    } = dense_projectors(e, code, delta, settings)?;
    let dim = p.dim();
    let pm = p.matrix();
    // running = Qbar_{j_{u-1}} ... Qbar_{j_1}; starts as I.
    let mut running = ComplexMatrix::identity(dim);
    let mut elements = Vec::with_capacity(code.len());
    let mut chain = Vec::with_capacity(code.len());
    for pj in &conditional {
        let pp = pm * &running;
        let m = pj.matrix() * &pp;
        elements.push(HermitianOperator::from_hermitian((&m.adjoint() * &m).hermitize()));
        chain.push(m);
        // Qbar_j = P (I - P_j) P, applied to `pp = P running`.
        let qbar_pp = &pp - &(pj.matrix() * &pp);
        running = pm * &qbar_pp;
    }
    let residual = residual_of(&elements, dim, settings)?;
    Ok(SequentialPovm {
        elements,
        residual,
        chain,
        empty_typical: average.is_empty(),
    })
}

pub fn build_pgm_povm(e: &Ensemble, code: &Codebook, delta: f64, settings: &Settings) -> Result<PgmPovm> {
    let DenseProjectors {
        average,
        p,
        conditional,
    } = dense_projectors(e, code, delta, settings)?;
    let dim = p.dim();
    let pm = p.matrix();
    let sandwiched: Vec<ComplexMatrix> = conditional
        .iter()
        .map(|pj| (&(pm * pj.matrix()) * pm).hermitize())
        .collect();
    let mut total = ComplexMatrix::zeros(dim);
    for s in &sandwiched {
        total = &total + s;
    }
    let root = pinv_sqrt(
        &HermitianOperator::from_hermitian(total),
        settings.pinv_cutoff,
        settings.tol_psd,
    )?;
    let r = root.matrix();
    let elements: Vec<HermitianOperator> = sandwiched
        .iter()
        .map(|s| HermitianOperator::from_hermitian((&(r * s) * r).hermitize()))
        .collect();
    let residual = residual_of(&elements, dim, settings)?;
    Ok(PgmPovm {
        elements,
        residual,
        empty_typical: average.is_empty(),
    })
}

/// Which decoder to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decoder {
    Sequential,
    Pgm,
}

impl Decoder {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::Sequential => "sequential",
            Decoder::Pgm => "pgm",
        }
    }

    /// Error probability of this decoder on one code. The sequential decoder
    /// uses the matrix-free evaluator.
    pub fn code_error(&self, e: &Ensemble, code: &Codebook, delta: f64, settings: &Settings) -> Result<f64> {
        match self {
            Decoder::Sequential => sequential_code_error(e, code, delta, settings),
            Decoder::Pgm => {
                let povm = build_pgm_povm(e, code, delta, settings)?;
                code_error_probability(&povm, e, code, settings)
            }
        }
    }
}

fn codeword_states(e: &Ensemble, code: &Codebook, settings: &Settings) -> Result<Vec<DensityMatrix>> {
    code.codewords()
        .iter()
        .map(|w| codeword_state(e, w, settings))
        .collect()
}

/// `1 - (1/N) sum_u Tr[E_u rho_{j_u}]`, clamped to `[0, 1]`.
pub fn code_error_probability(povm: &impl Povm, e: &Ensemble, code: &Codebook, settings: &Settings) -> Result<f64> {
    if povm.elements().len() != code.len() {
        return Err(Error::DimensionMismatch {
            expected: code.len(),
            found: povm.elements().len(),
        });
    }
    let states = codeword_states(e, code, settings)?;
    let success: f64 = povm
        .elements()
        .iter()
        .zip(&states)
        .map(|(el, rho)| el.trace_product(rho.operator()))
        .sum();
    Ok((1.0 - success / code.len() as f64).clamp(0.0, 1.0))
}

/// Entry `[u][v] = Tr[E_u rho_{j_v}]` for `u = 0..=N` (row 0 is the residual)
/// and `v = 0..N`.
pub fn decode_confusion_matrix(
    povm: &impl Povm,
    e: &Ensemble,
    code: &Codebook,
    settings: &Settings,
) -> Result<Vec<Vec<f64>>> {
    let states = codeword_states(e, code, settings)?;
    Ok(povm
        .all_elements()
        .iter()
        .map(|el| states.iter().map(|rho| el.trace_product(rho.operator())).collect())
        .collect())
}

/// Nonzero eigenpairs `(lambda, vector)` of a codeword state, from the
/// per-letter spectra.
fn codeword_eigenpairs(e: &Ensemble, word: &[usize], projector: &ConditionalTypicalProjector) -> Vec<(f64, Vec<c64>)> {
    let eigs: Vec<&[f64]> = word
        .iter()
        .map(|&j| e.state_spectrum(j).eigenvalues.as_slice())
        .collect();
    let (_, values) = product_spectrum(&eigs);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(k, &v)| (v, projector.structured().basis_vector(k)))
        .collect()
}

fn norm_sqr(v: &[c64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// `Tr[E_u rho_{j_u}]` for every `u`, without dense matrices: each nonzero
/// eigenvector of `rho_{j_u}` is pushed through `M_u` using the structured
/// projectors.
pub fn sequential_success_probabilities(
    e: &Ensemble,
    code: &Codebook,
    delta: f64,
    settings: &Settings,
) -> Result<Vec<f64>> {
    let n = code.block_length();
    settings.check_dim(checked_pow(e.dim(), n))?;
    let average = average_typical_projector(e, n, delta, settings)?;
    if average.is_empty() {
        return Ok(vec![0.0; code.len()]);
    }
    let p = average.structured();
    let mut cache: HashMap<&[usize], usize> = HashMap::new();
    let mut distinct: Vec<ConditionalTypicalProjector> = Vec::new();
    let mut slots = Vec::with_capacity(code.len());
    for word in code.codewords() {
        let slot = match cache.get(word.as_slice()) {
            Some(&s) => s,
            None => {
                distinct.push(conditional_typical_projector(e, word, delta, settings)?);
                cache.insert(word, distinct.len() - 1);
                distinct.len() - 1
            }
        };
        slots.push(slot);
    }
    let mut success = Vec::with_capacity(code.len());
    for (u, word) in code.codewords().iter().enumerate() {
        let target = &distinct[slots[u]];
        let mut total = 0.0;
        for (lambda, mut v) in codeword_eigenpairs(e, word, target) {
            p.apply(&mut v);
            for &earlier in &slots[..u] {
                if norm_sqr(&v) == 0.0 {
                    break;
                }
                distinct[earlier].structured().apply_complement(&mut v);
                p.apply(&mut v);
            }
            target.structured().apply(&mut v);
            total += lambda * norm_sqr(&v);
        }
        success.push(total);
    }
    Ok(success)
}

/// Sequential-decoder error of one code via [`sequential_success_probabilities`].
pub fn sequential_code_error(e: &Ensemble, code: &Codebook, delta: f64, settings: &Settings) -> Result<f64> {
    let success: f64 = sequential_success_probabilities(e, code, delta, settings)?.iter().sum();
    Ok((1.0 - success / code.len() as f64).clamp(0.0, 1.0))
}

/// Result of one simulated run of the sequential protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryOutcome {
    /// Declared message in `1..=N`, or `None` after an abort or all-NO run.
    pub declared: Option<usize>,
    /// Per step: (typicality bit, codeword bit).
    pub record: Vec<(bool, bool)>,
    /// Trajectories restarted after a near-zero collapse denominator.
    pub resamples: usize,
}

/// Runs the two-step measurement protocol on density matrices with Born-rule
/// sampling and projective collapse.
#[derive(Debug, Clone)]
pub struct TrajectorySimulator {
    p: Projector,
    conditional: Vec<Projector>,
    states: Vec<DensityMatrix>,
}

enum Step {
    Done(Option<usize>),
    Degenerate,
}

impl TrajectorySimulator {
    pub fn new(e: &Ensemble, code: &Codebook, delta: f64, settings: &Settings) -> Result<Self> {
        let DenseProjectors { p, conditional, .. } = dense_projectors(e, code, delta, settings)?;
        Ok(Self {
            p,
            conditional,
            states: codeword_states(e, code, settings)?,
        })
    }

    pub fn code_len(&self) -> usize {
        self.states.len()
    }

    /// Simulates transmission of message `sent` (1-based).
    pub fn simulate<R: Rng + ?Sized>(&self, sent: usize, rng: &mut R) -> Result<TrajectoryOutcome> {
        if sent == 0 || sent > self.states.len() {
            return Err(Error::InvalidArgument(format!(
                "sent message {sent} outside 1..={}",
                self.states.len()
            )));
        }
        let mut record = Vec::new();
        for resamples in 0..MAX_RESAMPLES {
            record.clear();
            if let Step::Done(declared) = self.run(self.states[sent - 1].matrix(), &mut record, rng) {
                return Ok(TrajectoryOutcome {
                    declared,
                    record,
                    resamples,
                });
            }
        }
        Err(Error::InvariantViolation(format!(
            "trajectory resampled {MAX_RESAMPLES} times without a regular collapse"
        )))
    }

    fn run<R: Rng + ?Sized>(&self, initial: &ComplexMatrix, record: &mut Vec<(bool, bool)>, rng: &mut R) -> Step {
        let mut state = initial.clone();
        for (i, pj) in self.conditional.iter().enumerate() {
            // (a) typicality check {P, I - P}.
            let Some((inside, collapsed)) = measure(&state, &self.p, rng) else {
                return Step::Degenerate;
            };
            if !inside {
                record.push((false, false));
                return Step::Done(None);
            }
            // (b) codeword check {P_j, I - P_j}.
            let Some((yes, collapsed)) = measure(&collapsed, pj, rng) else {
                return Step::Degenerate;
            };
            record.push((true, yes));
            if yes {
                return Step::Done(Some(i + 1));
            }
            state = collapsed;
        }
        Step::Done(None)
    }
}

/// Two-outcome measurement `{Pi, I - Pi}`; returns whether `Pi` occurred and the
/// normalized post-measurement state, or `None` if the realized outcome had
/// probability below [`COLLAPSE_FLOOR`].
fn measure<R: Rng + ?Sized>(state: &ComplexMatrix, pi: &Projector, rng: &mut R) -> Option<(bool, ComplexMatrix)> {
    let pm = pi.matrix();
    let prob = pm.trace_product(state).re.clamp(0.0, 1.0);
    let hit = rng.random::<f64>() < prob;
    let (denominator, post) = if hit {
        (prob, &(pm * state) * pm)
    } else {
        let q = pi.complement();
        let qm = q.matrix();
        (1.0 - prob, &(qm * state) * qm)
    };
    if denominator < COLLAPSE_FLOOR {
        return None;
    }
    Some((hit, post.scale(1.0 / denominator).hermitize()))
}

/// One trajectory; builds the projectors on every call, so prefer
/// [`TrajectorySimulator`] for repeated runs.
pub fn simulate_trajectory<R: Rng + ?Sized>(
    e: &Ensemble,
    code: &Codebook,
    sent: usize,
    delta: f64,
    settings: &Settings,
    rng: &mut R,
) -> Result<TrajectoryOutcome> {
    TrajectorySimulator::new(e, code, delta, settings)?.simulate(sent, rng)
}
