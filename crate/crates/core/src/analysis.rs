//! Code-averaged error probabilities and the operator inequalities that bound
//! them.
//!
//! Notation: `P` is the average typical projector, `P_j` the conditional one,
//! `Qbar_j = P (I - P_j) P`, `W_q = sum_j p_j P_j rho_j^q P_j`,
//! `Wbar_0 = P W_0 P` and `Qop = sum_j p_j Qbar_j = P (I - W_0) P`. Powers of
//! `Qop` start from `Qop^0 := P`.

use rayon::prelude::*;
use serde::Serialize;

use crate::coding::{sample_code, SeedStream};
use crate::decoding::Decoder;
use crate::ensembles::Ensemble;
use crate::operators::{psd_margin, tensor_power, ComplexMatrix, DensityMatrix, HermitianOperator, Projector};
use crate::settings::{checked_pow, Settings};
use crate::typicality::{
    atypical_mass_average, atypical_mass_conditional, average_typical_projector, conditional_typical_projector,
    mean_and_stderr, multi_index, AverageTypicalProjector, MassEstimate, MassMode,
};
use crate::{Error, Result};

/// Slack allowed when checking that a sequence is non-increasing.
pub const MONOTONE_SLACK: f64 = 1e-10;
/// Largest `N` for which the alternating binomial form of `A` is evaluated.
pub const EXPANSION_MAX_N: usize = 20;

#[derive(Debug, Clone)]
struct Member {
    prob: f64,
    pj: Projector,
    qbar: ComplexMatrix,
    /// `P P_j P`.
    pbar: ComplexMatrix,
    state: DensityMatrix,
}

/// Everything needed to average over codewords. In exact mode the whole
/// codeword family is precomputed; in sampled mode only the Monte Carlo
/// routines are available.
#[derive(Debug, Clone)]
pub struct AveragingContext {
    ensemble: Ensemble,
    n: usize,
    delta: f64,
    settings: Settings,
    average: AverageTypicalProjector,
    exact: Option<ExactFamily>,
}

#[derive(Debug, Clone)]
struct ExactFamily {
    p: Projector,
    members: Vec<Member>,
    w0: HermitianOperator,
    w1: HermitianOperator,
    q: HermitianOperator,
}

impl AveragingContext {
    /// Precomputes `P_j`, `Qbar_j`, `rho_j` for every codeword in `A^n` with
    /// nonzero probability. Limited by `settings.exact_budget`.
    pub fn exact(e: &Ensemble, n: usize, delta: f64, settings: &Settings) -> Result<Self> {
        let dim = settings.check_dim(checked_pow(e.dim(), n))?;
        let words = checked_pow(e.alphabet_size(), n);
        let cost = words.saturating_mul((dim as u128).pow(2));
        if cost > settings.exact_budget as u128 {
            return Err(Error::BudgetExceeded {
                what: "exact averaging context",
                required: cost,
                budget: settings.exact_budget as u128,
            });
        }
        let average = average_typical_projector(e, n, delta, settings)?;
        let p = average.matrix(settings)?;
        let pm = p.matrix();
        let members: Vec<Member> = (0..words as usize)
            .into_par_iter()
            .map(|flat| {
                let word = multi_index(flat, e.alphabet_size(), n);
                let prob: f64 = word.iter().map(|&j| e.probs()[j]).product();
                if prob == 0.0 {
                    return Ok(None);
                }
                let pj = conditional_typical_projector(e, &word, delta, settings)?.matrix(settings)?;
                let pbar = (&(pm * pj.matrix()) * pm).hermitize();
                let qbar = (&(pm - &pbar) * pm).hermitize();
                let state = crate::coding::codeword_state(e, &word, settings)?;
                Ok(Some(Member {
                    prob,
                    pj,
                    qbar,
                    pbar,
                    state,
                }))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();

        let mut w0 = ComplexMatrix::zeros(dim);
        let mut w1 = ComplexMatrix::zeros(dim);
        let mut q = ComplexMatrix::zeros(dim);
        for m in &members {
            let pjm = m.pj.matrix();
            w0 = &w0 + &pjm.scale(m.prob);
            w1 = &w1 + &(&(pjm * m.state.matrix()) * pjm).scale(m.prob);
            q = &q + &m.qbar.scale(m.prob);
        }
        let family = ExactFamily {
            p,
            members,
            w0: HermitianOperator::from_hermitian(w0.hermitize()),
            w1: HermitianOperator::from_hermitian(w1.hermitize()),
            q: HermitianOperator::from_hermitian(q.hermitize()),
        };
        Ok(Self {
            ensemble: e.clone(),
            n,
            delta,
            settings: settings.clone(),
            average,
            exact: Some(family),
        })
    }

    /// Context without the codeword family.
    pub fn sampled(e: &Ensemble, n: usize, delta: f64, settings: &Settings) -> Result<Self> {
        settings.check_dim(checked_pow(e.dim(), n))?;
        Ok(Self {
            ensemble: e.clone(),
            n,
            delta,
            settings: settings.clone(),
            average: average_typical_projector(e, n, delta, settings)?,
            exact: None,
        })
    }

    fn family(&self) -> Result<&ExactFamily> {
        self.exact.as_ref().ok_or(Error::ExactModeRequired)
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn average_projector(&self) -> &AverageTypicalProjector {
        &self.average
    }

    /// Dense `P` (exact mode).
    pub fn p(&self) -> Result<&Projector> {
        Ok(&self.family()?.p)
    }

    /// Sum of codeword probabilities in the family (1 in exact mode).
    pub fn total_probability(&self) -> Result<f64> {
        Ok(self.family()?.members.iter().map(|m| m.prob).sum())
    }

    /// `chi - 2 delta`.
    pub fn chi_eff(&self) -> f64 {
        self.ensemble.chi() - 2.0 * self.delta
    }
}

/// `Phi(theta) = sum_j p_j Qbar_j theta Qbar_j`.
pub fn phi_apply(ctx: &AveragingContext, theta: &HermitianOperator) -> Result<HermitianOperator> {
    let family = ctx.family()?;
    theta.matrix().check_same_dim(family.p.matrix())?;
    Ok(HermitianOperator::from_hermitian(phi_dense(family, theta.matrix())))
}

fn phi_dense(family: &ExactFamily, theta: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(theta.dim());
    for m in &family.members {
        out = &out + &(&(&m.qbar * theta) * &m.qbar).scale(m.prob);
    }
    out.hermitize()
}

/// Exact code-averaged error of the sequential decoder with `N` codewords:
/// `1 - (1/N) sum_j p_j sum_{l < N} Tr[P P_j P Phi^l(rho_j)]`.
pub fn average_error_exact(ctx: &AveragingContext, code_size: usize) -> Result<f64> {
    let family = ctx.family()?;
    if code_size == 0 {
        return Err(Error::InvalidArgument("code size must be positive".into()));
    }
    let applications = (family.members.len() as u128).saturating_mul(code_size as u128 - 1);
    if applications > ctx.settings.phi_budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "super-operator iterations",
            required: applications,
            budget: ctx.settings.phi_budget as u128,
        });
    }
    let per_word: Vec<f64> = family
        .members
        .par_iter()
        .map(|m| {
            let mut theta = m.state.matrix().clone();
            let mut acc = 0.0;
            for l in 0..code_size {
                acc += m.pbar.trace_product(&theta).re;
                if l + 1 < code_size {
                    theta = phi_dense(family, &theta);
                }
            }
            m.prob * acc
        })
        .collect();
    let success = per_word.iter().sum::<f64>() / code_size as f64;
    Ok((1.0 - success).clamp(0.0, 1.0))
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Code-averaged error over `num_codes` random codes. Code `i` is drawn from
/// stream `i` of `seed`, so the result does not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn average_error_mc(
    e: &Ensemble,
    n: usize,
    delta: f64,
    code_size: usize,
    num_codes: usize,
    seed: u64,
    decoder: Decoder,
    settings: &Settings,
) -> Result<McEstimate> {
    if num_codes == 0 {
        return Err(Error::InvalidArgument("need at least one code".into()));
    }
    let errors = code_errors_mc(e, n, delta, code_size, num_codes, seed, decoder, settings)?;
    let (mean, stderr) = mean_and_stderr(&errors);
    Ok(McEstimate { mean, stderr })
}

/// Per-code errors behind [`average_error_mc`].
#[allow(clippy::too_many_arguments)]
pub fn code_errors_mc(
    e: &Ensemble,
    n: usize,
    delta: f64,
    code_size: usize,
    num_codes: usize,
    seed: u64,
    decoder: Decoder,
    settings: &Settings,
) -> Result<Vec<f64>> {
    let streams = SeedStream::new(seed);
    (0..num_codes)
        .into_par_iter()
        .map(|i| {
            let code = sample_code(e, n, code_size, &mut streams.rng(i as u64))?;
            decoder.code_error(e, &code, delta, settings)
        })
        .collect()
}

/// `W_q = sum_j p_j P_j rho_j^q P_j` (with `rho^0 = I`).
pub fn w_operator(ctx: &AveragingContext, q: u32) -> Result<HermitianOperator> {
    let family = ctx.family()?;
    match q {
        0 => return Ok(family.w0.clone()),
        1 => return Ok(family.w1.clone()),
        _ => {}
    }
    let dim = family.p.dim();
    let mut out = ComplexMatrix::zeros(dim);
    for m in &family.members {
        let mut power = ComplexMatrix::identity(dim);
        for _ in 0..q {
            power = &power * m.state.matrix();
        }
        out = &out + &(&(m.pj.matrix() * &power) * m.pj.matrix()).scale(m.prob);
    }
    Ok(HermitianOperator::from_hermitian(out.hermitize()))
}

/// `Qop = sum_j p_j Qbar_j`.
pub fn q_operator(ctx: &AveragingContext) -> Result<HermitianOperator> {
    Ok(ctx.family()?.q.clone())
}

/// `f_z = Tr[W_1 P Wbar_0^z]` for `z = 0..=zmax`.
pub fn f_sequence(ctx: &AveragingContext, zmax: usize) -> Result<Vec<f64>> {
    let family = ctx.family()?;
    let pm = family.p.matrix();
    let wbar0 = &(pm * family.w0.matrix()) * pm;
    Ok(power_traces(family.w1.matrix(), pm, &wbar0, zmax))
}

pub fn f_z(ctx: &AveragingContext, z: usize) -> Result<f64> {
    Ok(f_sequence(ctx, z)?[z])
}

/// `Tr[w (start * step^l)]` for `l = 0..=lmax`.
fn power_traces(w: &ComplexMatrix, start: &ComplexMatrix, step: &ComplexMatrix, lmax: usize) -> Vec<f64> {
    let mut x = start.clone();
    let mut out = Vec::with_capacity(lmax + 1);
    for l in 0..=lmax {
        out.push(w.trace_product(&x).re);
        if l < lmax {
            x = &x * step;
        }
    }
    out
}

/// `Tr[W_1 Qop^l]` for `l = 0..=lmax`.
pub fn w1_q_traces(ctx: &AveragingContext, lmax: usize) -> Result<Vec<f64>> {
    let family = ctx.family()?;
    Ok(power_traces(family.w1.matrix(), family.p.matrix(), family.q.matrix(), lmax))
}

/// `Tr[W_1 Qop^l]` for `l = 0..=lmax`, failing if the sequence ever increases
/// by more than [`MONOTONE_SLACK`].
pub fn monotonicity_check(ctx: &AveragingContext, lmax: usize) -> Result<Vec<f64>> {
    let values = w1_q_traces(ctx, lmax)?;
    if let Some(l) = (1..values.len()).find(|&l| values[l] > values[l - 1] + MONOTONE_SLACK) {
        return Err(Error::InvariantViolation(format!(
            "Tr[W1 Q^l] increases at l = {l}: {} -> {}",
            values[l - 1],
            values[l]
        )));
    }
    Ok(values)
}

/// `(1 + 2^(-n c))^(N - 1)` evaluated as `exp((N - 1) ln(1 + 2^(-n c)))`.
fn growth_factor(n: usize, chi_eff: f64, code_size: usize) -> f64 {
    let eps = (-(n as f64) * chi_eff).exp2();
    ((code_size as f64 - 1.0) * eps.ln_1p()).exp()
}

/// `max(0, f0 [2 - (1 + 2^(-n chi_eff))^(N-1)])^2`.
pub fn certified_lower_bound(f0: f64, n: usize, chi_eff: f64, code_size: usize) -> f64 {
    let a = f0 * (2.0 - growth_factor(n, chi_eff, code_size));
    a.max(0.0).powi(2)
}

/// Lower bounds on the code-averaged success probability with `N` codewords.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessBound {
    /// `max(0, f0 [2 - (1 + 2^(-n(chi - 2 delta)))^(N-1)])^2`.
    pub certified: f64,
    /// `Tr[W_1 Qop^(N-1)]`.
    pub a_exact: f64,
    /// `sum_z (-1)^z C(N-1, z) f_z`, only for `N <= EXPANSION_MAX_N`.
    pub a_expansion: Option<f64>,
    /// `chi - 2 delta <= 0`: the bound carries no information.
    pub vacuous: bool,
}

pub fn sequential_success_lower_bound(ctx: &AveragingContext, code_size: usize) -> Result<SuccessBound> {
    if code_size == 0 {
        return Err(Error::InvalidArgument("code size must be positive".into()));
    }
    let f = f_sequence(ctx, if code_size <= EXPANSION_MAX_N { code_size - 1 } else { 0 })?;
    let a_exact = *w1_q_traces(ctx, code_size - 1)?.last().expect("non-empty");
    let a_expansion = (code_size <= EXPANSION_MAX_N).then(|| {
        let m = code_size - 1;
        let mut binom = 1.0;
        let mut sum = 0.0;
        for (z, fz) in f.iter().enumerate().take(m + 1) {
            let sign = if z % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * fz;
            binom = binom * (m - z) as f64 / (z + 1) as f64;
        }
        sum
    });
    Ok(SuccessBound {
        certified: certified_lower_bound(f[0], ctx.n, ctx.chi_eff(), code_size),
        a_exact,
        a_expansion,
        vacuous: ctx.chi_eff() <= 0.0,
    })
}

/// `ln Y(x, y, n) = (y^n - 1) ln(1 + x^(-n))` for `x, y >= 1`.
pub fn log_y_threshold(x: f64, y: f64, n: usize) -> Result<f64> {
    if !(x >= 1.0 && y >= 1.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidArgument(format!("Y needs x, y >= 1, got x={x}, y={y}")));
    }
    let n = n as f64;
    let count = (n * y.ln()).exp_m1();
    let step = (-n * x.ln()).exp().ln_1p();
    Ok(count * step)
}

/// `Y(x, y, n) = (1 + x^(-n))^(y^n - 1)`; may be infinite when `y > x`.
pub fn y_threshold(x: f64, y: f64, n: usize) -> Result<f64> {
    Ok(log_y_threshold(x, y, n)?.exp())
}

/// Whether a rate lies below the achievable threshold `chi - 2 delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Below,
    Above,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Below => "below",
            Verdict::Above => "above",
        }
    }
}

pub fn rate_verdict(chi: f64, delta: f64, rate: f64) -> Verdict {
    if rate < chi - 2.0 * delta {
        Verdict::Below
    } else {
        Verdict::Above
    }
}

/// Smallest eigenvalue of each difference operator; an ordering holds when
/// its margin is at least `-tol_psd`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderingReport {
    /// `2^(n(S - chi + delta)) rho^(x)n - W_0`.
    pub w0_margin: f64,
    /// `2^(-n(chi - 2 delta)) P - P W_0 P`.
    pub compressed_w0_margin: f64,
    /// `Qop - (1 - 2^(-n(chi - 2 delta))) P`.
    pub q_margin: f64,
    pub w0_holds: bool,
    pub compressed_w0_holds: bool,
    pub q_holds: bool,
}

impl OrderingReport {
    pub fn all_hold(&self) -> bool {
        self.w0_holds && self.compressed_w0_holds && self.q_holds
    }
}

/// Checks the three operator orderings that drive the bound chain.
pub fn verify_operator_orderings(ctx: &AveragingContext) -> Result<OrderingReport> {
    let w0 = ctx.family()?.w0.clone();
    verify_operator_orderings_with(ctx, &w0)
}

/// As [`verify_operator_orderings`] with `W_0` supplied by the caller, so that
/// a corrupted operator can be checked; `Qop` is rebuilt as `P (I - W_0) P`.
pub fn verify_operator_orderings_with(ctx: &AveragingContext, w0: &HermitianOperator) -> Result<OrderingReport> {
    let family = ctx.family()?;
    let e = &ctx.ensemble;
    let n = ctx.n as f64;
    let tol = ctx.settings.tol_psd;
    let p = family.p.operator();
    let pm = p.matrix();

    let rho_n = tensor_power(e.average().matrix(), ctx.n, ctx.settings.max_dim)?;
    let upper = HermitianOperator::from_hermitian(rho_n.scale((n * (e.entropy() - e.chi() + ctx.delta)).exp2()));
    let w0_margin = psd_margin(w0, &upper)?;

    let shrink = (-n * ctx.chi_eff()).exp2();
    let compressed = HermitianOperator::from_hermitian((&(pm * w0.matrix()) * pm).hermitize());
    let compressed_w0_margin = psd_margin(&compressed, &p.scale(shrink))?;

    let q = p.sub(&compressed);
    let q_margin = psd_margin(&p.scale(1.0 - shrink), &q)?;

    Ok(OrderingReport {
        w0_margin,
        compressed_w0_margin,
        q_margin,
        w0_holds: w0_margin >= -tol,
        compressed_w0_holds: compressed_w0_margin >= -tol,
        q_holds: q_margin >= -tol,
    })
}

/// Everything the bound chain says about one `(n, delta, N)` instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// `f_0..f_zmax`.
    pub f: Vec<f64>,
    pub a_exact: f64,
    pub a_expansion: Option<f64>,
    /// Certified lower bound on the success probability.
    pub a_lower: f64,
    /// `ln Y(2^(chi - 2 delta), 2^R, n)`; absent when `chi - 2 delta < 0`.
    pub log_y: Option<f64>,
    pub chi_eff: f64,
    pub rate: f64,
    pub verdict: Verdict,
    pub vacuous: bool,
    pub avg_err_exact: Option<f64>,
    pub avg_err_mc: Option<McEstimate>,
}

impl BoundReport {
    /// Builds the report from an exact context. The exact average error is
    /// included when it fits the super-operator budget.
    pub fn compute(ctx: &AveragingContext, code_size: usize, zmax: usize) -> Result<Self> {
        let bound = sequential_success_lower_bound(ctx, code_size)?;
        let rate = (code_size as f64).log2() / ctx.n as f64;
        let chi_eff = ctx.chi_eff();
        let log_y = if chi_eff >= 0.0 {
            Some(log_y_threshold(chi_eff.exp2(), rate.exp2(), ctx.n)?)
        } else {
            None
        };
        let avg_err_exact = match average_error_exact(ctx, code_size) {
            Ok(v) => Some(v),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            f: f_sequence(ctx, zmax)?,
            a_exact: bound.a_exact,
            a_expansion: bound.a_expansion,
            a_lower: bound.certified,
            log_y,
            chi_eff,
            rate,
            verdict: rate_verdict(ctx.ensemble.chi(), ctx.delta, rate),
            vacuous: bound.vacuous,
            avg_err_exact,
            avg_err_mc: None,
        })
    }
}

/// `f_0 = sum_j p_j Tr[P_j rho_j P_j P]` without dense matrices. Exact mode
/// enumerates `A^n`; Monte Carlo samples codewords.
pub fn f0_direct(e: &Ensemble, n: usize, delta: f64, mode: MassMode, settings: &Settings) -> Result<MassEstimate> {
    settings.check_dim(checked_pow(e.dim(), n))?;
    let average = average_typical_projector(e, n, delta, settings)?;
    let term = |word: &[usize]| -> Result<f64> {
        let cond = conditional_typical_projector(e, word, delta, settings)?;
        let eigs: Vec<&[f64]> = word
            .iter()
            .map(|&j| e.state_spectrum(j).eigenvalues.as_slice())
            .collect();
        let (_, values) = crate::typicality::product_spectrum(&eigs);
        let mut acc = 0.0;
        for &k in cond.index_set() {
            let mut v = cond.structured().basis_vector(k);
            average.structured().apply(&mut v);
            acc += values[k] * v.iter().map(|x| x.norm_sqr()).sum::<f64>();
        }
        Ok(acc)
    };
    match mode {
        MassMode::Exact => {
            let count = checked_pow(e.alphabet_size(), n);
            settings.check_enumeration("f0 enumeration", count)?;
            let terms: Vec<f64> = (0..count as usize)
                .into_par_iter()
                .map(|flat| {
                    let word = multi_index(flat, e.alphabet_size(), n);
                    let prob: f64 = word.iter().map(|&j| e.probs()[j]).product();
                    if prob == 0.0 {
                        Ok(0.0)
                    } else {
                        Ok(prob * term(&word)?)
                    }
                })
                .collect::<Result<_>>()?;
            Ok(MassEstimate {
                value: terms.iter().sum(),
                stderr: None,
            })
        }
        MassMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidArgument("Monte Carlo needs at least 2 samples".into()));
            }
            let streams = SeedStream::new(seed);
            let terms: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let word = crate::coding::sample_codeword(e.probs(), n, &mut streams.rng(i as u64));
                    term(&word)
                })
                .collect::<Result<_>>()?;
            let (value, stderr) = mean_and_stderr(&terms);
            Ok(MassEstimate {
                value,
                stderr: Some(stderr),
            })
        }
    }
}

/// Measured smallness parameters at one block length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub n: usize,
    /// `Tr[rho^(x)n (I - P)]`.
    pub avg_atypical_mass: f64,
    /// `sum_j p_j Tr[rho_j (I - P_j)]`.
    pub conditional_atypical_mass: f64,
    /// `1 - f_0`.
    pub f0_gap: f64,
}

impl EpsilonReport {
    pub fn compute(e: &Ensemble, n: usize, delta: f64, mode: MassMode, settings: &Settings) -> Result<Self> {
        Ok(Self {
            n,
            avg_atypical_mass: atypical_mass_average(e, n, delta, settings)?,
            conditional_atypical_mass: atypical_mass_conditional(e, n, delta, mode, settings)?.value,
            f0_gap: 1.0 - f0_direct(e, n, delta, mode, settings)?.value,
        })
    }

    /// Largest of the three parameters.
    pub fn max_epsilon(&self) -> f64 {
        self.avg_atypical_mass
            .max(self.conditional_atypical_mass)
            .max(self.f0_gap)
    }
}

/// First tested block length whose largest smallness parameter is at most `eps`.
pub fn first_n_below(reports: &[EpsilonReport], eps: f64) -> Option<usize> {
    reports.iter().find(|r| r.max_epsilon() <= eps).map(|r| r.n)
}
