//! Typical projectors of the average state and of individual codeword states.
//!
//! Both kinds of projector are diagonal in a product eigenbasis, so membership
//! is decided by enumerating eigenvalue multi-indices. Window tests run in the
//! log2 domain on sums of per-site logs, inclusive on both ends. Zero
//! eigenvalues (at or below [`EIGENVALUE_FLOOR`]) are never typical.
//!
//! Multi-indices are flattened with site 0 as the slowest digit, matching the
//! Kronecker convention of [`crate::operators`].

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coding::sample_codeword;
use crate::ensembles::Ensemble;
use crate::operators::{
    apply_to_site, c64, psd_margin, tensor_power, tensor_vectors, ComplexMatrix, HermitianOperator, Projector,
    SpectralDecomposition,
};
use crate::settings::{checked_pow, Settings, EIGENVALUE_FLOOR};
use crate::{Error, Result};

/// Block length, slack and the source constants that fix both windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalWindow {
    pub n: usize,
    pub delta: f64,
    pub entropy_rate: f64,
    pub chi: f64,
}

impl TypicalWindow {
    pub fn new(n: usize, delta: f64, entropy_rate: f64, chi: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("block length must be at least 1".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            n,
            delta,
            entropy_rate,
            chi,
        })
    }

    pub fn for_ensemble(e: &Ensemble, n: usize, delta: f64) -> Result<Self> {
        Self::new(n, delta, e.entropy(), e.chi())
    }

    /// `[-n(S + delta), -n(S - delta)]` in log2 units.
    pub fn average_log_bounds(&self) -> (f64, f64) {
        let n = self.n as f64;
        (-n * (self.entropy_rate + self.delta), -n * (self.entropy_rate - self.delta))
    }

    /// `[-n(S - chi + delta), -n(S - chi - delta)]` in log2 units; independent of the codeword.
    pub fn conditional_log_bounds(&self) -> (f64, f64) {
        let n = self.n as f64;
        let base = self.entropy_rate - self.chi;
        (-n * (base + self.delta), -n * (base - self.delta))
    }
}

fn in_window(log_value: f64, (lo, hi): (f64, f64)) -> bool {
    log_value >= lo && log_value <= hi
}

fn site_log(eigenvalue: f64) -> f64 {
    if eigenvalue > EIGENVALUE_FLOOR {
        eigenvalue.log2()
    } else {
        f64::NEG_INFINITY
    }
}

fn site_value(eigenvalue: f64) -> f64 {
    if eigenvalue > EIGENVALUE_FLOOR {
        eigenvalue
    } else {
        0.0
    }
}

/// `(log2 product, product)` of per-site eigenvalues for every multi-index.
pub(crate) fn product_spectrum(sites: &[&[f64]]) -> (Vec<f64>, Vec<f64>) {
    let mut logs = vec![0.0];
    let mut values = vec![1.0];
    for eigs in sites {
        let mut next_logs = Vec::with_capacity(logs.len() * eigs.len());
        let mut next_values = Vec::with_capacity(values.len() * eigs.len());
        for (l, v) in logs.iter().zip(&values) {
            for &lambda in eigs.iter() {
                next_logs.push(l + site_log(lambda));
                next_values.push(v * site_value(lambda));
            }
        }
        logs = next_logs;
        values = next_values;
    }
    (logs, values)
}

/// Digits of a flattened multi-index, site 0 first.
pub fn multi_index(mut flat: usize, d: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in digits.iter_mut().rev() {
        *slot = flat % d;
        flat /= d;
    }
    digits
}

/// Projector `sum_{k in mask} |e_k><e_k|` where `|e_k>` is a product of per-site
/// basis vectors. Applies to vectors in `O(n d^(n+1))` without forming the
/// dense matrix.
#[derive(Debug, Clone)]
pub struct ProductProjector {
    site_dim: usize,
    bases: Vec<ComplexMatrix>,
    bases_adjoint: Vec<ComplexMatrix>,
    mask: Vec<bool>,
    rank: usize,
    // Explicit columns when the rank is small enough that `sum |e><e|v>` beats
    // two passes of site rotations.
    columns: Option<Vec<Vec<c64>>>,
}

impl ProductProjector {
    pub(crate) fn new(bases: Vec<ComplexMatrix>, mask: Vec<bool>) -> Self {
        let site_dim = bases[0].dim();
        let rank = mask.iter().filter(|&&m| m).count();
        let bases_adjoint = bases.iter().map(ComplexMatrix::adjoint).collect();
        let mut out = Self {
            site_dim,
            bases,
            bases_adjoint,
            mask,
            rank,
            columns: None,
        };
        let n = out.sites();
        if rank > 0 && rank < out.dim() && rank <= 2 * n * site_dim {
            let columns = (0..out.dim())
                .filter(|&k| out.mask[k])
                .map(|k| out.basis_vector(k))
                .collect();
            out.columns = Some(columns);
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn sites(&self) -> usize {
        self.bases.len()
    }

    pub fn contains(&self, flat: usize) -> bool {
        self.mask[flat]
    }

    /// Product basis vector for a flattened multi-index.
    pub fn basis_vector(&self, flat: usize) -> Vec<c64> {
        let digits = multi_index(flat, self.site_dim, self.sites());
        let factors: Vec<Vec<c64>> = digits
            .iter()
            .zip(&self.bases)
            .map(|(&k, b)| b.column(k))
            .collect();
        tensor_vectors(&factors)
    }

    /// `v <- P v`.
    pub fn apply(&self, v: &mut [c64]) {
        if self.rank == self.dim() {
            return;
        }
        if self.rank == 0 {
            v.fill(c64::new(0.0, 0.0));
            return;
        }
        if let Some(columns) = &self.columns {
            let coeffs: Vec<c64> = columns
                .iter()
                .map(|e| e.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum())
                .collect();
            v.fill(c64::new(0.0, 0.0));
            for (e, c) in columns.iter().zip(coeffs) {
                for (x, a) in v.iter_mut().zip(e) {
                    *x += a * c;
                }
            }
            return;
        }
        let (d, n) = (self.site_dim, self.sites());
        for (site, op) in self.bases_adjoint.iter().enumerate() {
            apply_to_site(v, d, n, site, op);
        }
        for (x, &keep) in v.iter_mut().zip(&self.mask) {
            if !keep {
                *x = c64::new(0.0, 0.0);
            }
        }
        for (site, op) in self.bases.iter().enumerate() {
            apply_to_site(v, d, n, site, op);
        }
    }

    /// `v <- (I - P) v`.
    pub fn apply_complement(&self, v: &mut [c64]) {
        let mut projected = v.to_vec();
        self.apply(&mut projected);
        for (x, p) in v.iter_mut().zip(projected) {
            *x -= p;
        }
    }

    /// Dense matrix, built as `U_L U_L^dagger` from the selected basis columns.
    pub fn to_dense(&self, settings: &Settings) -> Result<Projector> {
        let dim = settings.check_dim(self.dim() as u128)?;
        if self.rank == 0 {
            return Ok(Projector::zeros(dim));
        }
        let columns: Vec<Vec<c64>> = (0..dim)
            .filter(|&k| self.mask[k])
            .map(|k| self.basis_vector(k))
            .collect();
        let selected = Mat::<c64>::from_fn(dim, columns.len(), |i, c| columns[c][i]);
        let dense = &selected * selected.adjoint();
        Ok(Projector::from_trusted(
            HermitianOperator::from_hermitian(ComplexMatrix::from_mat(dense)),
            self.rank,
        ))
    }
}

/// Projector `P` onto the typical subspace of `rho^(x)n`.
#[derive(Debug, Clone)]
pub struct AverageTypicalProjector {
    pub window: TypicalWindow,
    pub site_eigs: SpectralDecomposition,
    index_set: Vec<usize>,
    eigenvalues: Vec<f64>,
    structured: ProductProjector,
}

impl AverageTypicalProjector {
    /// Projector onto an arbitrary set of average-eigenbasis multi-indices.
    /// Window membership is not checked; use it to build diagnostics and
    /// controlled violations.
    pub fn from_index_set(e: &Ensemble, window: TypicalWindow, mut index_set: Vec<usize>) -> Result<Self> {
        let site_eigs = e.average_spectrum().clone();
        let d = e.dim();
        let eigs: Vec<&[f64]> = vec![site_eigs.eigenvalues.as_slice(); window.n];
        let (_, eigenvalues) = product_spectrum(&eigs);
        index_set.sort_unstable();
        index_set.dedup();
        if let Some(&bad) = index_set.iter().find(|&&k| k >= eigenvalues.len()) {
            return Err(Error::InvalidArgument(format!("multi-index {bad} out of range")));
        }
        let mut mask = vec![false; eigenvalues.len()];
        for &k in &index_set {
            mask[k] = true;
        }
        let structured = ProductProjector::new(vec![site_eigs.eigenvectors.clone(); window.n], mask);
        debug_assert_eq!(structured.site_dim, d);
        Ok(Self {
            window,
            site_eigs,
            index_set,
            eigenvalues,
            structured,
        })
    }

    pub fn rank(&self) -> usize {
        self.index_set.len()
    }

    /// The window selected nothing: decoders built on it never declare.
    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    /// Flattened multi-indices in the typical set, ascending.
    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    /// Eigenvalues `q_l` of `rho^(x)n` for every flattened multi-index.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn structured(&self) -> &ProductProjector {
        &self.structured
    }

    /// `Tr[rho^(x)n P]`.
    pub fn typical_mass(&self) -> f64 {
        self.index_set.iter().map(|&k| self.eigenvalues[k]).sum()
    }

    /// `Tr[rho^(x)n (I - P)]`.
    pub fn atypical_mass(&self) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|&(k, _)| !self.structured.contains(k))
            .map(|(_, q)| q)
            .sum()
    }

    pub fn matrix(&self, settings: &Settings) -> Result<Projector> {
        self.structured.to_dense(settings)
    }

    /// Checks `2^(-n(S+delta)) P <= P rho^(x)n P <= 2^(-n(S-delta)) P`.
    ///
    /// Dense PSD checks are used up to `settings.dense_check_max_dim`; above that
    /// the check runs in the product eigenbasis, where both sides are diagonal.
    pub fn sandwich_check(&self, e: &Ensemble, settings: &Settings) -> Result<SandwichReport> {
        let (lo, hi) = self.window.average_log_bounds();
        let (c_lo, c_hi) = (lo.exp2(), hi.exp2());
        let dim = self.eigenvalues.len();
        let (lower_margin, upper_margin, dense) = if dim <= settings.dense_check_max_dim {
            let p = self.matrix(settings)?;
            let rho_n = tensor_power(e.average().matrix(), self.window.n, settings.max_dim)?;
            let pm = p.matrix();
            let sandwiched = HermitianOperator::from_hermitian(&(pm * &rho_n) * pm);
            let lower = psd_margin(&p.operator().scale(c_lo), &sandwiched)?;
            let upper = psd_margin(&sandwiched, &p.operator().scale(c_hi))?;
            (lower, upper, true)
        } else {
            let floor = if self.rank() < dim { 0.0 } else { f64::INFINITY };
            let lower = self
                .index_set
                .iter()
                .map(|&k| self.eigenvalues[k] - c_lo)
                .fold(floor, f64::min);
            let upper = self
                .index_set
                .iter()
                .map(|&k| c_hi - self.eigenvalues[k])
                .fold(floor, f64::min);
            (lower, upper, false)
        };
        Ok(SandwichReport {
            lower_margin,
            upper_margin,
            holds: lower_margin >= -settings.tol_psd && upper_margin >= -settings.tol_psd,
            dense,
        })
    }
}

/// Outcome of [`AverageTypicalProjector::sandwich_check`]: the smallest eigenvalue
/// of each difference operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub holds: bool,
    /// Whether dense PSD checks were used (otherwise the eigenbasis route).
    pub dense: bool,
}

/// Projector `P_j` onto the conditional typical subspace of `rho_j`, with its complement.
#[derive(Debug, Clone)]
pub struct ConditionalTypicalProjector {
    pub codeword: Vec<usize>,
    index_set: Vec<usize>,
    typical_mass: f64,
    atypical_mass: f64,
    structured: ProductProjector,
}

impl ConditionalTypicalProjector {
    pub fn rank(&self) -> usize {
        self.index_set.len()
    }

    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn structured(&self) -> &ProductProjector {
        &self.structured
    }

    /// `Tr[rho_j P_j]`.
    pub fn typical_mass(&self) -> f64 {
        self.typical_mass
    }

    /// `Tr[rho_j (I - P_j)]`.
    pub fn atypical_mass(&self) -> f64 {
        self.atypical_mass
    }

    pub fn matrix(&self, settings: &Settings) -> Result<Projector> {
        self.structured.to_dense(settings)
    }

    /// `Q_j = I - P_j`.
    pub fn complement(&self, settings: &Settings) -> Result<Projector> {
        Ok(self.matrix(settings)?.complement())
    }
}

pub fn average_typical_projector(
    e: &Ensemble,
    n: usize,
    delta: f64,
    settings: &Settings,
) -> Result<AverageTypicalProjector> {
    settings.check_dim(checked_pow(e.dim(), n))?;
    let window = TypicalWindow::for_ensemble(e, n, delta)?;
    let eigs: Vec<&[f64]> = vec![e.average_spectrum().eigenvalues.as_slice(); n];
    let (logs, _) = product_spectrum(&eigs);
    let bounds = window.average_log_bounds();
    let index_set = (0..logs.len()).filter(|&k| in_window(logs[k], bounds)).collect();
    AverageTypicalProjector::from_index_set(e, window, index_set)
}

fn check_codeword(e: &Ensemble, codeword: &[usize]) -> Result<()> {
    if codeword.is_empty() {
        return Err(Error::InvalidArgument("empty codeword".into()));
    }
    if let Some(&bad) = codeword.iter().find(|&&j| j >= e.alphabet_size()) {
        return Err(Error::InvalidArgument(format!(
            "letter {bad} outside alphabet of size {}",
            e.alphabet_size()
        )));
    }
    Ok(())
}

/// Conditional-typical masses without building a projector: `(Tr[rho_j P_j], Tr[rho_j (I - P_j)])`.
fn conditional_masses(e: &Ensemble, codeword: &[usize], bounds: (f64, f64)) -> (Vec<bool>, f64, f64) {
    let eigs: Vec<&[f64]> = codeword
        .iter()
        .map(|&j| e.state_spectrum(j).eigenvalues.as_slice())
        .collect();
    let (logs, values) = product_spectrum(&eigs);
    let mask: Vec<bool> = logs.iter().map(|&l| in_window(l, bounds)).collect();
    let (mut inside, mut outside) = (0.0, 0.0);
    for (keep, v) in mask.iter().zip(&values) {
        if *keep {
            inside += v;
        } else {
            outside += v;
        }
    }
    (mask, inside, outside)
}

pub fn conditional_typical_projector(
    e: &Ensemble,
    codeword: &[usize],
    delta: f64,
    settings: &Settings,
) -> Result<ConditionalTypicalProjector> {
    check_codeword(e, codeword)?;
    let n = codeword.len();
    settings.check_dim(checked_pow(e.dim(), n))?;
    let window = TypicalWindow::for_ensemble(e, n, delta)?;
    let (mask, typical_mass, atypical_mass) = conditional_masses(e, codeword, window.conditional_log_bounds());
    let index_set = (0..mask.len()).filter(|&k| mask[k]).collect();
    let bases = codeword
        .iter()
        .map(|&j| e.state_spectrum(j).eigenvectors.clone())
        .collect();
    Ok(ConditionalTypicalProjector {
        codeword: codeword.to_vec(),
        index_set,
        typical_mass,
        atypical_mass,
        structured: ProductProjector::new(bases, mask),
    })
}

/// `Tr[rho^(x)n (I - P)]` by eigenvalue enumeration.
pub fn atypical_mass_average(e: &Ensemble, n: usize, delta: f64, settings: &Settings) -> Result<f64> {
    settings.check_enumeration("average atypical mass", checked_pow(e.dim(), n))?;
    let window = TypicalWindow::for_ensemble(e, n, delta)?;
    let eigs: Vec<&[f64]> = vec![e.average_spectrum().eigenvalues.as_slice(); n];
    let (logs, values) = product_spectrum(&eigs);
    let bounds = window.average_log_bounds();
    Ok(logs
        .iter()
        .zip(&values)
        .filter(|(l, _)| !in_window(**l, bounds))
        .map(|(_, v)| v)
        .sum())
}

/// How to evaluate the codeword-averaged conditional atypical mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassMode {
    /// Enumerate every codeword in `A^n`.
    Exact,
    /// Average over `samples` codewords drawn from the product distribution.
    MonteCarlo { samples: usize, seed: u64 },
}

/// A mass value; `stderr` is present for Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassEstimate {
    pub value: f64,
    pub stderr: Option<f64>,
}

/// `sum_j p_j Tr[rho_j (I - P_j)]`.
pub fn atypical_mass_conditional(
    e: &Ensemble,
    n: usize,
    delta: f64,
    mode: MassMode,
    settings: &Settings,
) -> Result<MassEstimate> {
    let window = TypicalWindow::for_ensemble(e, n, delta)?;
    let bounds = window.conditional_log_bounds();
    settings.check_enumeration("codeword spectrum", checked_pow(e.dim(), n))?;
    match mode {
        MassMode::Exact => {
            let count = checked_pow(e.alphabet_size(), n);
            settings.check_enumeration("conditional atypical mass", count)?;
            let mut total = 0.0;
            for flat in 0..count as usize {
                let codeword = multi_index(flat, e.alphabet_size(), n);
                let p: f64 = codeword.iter().map(|&j| e.probs()[j]).product();
                if p == 0.0 {
                    continue;
                }
                total += p * conditional_masses(e, &codeword, bounds).2;
            }
            Ok(MassEstimate {
                value: total,
                stderr: None,
            })
        }
        MassMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidArgument("Monte Carlo needs at least 2 samples".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draws: Vec<f64> = (0..samples)
                .map(|_| {
                    let codeword = sample_codeword(e.probs(), n, &mut rng);
                    conditional_masses(e, &codeword, bounds).2
                })
                .collect();
            let (mean, stderr) = mean_and_stderr(&draws);
            Ok(MassEstimate {
                value: mean,
                stderr: Some(stderr),
            })
        }
    }
}

/// Sample mean and standard error (unbiased variance).
pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Builds the average typical projector and runs its sandwich check.
pub fn sandwich_check(e: &Ensemble, n: usize, delta: f64, settings: &Settings) -> Result<SandwichReport> {
    average_typical_projector(e, n, delta, settings)?.sandwich_check(e, settings)
}
