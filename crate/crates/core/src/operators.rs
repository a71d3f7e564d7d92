//! Dense complex operator algebra.
//!
//! Everything downstream is expressed in terms of four wrappers around a dense
//! complex matrix:
//!
//! - [`ComplexMatrix`]: any square matrix with finite entries,
//! - [`HermitianOperator`]: Hermitian within a tolerance (and stored exactly Hermitian),
//! - [`DensityMatrix`]: PSD with unit trace,
//! - [`Projector`]: idempotent Hermitian operator with a known rank.
//!
//! Tensor products follow the Kronecker convention: the left factor is the slow
//! index, so basis state `|a b>` sits at position `a * dim(B) + b`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use faer::{Mat, MatRef, Side};

use crate::settings::checked_pow;
use crate::{Error, Result};

pub use faer::c64;

/// Square complex matrix with finite entries.
#[derive(Clone)]
pub struct ComplexMatrix {
    data: Mat<c64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexMatrix")
            .field("dim", &self.dim())
            .field("rows", &self.to_rows())
            .finish()
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: Mat::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Self {
            data: Mat::from_fn(dim, dim, f),
        }
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                c64::new(values[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    /// Builds a matrix from row-major rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: &[Vec<c64>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
        }
        let m = Self::from_fn(dim, |i, j| rows[i][j]);
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    /// `|v><v|`.
    pub fn outer(v: &[c64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub(crate) fn from_mat(data: Mat<c64>) -> Self {
        debug_assert_eq!(data.nrows(), data.ncols());
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.data[(row, col)]
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.data.as_ref()
    }

    pub fn to_rows(&self) -> Vec<Vec<c64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<c64> {
        (0..self.dim()).map(|i| self.get(i, j)).collect()
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint().to_owned(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_fn(self.dim(), |i, j| self.get(i, j) * factor)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm_l2()
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim()).all(|i| (0..self.dim()).all(|j| self.get(i, j).is_finite()))
    }

    /// `max |M[a][b] - conj(M[b][a])|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `Tr[self * other]`.
    pub fn trace_product(&self, other: &ComplexMatrix) -> c64 {
        let d = self.dim();
        let mut acc = c64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.get(i, k) * other.get(k, i);
            }
        }
        acc
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|k| self.get(i, k) * v[k]).sum())
            .collect()
    }

    /// `(self + self^dagger) / 2`.
    pub(crate) fn hermitize(&self) -> Self {
        Self::from_fn(self.dim(), |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    pub(crate) fn check_same_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        } else {
            Ok(())
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data * &rhs.data,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data + &rhs.data,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            data: &self.data - &rhs.data,
        }
    }
}

/// Hermitian operator. The stored matrix is exactly Hermitian: inputs within
/// tolerance are symmetrized on construction.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    base: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix, tol_herm: f64) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > tol_herm {
            return Err(Error::NonHermitian {
                deviation,
                tol: tol_herm,
            });
        }
        Ok(Self {
            base: matrix.hermitize(),
        })
    }

    /// Symmetrizes without checking. Used for results that are Hermitian by
    /// construction (`A^dagger A`, `P X P` with Hermitian `X`, sums of those).
    pub(crate) fn from_hermitian(matrix: ComplexMatrix) -> Self {
        Self {
            base: matrix.hermitize(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            base: ComplexMatrix::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            base: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.base
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn trace(&self) -> f64 {
        self.base.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.dim() == 0 {
            return Ok(Vec::new());
        }
        self.base
            .data
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::Eigendecomposition)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.last().copied().unwrap_or(0.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            base: self.base.scale(factor),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> Self {
        Self {
            base: &self.base + &other.base,
        }
    }

    pub fn sub(&self, other: &HermitianOperator) -> Self {
        Self {
            base: &self.base - &other.base,
        }
    }

    /// `Tr[self * other]`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &HermitianOperator) -> f64 {
        self.base.trace_product(&other.base).re
    }
}

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    base: HermitianOperator,
}

impl DensityMatrix {
    /// Validates trace (within 1e-9) and positivity (within `tol_psd`).
    pub fn new(op: HermitianOperator, tol_psd: f64) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > 1e-9 {
            return Err(Error::BadTrace { trace });
        }
        let min_eigenvalue = op.min_eigenvalue()?;
        if min_eigenvalue < -tol_psd {
            return Err(Error::NotPsd {
                min_eigenvalue,
                tol: tol_psd,
            });
        }
        Ok(Self { base: op })
    }

    pub(crate) fn from_trusted(op: HermitianOperator) -> Self {
        Self { base: op }
    }

    /// `|psi><psi|` for the normalized `psi`.
    pub fn pure(psi: &[c64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument("state vector has zero norm".into()));
        }
        let normalized: Vec<c64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            base: HermitianOperator::from_hermitian(ComplexMatrix::outer(&normalized)),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            base: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.base
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.base.matrix()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }
}

/// Orthogonal projector with its rank.
#[derive(Debug, Clone)]
pub struct Projector {
    base: HermitianOperator,
    rank: usize,
}

impl Projector {
    /// Validates `||P^2 - P||_F <= 1e-8` and that the spectrum sits within 1e-8 of {0, 1}.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let square = op.matrix() * op.matrix();
        let defect = (&square - op.matrix()).frobenius_norm();
        if defect > 1e-8 {
            return Err(Error::NotProjector { defect });
        }
        let eigenvalues = op.eigenvalues()?;
        let spectral_defect = eigenvalues
            .iter()
            .map(|&l| l.abs().min((l - 1.0).abs()))
            .fold(0.0, f64::max);
        if spectral_defect > 1e-8 {
            return Err(Error::NotProjector {
                defect: spectral_defect,
            });
        }
        let rank = op.trace().round().max(0.0) as usize;
        Ok(Self { base: op, rank })
    }

    pub(crate) fn from_trusted(op: HermitianOperator, rank: usize) -> Self {
        Self { base: op, rank }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            base: HermitianOperator::identity(dim),
            rank: dim,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            base: HermitianOperator::zeros(dim),
            rank: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.base
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.base.matrix()
    }

    /// `I - P`.
    pub fn complement(&self) -> Projector {
        let dim = self.dim();
        Projector {
            base: HermitianOperator::identity(dim).sub(&self.base),
            rank: dim - self.rank,
        }
    }
}

/// Eigenvalues (descending) with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector `a` as a column vector.
    pub fn vector(&self, a: usize) -> Vec<c64> {
        self.eigenvectors.column(a)
    }

    /// `sum_a lambda_a v_a v_a^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_reconstruct(|l| l)
    }

    /// `sum_a f(lambda_a) v_a v_a^dagger`.
    pub fn map_reconstruct(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.dim();
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(d, |i, a| v.get(i, a) * f(self.eigenvalues[a]));
        &scaled * &v.adjoint()
    }
}

/// Spectral decomposition with eigenvalues sorted in descending order.
pub fn spectral_decompose(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let d = h.dim();
    if d == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0),
        });
    }
    let evd = h
        .matrix()
        .data
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigendecomposition)?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    // faer sorts ascending; flip to descending.
    let eigenvalues = (0..d).rev().map(|a| values[a].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(d, |i, a| vectors[(i, d - 1 - a)]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Kronecker product `a (x) b`, refused when the result would exceed `max_dim`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix, max_dim: usize) -> Result<ComplexMatrix> {
    let dim = a.dim() as u128 * b.dim() as u128;
    if dim > max_dim as u128 {
        return Err(Error::DimensionOverflow { dim, max_dim });
    }
    let db = b.dim();
    Ok(ComplexMatrix::from_fn(dim as usize, |r, c| {
        a.get(r / db, c / db) * b.get(r % db, c % db)
    }))
}

/// `a (x) a (x) ... (x) a` with `n >= 1` factors.
pub fn tensor_power(a: &ComplexMatrix, n: usize, max_dim: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    let dim = checked_pow(a.dim(), n);
    if dim > max_dim as u128 {
        return Err(Error::DimensionOverflow { dim, max_dim });
    }
    let mut acc = a.clone();
    for _ in 1..n {
        acc = tensor(&acc, a, max_dim)?;
    }
    Ok(acc)
}

/// Kronecker product of a non-empty list of factors.
pub fn tensor_all(factors: &[&ComplexMatrix], max_dim: usize) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?;
    let dim = factors
        .iter()
        .fold(1u128, |acc, m| acc.saturating_mul(m.dim() as u128));
    if dim > max_dim as u128 {
        return Err(Error::DimensionOverflow { dim, max_dim });
    }
    let mut acc = (*first).clone();
    for m in rest {
        acc = tensor(&acc, m, max_dim)?;
    }
    Ok(acc)
}

/// Kronecker product of vectors.
pub fn tensor_vectors(factors: &[Vec<c64>]) -> Vec<c64> {
    let mut acc = vec![c64::new(1.0, 0.0)];
    for f in factors {
        let mut next = Vec::with_capacity(acc.len() * f.len());
        for a in &acc {
            for b in f {
                next.push(a * b);
            }
        }
        acc = next;
    }
    acc
}

/// Applies the single-site operator `op` to tensor factor `site` of a state on
/// `sites` copies of a `d`-dimensional space, in place.
pub fn apply_to_site(v: &mut [c64], d: usize, sites: usize, site: usize, op: &ComplexMatrix) {
    debug_assert_eq!(op.dim(), d);
    let stride = d.pow((sites - site - 1) as u32);
    let block = stride * d;
    let mut scratch = vec![c64::new(0.0, 0.0); d];
    for start in (0..v.len()).step_by(block) {
        for offset in 0..stride {
            let base = start + offset;
            for (a, slot) in scratch.iter_mut().enumerate() {
                *slot = (0..d).map(|b| op.get(a, b) * v[base + b * stride]).sum();
            }
            for (a, value) in scratch.iter().enumerate() {
                v[base + a * stride] = *value;
            }
        }
    }
}

/// True iff `A <= B`, i.e. the smallest eigenvalue of `B - A` is at least `-tol`.
pub fn psd_leq(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> bool {
    matches!(psd_margin(a, b), Ok(m) if m >= -tol)
}

/// Smallest eigenvalue of `B - A`.
pub fn psd_margin(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.matrix().check_same_dim(b.matrix())?;
    b.sub(a).min_eigenvalue()
}

/// Moore-Penrose inverse square root of a PSD operator: eigenvalues above
/// `rel_cutoff * lambda_max` are mapped to `lambda^(-1/2)`, the rest to zero.
pub fn pinv_sqrt(h: &HermitianOperator, rel_cutoff: f64, tol_psd: f64) -> Result<HermitianOperator> {
    let spectrum = spectral_decompose(h)?;
    let min_eigenvalue = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
    if min_eigenvalue < -tol_psd {
        return Err(Error::NotPsd {
            min_eigenvalue,
            tol: tol_psd,
        });
    }
    let threshold = rel_cutoff * spectrum.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    Ok(HermitianOperator::from_hermitian(spectrum.map_reconstruct(
        |l| {
            if l > threshold && l > 0.0 {
                l.powf(-0.5)
            } else {
                0.0
            }
        },
    )))
}

/// Projector onto the eigenvectors of `h` with eigenvalue above `rel_cutoff * lambda_max`.
pub fn support_projector(h: &HermitianOperator, rel_cutoff: f64) -> Result<Projector> {
    let spectrum = spectral_decompose(h)?;
    let threshold = rel_cutoff * spectrum.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let rank = spectrum
        .eigenvalues
        .iter()
        .filter(|&&l| l > threshold && l > 0.0)
        .count();
    let op = HermitianOperator::from_hermitian(spectrum.map_reconstruct(|l| {
        if l > threshold && l > 0.0 {
            1.0
        } else {
            0.0
        }
    }));
    Ok(Projector::from_trusted(op, rank))
}

/// `P theta P`.
pub fn bar_compress(theta: &HermitianOperator, p: &Projector) -> Result<HermitianOperator> {
    theta.matrix().check_same_dim(p.matrix())?;
    let pm = p.matrix();
    Ok(HermitianOperator::from_hermitian(&(pm * theta.matrix()) * pm))
}
