//! Sources, channels and Holevo information.
//!
//! An [`Ensemble`] pairs letter probabilities `p_j` with the channel-output states
//! `rho_j`. All derived quantities (average state, spectra, entropies, chi) are
//! computed once at construction. Entropies are in bits.

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::operators::{
    c64, spectral_decompose, ComplexMatrix, DensityMatrix, HermitianOperator, SpectralDecomposition,
};
use crate::settings::EIGENVALUE_FLOOR;
use crate::{Error, Result};

/// Probability-weighted family of output states.
#[derive(Debug, Clone)]
pub struct Ensemble {
    probs: Vec<f64>,
    states: Vec<DensityMatrix>,
    average: DensityMatrix,
    average_spectrum: SpectralDecomposition,
    state_spectra: Vec<SpectralDecomposition>,
    entropy: f64,
    state_entropies: Vec<f64>,
    chi: f64,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidEnsemble("empty alphabet".into()));
        }
        if probs.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} probabilities for {} states",
                probs.len(),
                states.len()
            )));
        }
        if probs.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::InvalidEnsemble("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidEnsemble(format!("probabilities sum to {total}")));
        }
        let dim = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }

        let mut avg = ComplexMatrix::zeros(dim);
        for (p, s) in probs.iter().zip(&states) {
            avg = &avg + &s.matrix().scale(*p);
        }
        let average = DensityMatrix::from_trusted(HermitianOperator::from_hermitian(avg));
        let average_spectrum = spectral_decompose(average.operator())?;
        let state_spectra = states
            .iter()
            .map(|s| spectral_decompose(s.operator()))
            .collect::<Result<Vec<_>>>()?;

        let entropy = entropy_of(&average_spectrum.eigenvalues);
        let state_entropies: Vec<f64> = state_spectra.iter().map(|s| entropy_of(&s.eigenvalues)).collect();
        let chi = entropy
            - probs
                .iter()
                .zip(&state_entropies)
                .map(|(p, s)| p * s)
                .sum::<f64>();
        if chi < -1e-9 || chi > entropy + 1e-9 {
            return Err(Error::InvariantViolation(format!(
                "chi = {chi} outside [0, S(rho) = {entropy}]"
            )));
        }

        Ok(Self {
            probs,
            states,
            average,
            average_spectrum,
            state_spectra,
            entropy,
            state_entropies,
            chi: chi.max(0.0),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    /// Dimension of a single carrier.
    pub fn dim(&self) -> usize {
        self.average.dim()
    }

    pub fn average(&self) -> &DensityMatrix {
        &self.average
    }

    pub fn average_spectrum(&self) -> &SpectralDecomposition {
        &self.average_spectrum
    }

    pub fn state_spectrum(&self, letter: usize) -> &SpectralDecomposition {
        &self.state_spectra[letter]
    }

    /// `S(rho)` of the average state, in bits.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn state_entropies(&self) -> &[f64] {
        &self.state_entropies
    }

    /// Holevo information `S(rho) - sum_j p_j S(rho_j)`, in bits.
    pub fn chi(&self) -> f64 {
        self.chi
    }
}

fn entropy_of(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > EIGENVALUE_FLOOR)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// `rho = sum_j p_j rho_j`.
pub fn average_state(e: &Ensemble) -> DensityMatrix {
    e.average.clone()
}

/// Von Neumann entropy in bits; eigenvalues at or below 1e-12 contribute nothing.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut eigenvalues = rho.operator().eigenvalues()?;
    eigenvalues.reverse();
    Ok(entropy_of(&eigenvalues))
}

pub fn holevo_chi(e: &Ensemble) -> f64 {
    e.chi
}

/// CPTP map given by Kraus operators `K_i` with `sum_i K_i^dagger K_i = I`.
#[derive(Debug, Clone)]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
}

impl Channel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let dim = first.dim();
        if let Some(bad) = kraus.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let mut sum = ComplexMatrix::zeros(dim);
        for k in &kraus {
            sum = &sum + &(&k.adjoint() * k);
        }
        let defect = (&sum - &ComplexMatrix::identity(dim)).frobenius_norm();
        if defect > 1e-9 {
            return Err(Error::InvalidChannel(format!(
                "Kraus completeness defect {defect:.3e}"
            )));
        }
        Ok(Self { kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Qubit depolarizing channel `rho -> (1 - lambda) rho + lambda I / 2`.
    pub fn depolarizing(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidChannel(format!(
                "depolarizing parameter {lambda} outside [0, 1]"
            )));
        }
        let [i, x, y, z] = pauli_matrices();
        let w0 = (1.0 - 0.75 * lambda).sqrt();
        let w = (0.25 * lambda).sqrt();
        Self::new(vec![i.scale(w0), x.scale(w), y.scale(w), z.scale(w)])
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].dim()
    }

    /// `sum_i K_i sigma K_i^dagger`.
    pub fn apply(&self, sigma: &DensityMatrix) -> Result<DensityMatrix> {
        if sigma.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: sigma.dim(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim());
        for k in &self.kraus {
            out = &out + &(&(k * sigma.matrix()) * &k.adjoint());
        }
        Ok(DensityMatrix::from_trusted(HermitianOperator::from_hermitian(out)))
    }
}

fn pauli_matrices() -> [ComplexMatrix; 4] {
    let re = |x: f64| c64::new(x, 0.0);
    let im = |x: f64| c64::new(0.0, x);
    let m = |a: c64, b: c64, c: c64, d: c64| ComplexMatrix::from_fn(2, |i, j| [[a, b], [c, d]][i][j]);
    [
        m(re(1.0), re(0.0), re(0.0), re(1.0)),
        m(re(0.0), re(1.0), re(1.0), re(0.0)),
        m(re(0.0), im(-1.0), im(1.0), re(0.0)),
        m(re(1.0), re(0.0), re(0.0), re(-1.0)),
    ]
}

/// Maps every state of `input` through `t`, keeping the probabilities.
pub fn apply_channel(t: &Channel, input: &Ensemble) -> Result<Ensemble> {
    let states = input
        .states()
        .iter()
        .map(|s| t.apply(s))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(input.probs().to_vec(), states)
}

/// Named ensembles usable from the command line and configuration files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// `{1/2, |0>; 1/2, cos(theta)|0> + sin(theta)|1>}`.
    TwoPureTheta { theta: f64 },
    /// `{1/2, |0>; 1/2, |1>}`.
    OrthogonalPair,
    /// Three real qubit states at 120 degrees on the Bloch sphere, uniform weights.
    UniformQubitTrine,
    /// `TwoPureTheta(theta)` sent through `depolarizing(lambda)`.
    DepolarizedPair { theta: f64, lambda: f64 },
}

impl Preset {
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let want = |count: usize| -> Result<()> {
            if params.len() == count {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "preset `{name}` takes {count} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        match name {
            "two-pure-theta" => {
                want(1)?;
                Ok(Self::TwoPureTheta { theta: params[0] })
            }
            "orthogonal-pair" => {
                want(0)?;
                Ok(Self::OrthogonalPair)
            }
            "uniform-qubit-trine" => {
                want(0)?;
                Ok(Self::UniformQubitTrine)
            }
            "depolarized-pair" => {
                want(2)?;
                Ok(Self::DepolarizedPair {
                    theta: params[0],
                    lambda: params[1],
                })
            }
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Parses `name` or `name(p1, p2, ...)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec.find('(') {
            None => Self::from_name(spec, &[]),
            Some(open) => {
                let inner = spec[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::InvalidArgument(format!("unbalanced parentheses in `{spec}`")))?;
                let params = inner
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidArgument(format!("bad preset parameter `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::from_name(spec[..open].trim(), &params)
            }
        }
    }

    pub fn build(&self) -> Result<Ensemble> {
        let re = |x: f64| c64::new(x, 0.0);
        let ket = |theta: f64| vec![re(theta.cos()), re(theta.sin())];
        match *self {
            Self::TwoPureTheta { theta } => Ensemble::new(
                vec![0.5, 0.5],
                vec![DensityMatrix::pure(&ket(0.0))?, DensityMatrix::pure(&ket(theta))?],
            ),
            Self::OrthogonalPair => Self::TwoPureTheta { theta: FRAC_PI_2 }.build(),
            Self::UniformQubitTrine => {
                let third = 1.0 / 3.0;
                let states = (0..3)
                    .map(|k| DensityMatrix::pure(&ket(2.0 * std::f64::consts::PI * k as f64 / 3.0)))
                    .collect::<Result<Vec<_>>>()?;
                Ensemble::new(vec![third; 3], states)
            }
            Self::DepolarizedPair { theta, lambda } => {
                apply_channel(&Channel::depolarizing(lambda)?, &Self::TwoPureTheta { theta }.build()?)
            }
        }
    }
}

/// Builds a named preset ensemble.
pub fn preset_ensemble(name: &str, params: &[f64]) -> Result<Ensemble> {
    Preset::from_name(name, params)?.build()
}

/// Current version of the ensemble file format.
pub const ENSEMBLE_FORMAT_VERSION: u32 = 1;

/// On-disk ensemble description.
///
/// ```json
/// { "version": 1, "dim": 2, "probs": [0.5, 0.5],
///   "states": [ [[[1,0],[0,0]], [[0,0],[0,0]]], ... ] }
/// ```
///
/// `states[j][row][col]` is the `[re, im]` pair of entry `(row, col)` of `rho_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    #[serde(default = "default_version")]
    pub version: u32,
    pub dim: usize,
    pub probs: Vec<f64>,
    pub states: Vec<Vec<Vec<[f64; 2]>>>,
}

fn default_version() -> u32 {
    ENSEMBLE_FORMAT_VERSION
}

impl EnsembleFile {
    pub fn from_ensemble(e: &Ensemble) -> Self {
        Self {
            version: ENSEMBLE_FORMAT_VERSION,
            dim: e.dim(),
            probs: e.probs().to_vec(),
            states: e
                .states()
                .iter()
                .map(|s| {
                    s.matrix()
                        .to_rows()
                        .into_iter()
                        .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_ensemble(&self, tol_herm: f64, tol_psd: f64) -> Result<Ensemble> {
        if self.version != ENSEMBLE_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", self.version)));
        }
        let states = self
            .states
            .iter()
            .map(|rows| {
                if rows.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        found: rows.len(),
                    });
                }
                let rows: Vec<Vec<c64>> = rows
                    .iter()
                    .map(|r| r.iter().map(|&[re, im]| c64::new(re, im)).collect())
                    .collect();
                let m = ComplexMatrix::from_rows(&rows)?;
                DensityMatrix::new(HermitianOperator::new(m, tol_herm)?, tol_psd)
            })
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(self.probs.clone(), states)
    }
}

pub fn load_ensemble(path: &Path, tol_herm: f64, tol_psd: f64) -> Result<Ensemble> {
    let text = fs::read_to_string(path)?;
    let file: EnsembleFile = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    file.to_ensemble(tol_herm, tol_psd)
}

pub fn save_ensemble(e: &Ensemble, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&EnsembleFile::from_ensemble(e))
        .map_err(|err| Error::Format(err.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}
