//! Random codebooks over the ensemble alphabet.

use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::Ensemble;
use crate::operators::{tensor_all, ComplexMatrix, DensityMatrix, HermitianOperator};
use crate::settings::{checked_pow, Settings};
use crate::{Error, Result};

/// An ordered list of `N` codewords of common length `n`. Serialized as a JSON
/// array of integer arrays. Message `u` (1-based in decoder outputs) is
/// `codewords()[u - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Codebook {
    codewords: Vec<Vec<usize>>,
}

impl Codebook {
    pub fn new(codewords: Vec<Vec<usize>>, alphabet_size: usize) -> Result<Self> {
        let n = match codewords.first() {
            Some(c) if !c.is_empty() => c.len(),
            Some(_) => return Err(Error::InvalidCodebook("codewords must be non-empty".into())),
            None => return Err(Error::InvalidCodebook("codebook must hold at least one codeword".into())),
        };
        for (i, c) in codewords.iter().enumerate() {
            if c.len() != n {
                return Err(Error::InvalidCodebook(format!(
                    "codeword {i} has length {}, expected {n}",
                    c.len()
                )));
            }
            if let Some(&bad) = c.iter().find(|&&j| j >= alphabet_size) {
                return Err(Error::InvalidCodebook(format!(
                    "codeword {i} uses letter {bad}, alphabet size is {alphabet_size}"
                )));
            }
        }
        Ok(Self { codewords })
    }

    /// Number of codewords `N`.
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Block length `n`.
    pub fn block_length(&self) -> usize {
        self.codewords[0].len()
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    pub fn codeword(&self, index: usize) -> &[usize] {
        &self.codewords[index]
    }

    /// Probability of drawing this codebook i.i.d. from `p^(x)n`.
    pub fn weight(&self, probs: &[f64]) -> CodeWeight {
        CodeWeight {
            log_prob: self.codewords.iter().flatten().map(|&j| probs[j].log2()).sum(),
        }
    }

    pub fn load(path: &Path, alphabet_size: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let raw: Vec<Vec<usize>> = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(raw, alphabet_size)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// `log2 P(C)`, summed over every letter of every codeword.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeWeight {
    pub log_prob: f64,
}

impl CodeWeight {
    pub fn prob(&self) -> f64 {
        self.log_prob.exp2()
    }
}

/// Draws one codeword of length `n` i.i.d. from `probs`.
///
/// # Panics
/// If `probs` has no positive entry (never the case for a validated ensemble).
pub fn sample_codeword<R: Rng + ?Sized>(probs: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let dist = WeightedIndex::new(probs).expect("validated probability vector");
    (0..n).map(|_| dist.sample(rng)).collect()
}

/// Draws `size` independent codewords.
pub fn sample_code<R: Rng + ?Sized>(e: &Ensemble, n: usize, size: usize, rng: &mut R) -> Result<Codebook> {
    if size == 0 || n == 0 {
        return Err(Error::InvalidArgument("code size and block length must be positive".into()));
    }
    let codewords = (0..size).map(|_| sample_codeword(e.probs(), n, rng)).collect();
    Codebook::new(codewords, e.alphabet_size())
}

/// Every codebook in `(A^n)^N` with its probability, in lexicographic order.
#[derive(Debug, Clone)]
pub struct CodeEnumeration {
    probs: Vec<f64>,
    alphabet_size: usize,
    n: usize,
    size: usize,
    next: usize,
    total: usize,
}

impl CodeEnumeration {
    pub fn total(&self) -> usize {
        self.total
    }
}

impl Iterator for CodeEnumeration {
    type Item = (Codebook, CodeWeight);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.total {
            return None;
        }
        let mut flat = self.next;
        self.next += 1;
        let mut letters = vec![0; self.n * self.size];
        for slot in letters.iter_mut().rev() {
            *slot = flat % self.alphabet_size;
            flat /= self.alphabet_size;
        }
        let codewords: Vec<Vec<usize>> = letters.chunks(self.n).map(<[usize]>::to_vec).collect();
        let code = Codebook { codewords };
        let w = code.weight(&self.probs);
        Some((code, w))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.total - self.next;
        (left, Some(left))
    }
}

/// Enumerates all codebooks of `size` codewords of length `n`, subject to the
/// enumeration budget.
pub fn enumerate_codes(e: &Ensemble, n: usize, size: usize, settings: &Settings) -> Result<CodeEnumeration> {
    if size == 0 || n == 0 {
        return Err(Error::InvalidArgument("code size and block length must be positive".into()));
    }
    let total = checked_pow(e.alphabet_size(), n.saturating_mul(size));
    settings.check_enumeration("code enumeration", total)?;
    Ok(CodeEnumeration {
        probs: e.probs().to_vec(),
        alphabet_size: e.alphabet_size(),
        n,
        size,
        next: 0,
        total: total as usize,
    })
}

/// `rho_j = rho_{j_1} (x) ... (x) rho_{j_n}`.
pub fn codeword_state(e: &Ensemble, codeword: &[usize], settings: &Settings) -> Result<DensityMatrix> {
    settings.check_dim(checked_pow(e.dim(), codeword.len()))?;
    let factors: Vec<&ComplexMatrix> = codeword.iter().map(|&j| e.states()[j].matrix()).collect();
    let m = tensor_all(&factors, settings.max_dim)?;
    Ok(DensityMatrix::from_trusted(HermitianOperator::from_hermitian(m)))
}

/// Independent, reproducible random streams keyed by a task index. The same
/// `(seed, task)` pair always yields the same sequence, regardless of how
/// tasks are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    pub seed: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn rng(&self, task: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(task);
        rng
    }
}
