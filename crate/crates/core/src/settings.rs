//! Numerical tolerances and work budgets shared by every module.

use serde::{Deserialize, Serialize};

/// Eigenvalues at or below this value are treated as exact zeros: they carry no
/// entropy and never belong to a typical set.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Tolerances and budgets. Every knob lives here so that the CLI can override
/// any of them from one place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    /// Max `|H[a][b] - conj(H[b][a])|` accepted for a Hermitian operator.
    pub tol_herm: f64,
    /// Most negative eigenvalue accepted for a PSD operator.
    pub tol_psd: f64,
    /// Eigenvalues below `pinv_cutoff * lambda_max` are dropped by `pinv_sqrt`.
    pub pinv_cutoff: f64,
    /// Largest Hilbert-space dimension for dense operators.
    pub max_dim: usize,
    /// Largest number of items any exhaustive enumeration may visit.
    pub enumeration_budget: u64,
    /// Exact averaging contexts hold `|A|^n` dense operators of size `d^n`;
    /// `|A|^n * d^(2n)` may not exceed this.
    pub exact_budget: u64,
    /// Largest `|A|^n * (N - 1)` super-operator applications for the exact average error.
    pub phi_budget: u64,
    /// Dense PSD checks of the typicality sandwich are used up to this dimension;
    /// above it the check runs in the shared eigenbasis.
    pub dense_check_max_dim: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol_herm: 1e-10,
            tol_psd: 1e-9,
            pinv_cutoff: 1e-10,
            max_dim: 4096,
            enumeration_budget: 1_000_000,
            exact_budget: 1 << 18,
            phi_budget: 20_000,
            dense_check_max_dim: 1024,
        }
    }
}

impl Settings {
    pub(crate) fn check_dim(&self, dim: u128) -> crate::Result<usize> {
        if dim > self.max_dim as u128 {
            Err(crate::Error::DimensionOverflow {
                dim,
                max_dim: self.max_dim,
            })
        } else {
            Ok(dim as usize)
        }
    }

    pub(crate) fn check_enumeration(&self, what: &'static str, required: u128) -> crate::Result<()> {
        if required > self.enumeration_budget as u128 {
            Err(crate::Error::BudgetExceeded {
                what,
                required,
                budget: self.enumeration_budget as u128,
            })
        } else {
            Ok(())
        }
    }
}

/// `base^exp` without overflow.
pub(crate) fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}
