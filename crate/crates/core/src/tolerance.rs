use serde::{Deserialize, Serialize};

/// Numerical thresholds used by every checker and realization.
///
/// All values are relative to a natural scale; each report echoes the set
/// that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Root is real iff `|Im r| <= tol_im * (1 + |r|)`.
    pub tol_im: f64,
    /// Roots are coincident iff `|r_i - r_j| <= tol_sep * (1 + |r_i|)`.
    pub tol_sep: f64,
    /// Coefficientwise relative mismatch allowed when a realization is
    /// mapped back to its transfer function.
    pub tol_verify: f64,
    /// Deflation remainder bound, times `max|coeff|`.
    pub tol_deflate: f64,
    /// Root counts as zero iff `|z| <= tol_zero * (1 + max|coeff|)`.
    pub tol_zero: f64,
    /// Numerator counts as monic iff `|lead - 1| <= tol_monic`.
    pub tol_monic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_im: 1e-9,
            tol_sep: 1e-7,
            tol_verify: 1e-8,
            tol_deflate: 1e-8,
            tol_zero: 1e-10,
            tol_monic: 1e-9,
        }
    }
}
