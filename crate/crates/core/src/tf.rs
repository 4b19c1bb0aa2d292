//! Continuous-time SISO transfer functions in monic-denominator normal form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{PolyError, Polynomial, RootSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TfError {
    #[error("improper transfer function: numerator degree {num_degree} >= denominator degree {den_degree}")]
    ImproperTransferFunction {
        num_degree: usize,
        den_degree: usize,
    },
    #[error("numerator is the zero polynomial")]
    ZeroNumerator,
    #[error("denominator must have degree >= 1")]
    ConstantDenominator,
    #[error("denominator vanishes at s = 0")]
    PoleAtOrigin,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `H(s) = num(s) / den(s)` with `den` monic and `deg(num) < deg(den)`.
///
/// The numerator leading coefficient carries the gain. No pole-zero
/// cancellation is ever performed; see [`TransferFunction::near_cancellations`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTransferFunction")]
pub struct TransferFunction {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Deserialize)]
struct RawTransferFunction {
    num: Polynomial,
    den: Polynomial,
}

impl TryFrom<RawTransferFunction> for TransferFunction {
    type Error = TfError;

    fn try_from(raw: RawTransferFunction) -> Result<Self, Self::Error> {
        TransferFunction::normalize(raw.num, raw.den)
    }
}

impl TransferFunction {
    /// Divides both polynomials by `den.leading()`.
    pub fn normalize(num: Polynomial, den: Polynomial) -> Result<Self, TfError> {
        if num.is_zero() {
            return Err(TfError::ZeroNumerator);
        }
        if den.degree() == 0 {
            return Err(TfError::ConstantDenominator);
        }
        if num.degree() >= den.degree() {
            return Err(TfError::ImproperTransferFunction {
                num_degree: num.degree(),
                den_degree: den.degree(),
            });
        }
        let lead = den.leading();
        if lead == 1.0 {
            return Ok(TransferFunction { num, den });
        }
        let divide = |p: Polynomial| Polynomial::new(p.coeffs().iter().map(|c| c / lead).collect());
        Ok(TransferFunction {
            num: divide(num)?,
            den: divide(den)?,
        })
    }

    pub fn from_coeffs(num: Vec<f64>, den: Vec<f64>) -> Result<Self, TfError> {
        Self::normalize(Polynomial::new(num)?, Polynomial::new(den)?)
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn order(&self) -> usize {
        self.den.degree()
    }

    pub fn relative_degree(&self) -> usize {
        self.den.degree() - self.num.degree()
    }

    /// Numerator leading coefficient.
    pub fn gain(&self) -> f64 {
        self.num.leading()
    }

    /// DC gain `num(0) / den(0)`; fails when `den(0)` is zero or subnormal.
    pub fn eval_at_zero(&self) -> Result<f64, TfError> {
        let d = self.den.constant_term();
        if d.abs() < f64::MIN_POSITIVE {
            return Err(TfError::PoleAtOrigin);
        }
        Ok(self.num.constant_term() / d)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    pub fn poles(&self, tol_im: f64, tol_sep: f64) -> Result<RootSet, TfError> {
        Ok(self.den.real_roots(tol_im, tol_sep)?)
    }

    pub fn zeros(&self, tol_im: f64, tol_sep: f64) -> Result<RootSet, TfError> {
        Ok(self.num.real_roots(tol_im, tol_sep)?)
    }

    /// Zero/pole pairs closer than `tol_sep * (1 + |zero|)`.
    pub fn near_cancellations(
        &self,
        tol_im: f64,
        tol_sep: f64,
    ) -> Result<Vec<(Complex64, Complex64)>, TfError> {
        if self.num.degree() == 0 {
            return Ok(Vec::new());
        }
        let zeros = self.zeros(tol_im, tol_sep)?;
        let poles = self.poles(tol_im, tol_sep)?;
        let mut out = Vec::new();
        for z in &zeros.roots {
            for p in &poles.roots {
                if (z.value() - p.value()).norm() <= tol_sep * (1.0 + z.value().norm()) {
                    out.push((z.value(), p.value()));
                }
            }
        }
        Ok(out)
    }

    /// Largest coefficientwise relative difference between two transfer
    /// functions (both already normalized).
    pub fn coefficient_residual(&self, other: &TransferFunction) -> f64 {
        coefficient_residual(&self.num, &other.num).max(coefficient_residual(&self.den, &other.den))
    }

    pub fn approx_eq(&self, other: &TransferFunction, rel_tol: f64) -> bool {
        self.coefficient_residual(other) <= rel_tol
    }
}

/// `max_k |a_k - b_k| / max(|a_k|, |b_k|, eps * scale)` with the two
/// coefficient vectors aligned by power of `s`.
pub fn coefficient_residual(a: &Polynomial, b: &Polynomial) -> f64 {
    let (a, b) = (a.coeffs(), b.coeffs());
    let n = a.len().max(b.len());
    let scale = a.iter().chain(b).fold(0.0_f64, |m, c| m.max(c.abs()));
    let floor = f64::EPSILON * scale;
    let at = |v: &[f64], k: usize| {
        let offset = n - v.len();
        if k < offset {
            0.0
        } else {
            v[k - offset]
        }
    };
    (0..n)
        .map(|k| {
            let (x, y) = (at(a, k), at(b, k));
            let denom = x.abs().max(y.abs()).max(floor);
            if denom == 0.0 {
                0.0
            } else {
                (x - y).abs() / denom
            }
        })
        .fold(0.0, f64::max)
}
