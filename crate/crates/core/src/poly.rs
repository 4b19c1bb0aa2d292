//! Real-coefficient univariate polynomials.
//!
//! Coefficients are stored in descending degree order, so `coeffs[0]` is the
//! leading coefficient. The zero polynomial is the single coefficient `0.0`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Remainder acceptance for [`Polynomial::deflate`], relative to the largest
/// coefficient magnitude.
pub const DEFAULT_DEFLATE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("polynomial has no coefficients")]
    Empty,
    #[error("coefficient {0} is not finite")]
    NonFinite(usize),
    #[error("operation is undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("{root} is not a root: remainder {remainder:e} exceeds {tolerance:e}")]
    NotARoot {
        root: f64,
        remainder: f64,
        tolerance: f64,
    },
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from descending coefficients, dropping leading zeros.
    pub fn new(coeffs: Vec<f64>) -> Result<Self, PolyError> {
        if coeffs.is_empty() {
            return Err(PolyError::Empty);
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(PolyError::NonFinite(i));
        }
        Ok(Self::from_finite(coeffs))
    }

    fn from_finite(mut coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0);
        match first {
            Some(i) => {
                coeffs.drain(..i);
            }
            None => coeffs = vec![0.0],
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_finite(vec![c])
    }

    /// `leading * prod(s - r)` expanded by repeated convolution.
    pub fn from_roots(roots: &[f64], leading: f64) -> Self {
        let mut coeffs = vec![leading];
        for &r in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k] += c;
                next[k + 1] -= c * r;
            }
            coeffs = next;
        }
        Self::from_finite(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[self.degree()]
    }

    /// Largest coefficient magnitude; the scale used by tolerance tests.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    /// Horner evaluation with error-free transformations: the result is as
    /// accurate as plain Horner in twice the working precision.
    pub fn eval_compensated(&self, s: f64) -> f64 {
        let mut p = 0.0;
        let mut err = 0.0;
        for &c in &self.coeffs {
            let (prod, e_prod) = two_prod(p, s);
            let (sum, e_sum) = two_sum(prod, c);
            p = sum;
            err = err * s + (e_prod + e_sum);
        }
        p + err
    }

    pub fn eval_derivative(&self, s: f64) -> f64 {
        self.eval_with_derivative(s).1
    }

    /// Value and first derivative at `s` in one Horner pass.
    fn eval_with_derivative(&self, s: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in &self.coeffs {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    }

    fn eval_complex_with_derivative(&self, s: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in &self.coeffs {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_finite(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_finite(out)
    }

    pub fn add(&self, other: &Polynomial) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (dst, c) in out[n - self.coeffs.len()..].iter_mut().zip(&self.coeffs) {
            *dst += c;
        }
        for (dst, c) in out[n - other.coeffs.len()..].iter_mut().zip(&other.coeffs) {
            *dst += c;
        }
        Self::from_finite(out)
    }

    /// Divides out `(s - r)` using [`DEFAULT_DEFLATE_TOL`].
    pub fn deflate(&self, r: f64) -> Result<Deflation, PolyError> {
        self.deflate_with_tol(r, DEFAULT_DEFLATE_TOL)
    }

    /// Synthetic division by `(s - r)`. Fails with [`PolyError::NotARoot`] when
    /// the remainder exceeds `tol * max|coeff|`.
    pub fn deflate_with_tol(&self, r: f64, tol: f64) -> Result<Deflation, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let tolerance = tol * self.max_abs_coeff();
        if self.degree() == 0 {
            return Err(PolyError::NotARoot {
                root: r,
                remainder: self.coeffs[0],
                tolerance,
            });
        }
        let mut quotient = Vec::with_capacity(self.degree());
        let mut acc = 0.0;
        for &c in &self.coeffs[..self.degree()] {
            acc = acc * r + c;
            quotient.push(acc);
        }
        let remainder = acc * r + self.constant_term();
        if remainder.abs() > tolerance {
            return Err(PolyError::NotARoot {
                root: r,
                remainder,
                tolerance,
            });
        }
        Ok(Deflation {
            quotient: Self::from_finite(quotient),
            remainder,
        })
    }

    /// All complex roots, with multiplicity.
    ///
    /// Degree one and two use closed forms; higher degrees take the
    /// eigenvalues of the balanced companion matrix followed by a guarded
    /// Newton polish against the original coefficients.
    pub fn roots(&self) -> Result<Vec<Complex64>, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        // exact roots at the origin
        let zeros_at_origin = self.coeffs.iter().rev().take_while(|&&c| c == 0.0).count();
        let reduced = Polynomial {
            coeffs: self.coeffs[..self.coeffs.len() - zeros_at_origin].to_vec(),
        };
        let mut roots = match reduced.degree() {
            0 => Vec::new(),
            1 => vec![Complex64::new(-reduced.coeffs[1] / reduced.coeffs[0], 0.0)],
            2 => reduced.polish(quadratic_roots(
                reduced.coeffs[0],
                reduced.coeffs[1],
                reduced.coeffs[2],
            )),
            _ => reduced.polish(companion_eigenvalues(&reduced.coeffs)),
        };
        roots.extend(std::iter::repeat_n(
            Complex64::new(0.0, 0.0),
            zeros_at_origin,
        ));
        sort_descending(&mut roots);
        Ok(roots)
    }

    /// Roots classified as real or complex, sorted descending by real part.
    ///
    /// A root is real iff `|Im r| <= tol_im * (1 + |r|)`; two roots are
    /// coincident iff `|r_i - r_j| <= tol_sep * (1 + |r_i|)`.
    pub fn real_roots(&self, tol_im: f64, tol_sep: f64) -> Result<RootSet, PolyError> {
        let values = self.roots()?;
        let roots: Vec<Root> = values
            .iter()
            .map(|z| Root {
                re: z.re,
                im: z.im,
                is_real: z.im.abs() <= tol_im * (1.0 + z.norm()),
            })
            .collect();
        let mut coincident = Vec::new();
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                if (values[i] - values[j]).norm() <= tol_sep * (1.0 + values[i].norm()) {
                    coincident.push((i, j));
                }
            }
        }
        Ok(RootSet {
            roots,
            tol_im,
            tol_sep,
            coincident,
        })
    }

    fn polish(&self, mut roots: Vec<Complex64>) -> Vec<Complex64> {
        let original = roots.clone();
        for i in 0..roots.len() {
            let z = original[i];
            if z.im < 0.0 {
                continue;
            }
            // a step may not move the root more than half way to its neighbour
            let gap = original
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, w)| (z - w).norm())
                .fold(f64::INFINITY, f64::min);
            let limit = 0.5 * gap;
            let polished = if z.im == 0.0 {
                Complex64::new(self.newton_real(z.re, limit), 0.0)
            } else {
                self.newton_complex(z, limit)
            };
            roots[i] = polished;
            if z.im > 0.0 {
                if let Some(k) = (0..original.len()).find(|&k| original[k] == z.conj() && k != i) {
                    roots[k] = polished.conj();
                }
            }
        }
        roots
    }

    fn newton_real(&self, x0: f64, limit: f64) -> f64 {
        let mut x = x0;
        let mut px = self.eval_compensated(x).abs();
        for _ in 0..8 {
            let p = self.eval_compensated(x);
            let dp = self.eval_with_derivative(x).1;
            if p == 0.0 || dp == 0.0 {
                break;
            }
            let next = x - p / dp;
            let pn = self.eval_compensated(next).abs();
            if !next.is_finite() || (next - x0).abs() > limit || pn >= px {
                break;
            }
            let step = (next - x).abs();
            x = next;
            px = pn;
            if step <= 4.0 * f64::EPSILON * x.abs() {
                break;
            }
        }
        x
    }

    fn newton_complex(&self, z0: Complex64, limit: f64) -> Complex64 {
        let mut z = z0;
        let mut pz = self.eval_complex(z).norm();
        for _ in 0..8 {
            let (p, dp) = self.eval_complex_with_derivative(z);
            if p.norm() == 0.0 || dp.norm() == 0.0 {
                break;
            }
            let next = z - p / dp;
            let pn = self.eval_complex(next).norm();
            if !next.is_finite() || (next - z0).norm() > limit || pn >= pz {
                break;
            }
            let step = (next - z).norm();
            z = next;
            pz = pn;
            if step <= 4.0 * f64::EPSILON * z.norm() {
                break;
            }
        }
        z
    }
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = PolyError;

    fn try_from(coeffs: Vec<f64>) -> Result<Self, Self::Error> {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({:?})", self.coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let deg = self.degree();
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 && deg > 0 {
                continue;
            }
            let power = deg - k;
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let mag = c.abs();
            match power {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{mag} s")?,
                _ => write!(f, "{mag} s^{power}")?,
            }
        }
        Ok(())
    }
}

/// Result of dividing a polynomial by `(s - r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Deflation {
    pub quotient: Polynomial,
    pub remainder: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
    pub is_real: bool,
}

impl Root {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub tol_im: f64,
    pub tol_sep: f64,
    /// Index pairs (into `roots`) closer than the separation tolerance.
    pub coincident: Vec<(usize, usize)>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn all_real(&self) -> bool {
        self.roots.iter().all(|r| r.is_real)
    }

    pub fn is_simple(&self) -> bool {
        self.coincident.is_empty()
    }

    /// Real parts of the roots classified as real, descending.
    pub fn reals(&self) -> Vec<f64> {
        self.roots
            .iter()
            .filter(|r| r.is_real)
            .map(|r| r.re)
            .collect()
    }

    /// Number of roots coincident with root `i` (itself included).
    pub fn multiplicity(&self, i: usize) -> usize {
        1 + self
            .coincident
            .iter()
            .filter(|&&(a, b)| a == i || b == i)
            .count()
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    let disc = b * b - 4.0 * a * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return vec![Complex64::new(0.0, 0.0); 2];
        }
        vec![Complex64::new(q / a, 0.0), Complex64::new(c / q, 0.0)]
    } else {
        let re = -b / (2.0 * a);
        let im = (-disc).sqrt() / (2.0 * a).abs();
        vec![Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

fn companion_eigenvalues(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -coeffs[j + 1] / lead;
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    balance(&mut m);
    let mut eig: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    // pair conjugates exactly
    for z in eig.iter_mut() {
        if z.im != 0.0 && z.im.abs() <= f64::EPSILON * z.re.abs() {
            z.im = 0.0;
        }
    }
    eig
}

/// Parlett-Reinsch diagonal balancing with radix 2 (exact in floating point).
fn balance(m: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * total {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn sort_descending(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}
