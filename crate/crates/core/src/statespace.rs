//! State-space side: model matrices, characteristic polynomials, structural
//! checks and impulse-response simulation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expm::expm;
use crate::mammillary::MammillaryParams;
use crate::pkpd::PkPdParams;
use crate::poly::{Polynomial, Root};
use crate::tf::{TfError, TransferFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateSpaceError {
    #[error("dimension mismatch: A is {rows}x{cols}, B has {b} rows, C has {c} columns")]
    Dimensions {
        rows: usize,
        cols: usize,
        b: usize,
        c: usize,
    },
    #[error("symmetrization needs positive exchange rates (pair {0} has k_i1 / k_1i <= 0)")]
    NonPositiveRates(usize),
    #[error("invalid simulation grid: T = {t_end}, dt = {dt}")]
    BadGrid { t_end: f64, dt: f64 },
    #[error("matrix entries must be finite")]
    NonFinite,
}

/// Where a model came from; lets structure-aware routines use exact
/// closed forms instead of generic numerics.
#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Mammillary(MammillaryParams),
    PkPd(PkPdParams),
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    structure: Structure,
}

impl StateSpaceModel {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self, StateSpaceError> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.len() != n || n == 0 {
            return Err(StateSpaceError::Dimensions {
                rows: a.nrows(),
                cols: a.ncols(),
                b: b.len(),
                c: c.len(),
            });
        }
        if a.iter()
            .chain(b.iter())
            .chain(c.iter())
            .any(|v| !v.is_finite())
        {
            return Err(StateSpaceError::NonFinite);
        }
        Ok(StateSpaceModel {
            a,
            b,
            c,
            structure: Structure::General,
        })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Output row, stored as a column vector.
    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Infinity norm of `A` (max absolute row sum).
    pub fn a_norm_inf(&self) -> f64 {
        self.a
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

fn arrowhead(k10: f64, to_center: &[f64], from_center: &[f64]) -> DMatrix<f64> {
    let n = to_center.len() + 1;
    let mut a = DMatrix::zeros(n, n);
    a[(0, 0)] = -k10 - from_center.iter().sum::<f64>();
    for i in 1..n {
        a[(0, i)] = to_center[i - 1];
        a[(i, 0)] = from_center[i - 1];
        a[(i, i)] = -to_center[i - 1];
    }
    a
}

pub fn build_mammillary(p: &MammillaryParams) -> StateSpaceModel {
    let n = p.n();
    StateSpaceModel {
        a: arrowhead(p.k10(), p.k_to_center(), p.k_from_center()),
        b: unit(n, 0),
        c: unit(n, 0),
        structure: Structure::Mammillary(p.clone()),
    }
}

/// Four-state PK-PD model: a three-compartment mammillary block feeding an
/// effect-site state through `k1e/V1`. The effect-site gain does not enter
/// `A[0][0]`.
pub fn build_pkpd(p: &PkPdParams) -> StateSpaceModel {
    let inner = arrowhead(p.k10(), &[p.k21(), p.k31()], &[p.k12(), p.k13()]);
    let mut a = DMatrix::zeros(4, 4);
    a.view_mut((0, 0), (3, 3)).copy_from(&inner);
    a[(3, 0)] = p.k1e_over_v1();
    a[(3, 3)] = -p.ke0();
    StateSpaceModel {
        a,
        b: unit(4, 0),
        c: unit(4, 3),
        structure: Structure::PkPd(p.clone()),
    }
}

/// Characteristic polynomial `det(sI - A)` by the Faddeev-LeVerrier
/// recurrence.
pub fn char_poly(m: &StateSpaceModel) -> Polynomial {
    faddeev_leverrier(m.a())
}

pub fn faddeev_leverrier(a: &DMatrix<f64>) -> Polynomial {
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0);
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        m = a * &m + &ident * c;
        c = -(a * &m).trace() / k as f64;
        coeffs.push(c);
    }
    Polynomial::new(coeffs).expect("finite matrix gives finite coefficients")
}

/// Characteristic polynomial of the arrowhead block, expanded as
///
/// ```text
/// (s + k10) * prod_j (s + k_j1)  +  s * sum_i k_1i * prod_{j != i} (s + k_j1)
/// ```
///
/// For positive rates every term is nonnegative, so each coefficient keeps
/// full relative accuracy no matter how small it is.
pub fn arrowhead_char_poly(k10: f64, to_center: &[f64], from_center: &[f64]) -> Polynomial {
    let roots: Vec<f64> = to_center.iter().map(|k| -k).collect();
    let mut chi = Polynomial::from_roots(&roots, 1.0).mul(&Polynomial::from_roots(&[-k10], 1.0));
    for (i, &k1i) in from_center.iter().enumerate() {
        let others: Vec<f64> = roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &r)| r)
            .collect();
        let term = Polynomial::from_roots(&others, k1i).mul(&Polynomial::from_roots(&[0.0], 1.0));
        chi = chi.add(&term);
    }
    chi
}

pub(crate) fn mammillary_transfer_function(p: &MammillaryParams) -> TransferFunction {
    let roots: Vec<f64> = p.k_to_center().iter().map(|k| -k).collect();
    TransferFunction::normalize(
        Polynomial::from_roots(&roots, 1.0),
        arrowhead_char_poly(p.k10(), p.k_to_center(), p.k_from_center()),
    )
    .expect("mammillary numerator has degree n - 1 and is monic")
}

/// Three-compartment PK transfer function times the effect-site filter
/// `k1e/V1 / (s + ke0)`.
pub(crate) fn pkpd_transfer_function(p: &PkPdParams) -> Result<TransferFunction, TfError> {
    let inner_den = arrowhead_char_poly(p.k10(), &[p.k21(), p.k31()], &[p.k12(), p.k13()]);
    let den = inner_den.mul(&Polynomial::from_roots(&[-p.ke0()], 1.0));
    let num = Polynomial::from_roots(&[-p.k21(), -p.k31()], p.k1e_over_v1());
    TransferFunction::normalize(num, den)
}

/// `C (sI - A)^{-1} B` as a normalized transfer function.
///
/// Mammillary and PK-PD models use their exact structural expansions; other
/// models use Faddeev-LeVerrier for the denominator and interpolate
/// `C adj(sI - A) B` on a circle enclosing the spectrum.
pub fn transfer_function(m: &StateSpaceModel) -> Result<TransferFunction, TfError> {
    match &m.structure {
        Structure::Mammillary(p) => Ok(mammillary_transfer_function(p)),
        Structure::PkPd(p) => pkpd_transfer_function(p),
        Structure::General => general_transfer_function(m),
    }
}

fn general_transfer_function(m: &StateSpaceModel) -> Result<TransferFunction, TfError> {
    let n = m.n();
    let chi = char_poly(m);
    let norm = m.a_norm_inf();
    let radius = if norm > 0.0 { 2.0 * norm } else { 1.0 };
    let count = n;
    let a_c = m.a.map(|v| Complex64::new(v, 0.0));
    let b_c = m.b.map(|v| Complex64::new(v, 0.0));
    let samples: Vec<Complex64> = (0..count)
        .map(|j| {
            let s = Complex64::from_polar(radius, PI * (2 * j + 1) as f64 / count as f64);
            let shifted = DMatrix::<Complex64>::identity(n, n) * s - &a_c;
            let x = shifted
                .lu()
                .solve(&b_c)
                .expect("sample point lies outside the spectrum");
            let cx: Complex64 = m.c.iter().zip(x.iter()).map(|(c, x)| x * *c).sum();
            chi.eval_complex(s) * cx
        })
        .collect();
    // v_j = sum_k q_k r^k w^k e^{2 pi i j k / N}, w = e^{i pi / N}
    let mut ascending = vec![0.0; count];
    for (k, q) in ascending.iter_mut().enumerate() {
        let sum: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / count as f64))
            .sum();
        let twist = Complex64::from_polar(radius.powi(k as i32), PI * k as f64 / count as f64);
        *q = (sum / (count as f64) / twist).re;
    }
    let scale = ascending.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut descending: Vec<f64> = ascending.into_iter().rev().collect();
    let lead = descending
        .iter()
        .position(|v| v.abs() > 1e-12 * scale)
        .unwrap_or(descending.len() - 1);
    descending.drain(..lead);
    TransferFunction::normalize(Polynomial::new(descending)?, chi)
}

/// Controllable canonical (companion) realization of a strictly proper
/// transfer function.
pub fn controllable_canonical(h: &TransferFunction) -> StateSpaceModel {
    let den = h.den().coeffs();
    let n = h.order();
    let mut a = DMatrix::zeros(n, n);
    for i in 1..n {
        a[(i - 1, i)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -den[n - j];
    }
    let mut c = DVector::zeros(n);
    for (k, v) in h.num().coeffs().iter().rev().enumerate() {
        c[k] = *v;
    }
    StateSpaceModel {
        a,
        b: unit(n, n - 1),
        c,
        structure: Structure::General,
    }
}

/// Largest `|y1 - y2|` between the impulse responses of two models on the
/// same grid.
pub fn impulse_max_difference(
    m1: &StateSpaceModel,
    m2: &StateSpaceModel,
    t_end: f64,
    dt: f64,
) -> Result<f64, StateSpaceError> {
    let y1 = simulate_impulse(m1, t_end, dt)?.y;
    let y2 = simulate_impulse(m2, t_end, dt)?.y;
    Ok(y1
        .iter()
        .zip(&y2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Diagonal similarity that makes a mammillary matrix symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetrized {
    /// Diagonal of `D`: `(1, sqrt(k21/k12), ..., sqrt(kn1/k1n))`.
    pub d: DVector<f64>,
    /// `D A D^{-1}`.
    pub a_sym: DMatrix<f64>,
}

pub fn symmetrize(p: &MammillaryParams) -> Result<Symmetrized, StateSpaceError> {
    symmetrize_arrowhead(p.k10(), p.k_to_center(), p.k_from_center())
}

pub(crate) fn symmetrize_arrowhead(
    k10: f64,
    to_center: &[f64],
    from_center: &[f64],
) -> Result<Symmetrized, StateSpaceError> {
    let n = to_center.len() + 1;
    let mut d = DVector::from_element(n, 1.0);
    for i in 1..n {
        let (to, from) = (to_center[i - 1], from_center[i - 1]);
        if !(to > 0.0 && from > 0.0) {
            return Err(StateSpaceError::NonPositiveRates(i));
        }
        d[i] = (to / from).sqrt();
    }
    let a = arrowhead(k10, to_center, from_center);
    let a_sym = DMatrix::from_fn(n, n, |i, j| d[i] * a[(i, j)] / d[j]);
    Ok(Symmetrized { d, a_sym })
}

/// Results of the compartmental sign conditions on `(A, B, C)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompartmentalReport {
    pub input_nonnegative: bool,
    pub output_nonnegative: bool,
    pub off_diagonal_nonnegative: bool,
    /// `a_jj + sum_{i != j} a_ij` for every column `j`.
    pub column_sums: Vec<f64>,
    pub column_sums_nonpositive: bool,
    pub passed: bool,
    pub notes: Vec<String>,
}

pub fn compartmental_check(m: &StateSpaceModel) -> CompartmentalReport {
    let n = m.n();
    let a = m.a();
    let slack = 1e-12 * m.a_norm_inf();
    let input_nonnegative = m.b.iter().all(|&v| v >= 0.0);
    let output_nonnegative = m.c.iter().all(|&v| v >= 0.0);
    let off_diagonal_nonnegative = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] >= 0.0));
    let column_sums: Vec<f64> = (0..n).map(|j| a.column(j).sum()).collect();
    let column_sums_nonpositive = column_sums.iter().all(|&s| s <= slack);
    let mut notes = Vec::new();
    if let Structure::PkPd(p) = &m.structure {
        notes.push(format!(
            "column 1 includes the effect-site gain k1e/V1 = {}, which is not a mass outflow; \
             the central-compartment column sum without it is {}",
            p.k1e_over_v1(),
            column_sums[0] - p.k1e_over_v1()
        ));
    }
    CompartmentalReport {
        input_nonnegative,
        output_nonnegative,
        off_diagonal_nonnegative,
        column_sums,
        column_sums_nonpositive,
        passed: input_nonnegative
            && output_nonnegative
            && off_diagonal_nonnegative
            && column_sums_nonpositive,
        notes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Symmetrized,
    /// Symmetrized PK block plus the effect-site pole.
    SymmetrizedBlock,
    CharPolyRoots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub eigenvalues: Vec<Root>,
    pub method: EigenMethod,
    pub tolerance: f64,
    pub max_abs_imag: f64,
    pub max_real: f64,
    pub all_real: bool,
    pub all_nonpositive: bool,
    pub passed: bool,
}

fn symmetric_eigenvalues(s: &Symmetrized) -> Vec<Complex64> {
    s.a_sym
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect()
}

/// Checks that every eigenvalue is real and nonpositive within `tau`
/// (default `1e-9 * ||A||_inf`).
pub fn eigen_check(m: &StateSpaceModel, tau: Option<f64>) -> EigenReport {
    let tolerance = tau.unwrap_or(1e-9 * m.a_norm_inf());
    let symmetric = match &m.structure {
        Structure::Mammillary(p) => symmetrize(p)
            .ok()
            .map(|s| (symmetric_eigenvalues(&s), EigenMethod::Symmetrized)),
        Structure::PkPd(p) => {
            symmetrize_arrowhead(p.k10(), &[p.k21(), p.k31()], &[p.k12(), p.k13()])
                .ok()
                .map(|s| {
                    let mut ev = symmetric_eigenvalues(&s);
                    ev.push(Complex64::new(-p.ke0(), 0.0));
                    (ev, EigenMethod::SymmetrizedBlock)
                })
        }
        Structure::General => None,
    };
    let (mut values, method) = symmetric.unwrap_or_else(|| {
        let roots = char_poly(m).roots().unwrap_or_default();
        (roots, EigenMethod::CharPolyRoots)
    });
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let max_abs_imag = values.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    let max_real = values
        .iter()
        .fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re));
    let all_real = max_abs_imag <= tolerance;
    let all_nonpositive = max_real <= tolerance;
    EigenReport {
        eigenvalues: values
            .iter()
            .map(|z| Root {
                re: z.re,
                im: z.im,
                is_real: z.im.abs() <= tolerance,
            })
            .collect(),
        method,
        tolerance,
        max_abs_imag,
        max_real,
        all_real,
        all_nonpositive,
        passed: all_real && all_nonpositive,
    }
}

/// Sampled impulse response `y(t_k) = C exp(A t_k) B` with full state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `t,y,x1..xn` with a header row.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, Vec::len);
        let mut out = String::from("t,y");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for k in 0..self.t.len() {
            out.push_str(&format!("{},{:e}", self.t[k], self.y[k]));
            for x in &self.states[k] {
                out.push_str(&format!(",{x:e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Impulse response on the grid `t_k = k dt`, `k = 0..=floor(T / dt)`,
/// stepping with a single `exp(A dt)`.
pub fn simulate_impulse(
    m: &StateSpaceModel,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, StateSpaceError> {
    if !(dt > 0.0 && dt.is_finite() && t_end.is_finite() && t_end >= dt) {
        return Err(StateSpaceError::BadGrid { t_end, dt });
    }
    let steps = (t_end / dt + 1e-9).floor() as usize;
    let phi = expm(&(m.a() * dt));
    let mut x = m.b.clone();
    let mut t = Vec::with_capacity(steps + 1);
    let mut y = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        t.push(k as f64 * dt);
        y.push(m.c.dot(&x));
        states.push(x.iter().copied().collect());
        x = &phi * x;
    }
    Ok(Trajectory { t, y, states })
}
