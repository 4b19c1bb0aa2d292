//! Independent oracles and random model generators shared by the
//! integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use mamrealize_core::{MammillaryParams, PkPdParams, StateSpaceModel, TransferFunction};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn separated(values: &[f64], rel: f64) -> bool {
    values.iter().enumerate().all(|(i, a)| {
        values[i + 1..]
            .iter()
            .all(|b| (a - b).abs() >= rel * a.abs().max(b.abs()))
    })
}

/// Positive mammillary parameters with `n` compartments, rates log-uniform
/// in `[lo, hi]` and `k_to_center` pairwise relatively separated.
pub fn random_mammillary(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> MammillaryParams {
    loop {
        let mut to: Vec<f64> = (1..n).map(|_| log_uniform(rng, lo, hi)).collect();
        if !separated(&to, 1e-2) {
            continue;
        }
        to.sort_by(|a, b| a.total_cmp(b));
        let from = (1..n).map(|_| log_uniform(rng, lo, hi)).collect();
        let k10 = log_uniform(rng, lo, hi);
        return MammillaryParams::new(k10, to, from).unwrap();
    }
}

/// Positive PK-PD parameters: rates log-uniform in `[1e-5, 1e-1]`,
/// `k21`/`k31` relatively separated by `1e-2`, and `ke0` separated by `1e-2`
/// from every pole of the PK block.
pub fn random_pkpd(rng: &mut ChaCha8Rng) -> PkPdParams {
    loop {
        let v: Vec<f64> = (0..7).map(|_| log_uniform(rng, 1e-5, 1e-1)).collect();
        if !separated(&[v[4], v[5]], 1e-2) {
            continue;
        }
        let p = PkPdParams::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6]).unwrap();
        let inner = symmetric_inner_poles(&p);
        if inner
            .iter()
            .all(|&z| (p.ke0() + z).abs() >= 1e-2 * p.ke0().max(-z))
        {
            return p;
        }
    }
}

/// Poles of the PK block from a symmetric eigen-decomposition built here
/// from scratch.
pub fn symmetric_inner_poles(p: &PkPdParams) -> Vec<f64> {
    let s12 = (p.k12() * p.k21()).sqrt();
    let s13 = (p.k13() * p.k31()).sqrt();
    let m = DMatrix::from_row_slice(
        3,
        3,
        &[
            -(p.k10() + p.k12() + p.k13()),
            s12,
            s13,
            s12,
            -p.k21(),
            0.0,
            s13,
            0.0,
            -p.k31(),
        ],
    );
    m.symmetric_eigenvalues().iter().copied().collect()
}

pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `det(sI - A)` sampled on `n + 1` points of a circle around the spectrum
/// and interpolated by a discrete Fourier transform. Descending coefficients.
pub fn det_interp_char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let m = n + 1;
    let norm = inf_norm(a);
    let r = if norm > 0.0 { norm } else { 1.0 };
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let shift = PI / m as f64;
    let values: Vec<Complex64> = (0..m)
        .map(|j| {
            let s = Complex64::from_polar(r, 2.0 * PI * j as f64 / m as f64 + shift);
            (DMatrix::<Complex64>::identity(n, n) * s - &ac)
                .lu()
                .determinant()
        })
        .collect();
    let mut ascending = vec![0.0; m];
    for (k, c) in ascending.iter_mut().enumerate() {
        let sum: Complex64 = values
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / m as f64))
            .sum();
        *c = (sum / m as f64 / Complex64::from_polar(r.powi(k as i32), shift * k as f64)).re;
    }
    ascending.reverse();
    ascending
}

/// Distance between two monic characteristic polynomials measured in the
/// scaled variable `s = rho t`: the largest `|a_k - b_k| / rho^k`, relative
/// to the largest scaled coefficient.
pub fn scaled_poly_distance(a: &[f64], b: &[f64], rho: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let rho = if rho > 0.0 { rho } else { 1.0 };
    let scaled = |v: &[f64], k: usize| v[k] / rho.powi(k as i32);
    let scale = (0..a.len())
        .map(|k| scaled(a, k).abs().max(scaled(b, k).abs()))
        .fold(0.0, f64::max);
    (0..a.len())
        .map(|k| (scaled(a, k) - scaled(b, k)).abs() / scale)
        .fold(0.0, f64::max)
}

/// Controllable canonical realization of a normalized transfer function with
/// relative degree at least one.
pub fn controllable_canonical(h: &TransferFunction) -> StateSpaceModel {
    let den = h.den().coeffs();
    let n = den.len() - 1;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -den[n - j];
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let num = h.num().coeffs();
    let mut c = DVector::zeros(n);
    for (k, v) in num.iter().rev().enumerate() {
        c[k] = *v;
    }
    StateSpaceModel::new(a, b, c).unwrap()
}

/// `C exp(A t) B` at every grid point by a truncated Taylor series with
/// scaling and squaring, independent of the library's Padé routine.
pub fn impulse_by_taylor(m: &StateSpaceModel, t_end: f64, dt: f64) -> Vec<f64> {
    let steps = (t_end / dt + 1e-9).floor() as usize;
    let phi = taylor_expm(&(m.a() * dt));
    let mut x = m.b().clone();
    let mut y = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        y.push(m.c().dot(&x));
        x = &phi * x;
    }
    y
}

pub fn taylor_expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = inf_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Values printed in the worked example, rounded there to four digits.
pub fn printed_h() -> TransferFunction {
    TransferFunction::from_coeffs(
        vec![0.001792, 2.099e-6, 1.168e-10],
        vec![1.0, 0.02482, 0.000143, 8.963e-8, 3.232e-12],
    )
    .unwrap()
}
