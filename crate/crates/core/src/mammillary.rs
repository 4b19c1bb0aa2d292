//! Mammillary realization of a transfer function.
//!
//! A mammillary model has one central compartment exchanging with `n - 1`
//! peripheral compartments and eliminating only from the centre:
//!
//! ```text
//!     | -k10 - sum(k1i)  k21   k31  ...  kn1 |
//! A = |  k12            -k21    0   ...   0  |      B = e1,  C = e1^T
//!     |  k13             0    -k31  ...   0  |
//!     |  ...                                 |
//! ```
//!
//! `H(s) = beta(s) / alpha(s)` has such a realization iff it has relative
//! degree one and a monic numerator with simple, real, nonzero roots. The
//! parameters are then unique:
//!
//! ```text
//! k_i1 = -z_i,   k10 = alpha(0) / beta(0),   k_1i = alpha(z_i) / beta_i(z_i)
//! ```
//!
//! with `beta_i(s) = z_i * beta(s) / (s - z_i)` and `z_2 > z_3 > ... > z_n`
//! the numerator roots. The formula for `k_1i` applies to every
//! `i in 2..=n`; this is what gives `2n - 1` parameters in total.

use serde::{Deserialize, Serialize};

use crate::conditions::{Condition, ConditionId, ConditionReport, Verdict};
use crate::error::{ParamError, RealizationError};
use crate::poly::{Polynomial, RootSet};
use crate::statespace;
use crate::tf::TransferFunction;
use crate::tolerance::Tolerances;

/// Rates of an `n`-compartment mammillary model, with `k_to_center`
/// (`k21 .. kn1`) strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMammillaryParams")]
pub struct MammillaryParams {
    n: usize,
    k10: f64,
    k_to_center: Vec<f64>,
    k_from_center: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMammillaryParams {
    n: Option<usize>,
    k10: f64,
    k_to_center: Vec<f64>,
    k_from_center: Vec<f64>,
}

impl TryFrom<RawMammillaryParams> for MammillaryParams {
    type Error = ParamError;

    fn try_from(raw: RawMammillaryParams) -> Result<Self, Self::Error> {
        let p = MammillaryParams::new(raw.k10, raw.k_to_center, raw.k_from_center)?;
        match raw.n {
            Some(declared) if declared != p.n => Err(ParamError::CompartmentCount {
                declared,
                actual: p.n,
            }),
            _ => Ok(p),
        }
    }
}

impl MammillaryParams {
    pub fn new(
        k10: f64,
        k_to_center: Vec<f64>,
        k_from_center: Vec<f64>,
    ) -> Result<Self, ParamError> {
        if k_to_center.len() != k_from_center.len() {
            return Err(ParamError::LengthMismatch {
                to: k_to_center.len(),
                from: k_from_center.len(),
            });
        }
        if k_to_center.is_empty() {
            return Err(ParamError::TooFewCompartments);
        }
        if !k10.is_finite() {
            return Err(ParamError::NonFinite("k10"));
        }
        if k_to_center.iter().any(|k| !k.is_finite()) {
            return Err(ParamError::NonFinite("k_to_center"));
        }
        if k_from_center.iter().any(|k| !k.is_finite()) {
            return Err(ParamError::NonFinite("k_from_center"));
        }
        if k_to_center.contains(&0.0) {
            return Err(ParamError::ZeroRate);
        }
        if let Some(i) = k_to_center.windows(2).position(|w| w[0] >= w[1]) {
            if k_to_center[i] == k_to_center[i + 1] {
                return Err(ParamError::DuplicateRate(k_to_center[i]));
            }
            return Err(ParamError::NotIncreasing(i + 1));
        }
        Ok(MammillaryParams {
            n: k_to_center.len() + 1,
            k10,
            k_to_center,
            k_from_center,
        })
    }

    /// Sorts the peripheral pairs into increasing `k_to_center` order.
    ///
    /// Returns the parameters and the permutation applied: entry `i` of the
    /// result came from position `perm[i]` of the input.
    pub fn from_unordered(
        k10: f64,
        k_to_center: Vec<f64>,
        k_from_center: Vec<f64>,
    ) -> Result<(Self, Vec<usize>), ParamError> {
        if k_to_center.len() != k_from_center.len() {
            return Err(ParamError::LengthMismatch {
                to: k_to_center.len(),
                from: k_from_center.len(),
            });
        }
        let mut perm: Vec<usize> = (0..k_to_center.len()).collect();
        perm.sort_by(|&a, &b| k_to_center[a].total_cmp(&k_to_center[b]));
        let to = perm.iter().map(|&i| k_to_center[i]).collect();
        let from = perm.iter().map(|&i| k_from_center[i]).collect();
        Ok((Self::new(k10, to, from)?, perm))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k10(&self) -> f64 {
        self.k10
    }

    /// `k21 .. kn1`, increasing.
    pub fn k_to_center(&self) -> &[f64] {
        &self.k_to_center
    }

    /// `k12 .. k1n`, paired index-by-index with `k_to_center`.
    pub fn k_from_center(&self) -> &[f64] {
        &self.k_from_center
    }

    /// Flat vector `(k10, k21..kn1, k12..k1n)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.n - 1);
        v.push(self.k10);
        v.extend_from_slice(&self.k_to_center);
        v.extend_from_slice(&self.k_from_center);
        v
    }

    pub fn is_positive(&self) -> bool {
        self.to_vec().iter().all(|&k| k > 0.0)
    }

    /// Largest entrywise relative difference against another parameter set
    /// of the same size.
    pub fn max_relative_error(&self, other: &MammillaryParams) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.to_vec()
            .iter()
            .zip(other.to_vec())
            .map(|(a, b)| relative_error(*a, b))
            .fold(0.0, f64::max)
    }

    pub fn transfer_function(&self) -> TransferFunction {
        statespace::mammillary_transfer_function(self)
    }
}

pub(crate) fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Parameters together with the report and forward residual that justify them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Realization {
    pub params: MammillaryParams,
    pub report: ConditionReport,
    /// Coefficientwise relative mismatch between the forward-mapped model
    /// and the input.
    pub verification_residual: f64,
}

/// Checks shared by every numerator test: real, simple and nonzero roots.
pub(crate) fn numerator_root_conditions(
    num: &Polynomial,
    tol: &Tolerances,
) -> (Vec<Condition>, Option<RootSet>) {
    let set = match num.real_roots(tol.tol_im, tol.tol_sep) {
        Ok(set) => set,
        Err(_) => return (Vec::new(), None),
    };
    let mut real = Condition::new(
        ConditionId::NumeratorRealRoots,
        "numerator roots are real",
        set.all_real(),
    );
    for (i, r) in set.roots.iter().enumerate() {
        real = real
            .witness(format!("re(z[{i}])"), r.re)
            .witness(format!("im(z[{i}])"), r.im);
    }
    let mut simple = Condition::new(
        ConditionId::NumeratorSimpleRoots,
        "numerator roots are simple",
        set.is_simple(),
    );
    for &(i, j) in &set.coincident {
        simple = simple.witness(
            format!("|z[{i}] - z[{j}]|"),
            (set.roots[i].value() - set.roots[j].value()).norm(),
        );
    }
    let zero_threshold = tol.tol_zero * (1.0 + num.max_abs_coeff());
    let smallest = set
        .roots
        .iter()
        .map(|r| r.value().norm())
        .fold(f64::INFINITY, f64::min);
    let nonzero = Condition::new(
        ConditionId::NumeratorNonzeroRoots,
        "numerator roots are nonzero",
        smallest > zero_threshold,
    )
    .witness("min |z|", smallest)
    .witness("threshold", zero_threshold);
    (vec![real, simple, nonzero], Some(set))
}

fn relative_degree_condition(h: &TransferFunction, expected: usize) -> Condition {
    Condition::new(
        ConditionId::RelativeDegree,
        format!("relative degree is {expected}"),
        h.relative_degree() == expected,
    )
    .witness("relative_degree", h.relative_degree() as f64)
}

fn monic_condition(h: &TransferFunction, tol: &Tolerances) -> Condition {
    let lead = h.num().leading();
    Condition::new(
        ConditionId::NumeratorMonic,
        "numerator is monic",
        (lead - 1.0).abs() <= tol.tol_monic,
    )
    .witness("leading", lead)
}

fn negative_roots_condition(zeros: &[f64]) -> Condition {
    let mut c = Condition::new(
        ConditionId::NumeratorNegativeRoots,
        "numerator roots are strictly negative",
        zeros.iter().all(|&z| z < 0.0),
    );
    for (i, z) in zeros.iter().enumerate() {
        c = c.witness(format!("z[{i}]"), *z);
    }
    c
}

/// Conditions for existence and uniqueness (the first block of every
/// mammillary report). Returns the numerator roots when they were computed.
fn existence_conditions(
    h: &TransferFunction,
    tol: &Tolerances,
) -> (Vec<Condition>, Option<RootSet>) {
    let mut conds = vec![Condition::new(
        ConditionId::Order,
        "model has at least two compartments",
        h.order() >= 2,
    )
    .witness("n", h.order() as f64)];
    conds.push(relative_degree_condition(h, 1));
    conds.push(monic_condition(h, tol));
    let mut roots = None;
    if h.num().degree() >= 1 {
        let (c, set) = numerator_root_conditions(h.num(), tol);
        conds.extend(c);
        roots = set;
    }
    (conds, roots)
}

fn all_pass(conds: &[Condition]) -> bool {
    conds.iter().all(|c| c.passed)
}

/// `beta_i(z_i) = z_i * (beta / (s - z_i))(z_i)`.
///
/// The quotient is checked by deflation; its value at `z_i` is taken from the
/// factored form `prod_{j != i} (z_i - z_j)`, which keeps full relative
/// accuracy for clustered roots.
fn beta_i_at_root(
    beta: &Polynomial,
    zeros: &[f64],
    i: usize,
    tol: &Tolerances,
) -> Result<f64, RealizationError> {
    let z = zeros[i];
    beta.deflate_with_tol(z, tol.tol_deflate)?;
    let others: f64 = zeros
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, w)| z - w)
        .product();
    Ok(beta.leading() * z * others)
}

/// Decides whether `h` has a (positive) mammillary realization.
pub fn check_conditions(h: &TransferFunction, tol: &Tolerances) -> ConditionReport {
    let (mut conds, roots) = existence_conditions(h, tol);
    let exists = all_pass(&conds) && roots.is_some();
    let mut positive = false;
    if exists {
        let zeros = roots.as_ref().map(RootSet::reals).unwrap_or_default();
        let alpha = h.den();
        let beta = h.num();

        let neg = negative_roots_condition(&zeros);
        let dc = match h.eval_at_zero() {
            Ok(v) => {
                Condition::new(ConditionId::PositiveDcGain, "H(0) > 0", v > 0.0).witness("H(0)", v)
            }
            Err(_) => Condition::new(ConditionId::PositiveDcGain, "H(0) > 0", false),
        }
        .witness("alpha(0)", alpha.constant_term())
        .witness("beta(0)", beta.constant_term());

        let mut residues = Condition::new(
            ConditionId::ResidueSigns,
            "beta_i(z_i) / alpha(z_i) > 0 at every numerator root",
            true,
        );
        for (i, &z) in zeros.iter().enumerate() {
            let a = alpha.eval_compensated(z);
            match beta_i_at_root(beta, &zeros, i, tol) {
                Ok(b) => {
                    residues.passed &= a * b > 0.0;
                    residues = residues
                        .witness(format!("beta_i(z[{i}])"), b)
                        .witness(format!("alpha(z[{i}])"), a);
                }
                Err(_) => residues.passed = false,
            }
        }
        positive = neg.passed && dc.passed && residues.passed;
        conds.extend([neg, dc, residues]);
    }
    let verdict = match (exists, positive) {
        (true, true) => Verdict::UniquePositiveRealization,
        (true, false) => Verdict::UniqueRealization,
        _ => Verdict::NoRealization,
    };
    let warnings = cancellation_warnings(h, tol);
    ConditionReport {
        verdict,
        conditions: conds,
        numerator_roots: roots,
        denominator_roots: None,
        branches: Vec::new(),
        warnings,
    }
}

pub(crate) fn cancellation_warnings(h: &TransferFunction, tol: &Tolerances) -> Vec<String> {
    match h.near_cancellations(tol.tol_im, tol.tol_sep) {
        Ok(pairs) => pairs
            .iter()
            .map(|(z, p)| format!("near pole-zero cancellation: zero {z} vs pole {p}"))
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Computes the unique mammillary parameters of `h`.
///
/// The result is mapped back to a transfer function and compared with `h`;
/// a mismatch above `tol.tol_verify` is an error.
pub fn realize(h: &TransferFunction, tol: &Tolerances) -> Result<Realization, RealizationError> {
    let report = check_conditions(h, tol);
    if !report.verdict.is_realizable() {
        return Err(RealizationError::ConditionsFailed(Box::new(report)));
    }
    let zeros = numerator_zeros(&report);
    let alpha = h.den();
    let beta = h.num();
    let k10 = alpha.constant_term() / beta.constant_term();
    let k_to_center = zeros.iter().map(|z| -z).collect();
    let k_from_center = (0..zeros.len())
        .map(|i| Ok(alpha.eval_compensated(zeros[i]) / beta_i_at_root(beta, &zeros, i, tol)?))
        .collect::<Result<Vec<f64>, RealizationError>>()?;
    let params = MammillaryParams::new(k10, k_to_center, k_from_center)?;
    verify(params, report, h, tol)
}

fn numerator_zeros(report: &ConditionReport) -> Vec<f64> {
    report
        .numerator_roots
        .as_ref()
        .map(RootSet::reals)
        .unwrap_or_default()
}

fn verify(
    params: MammillaryParams,
    report: ConditionReport,
    h: &TransferFunction,
    tol: &Tolerances,
) -> Result<Realization, RealizationError> {
    let residual = params.transfer_function().coefficient_residual(h);
    if residual.is_nan() || residual > tol.tol_verify {
        return Err(RealizationError::VerificationFailed {
            residual,
            tolerance: tol.tol_verify,
        });
    }
    Ok(Realization {
        params,
        report,
        verification_residual: residual,
    })
}

fn require_order3(h: &TransferFunction) -> Result<(), RealizationError> {
    if h.order() != 3 {
        return Err(RealizationError::WrongOrder {
            expected: 3,
            found: h.order(),
        });
    }
    Ok(())
}

/// Three-compartment check using the explicit sign pattern
/// `alpha(0) > 0, alpha(z2) < 0, alpha(z3) > 0`.
pub fn check_conditions3(
    h: &TransferFunction,
    tol: &Tolerances,
) -> Result<ConditionReport, RealizationError> {
    require_order3(h)?;
    let (mut conds, roots) = existence_conditions(h, tol);
    let exists = all_pass(&conds) && roots.is_some();
    let mut positive = false;
    if exists {
        let zeros = roots.as_ref().map(RootSet::reals).unwrap_or_default();
        let neg = negative_roots_condition(&zeros);
        let signs = sign_pattern(h.den(), zeros[0], zeros[1]);
        positive = neg.passed && signs.passed;
        conds.extend([neg, signs]);
    }
    let verdict = match (exists, positive) {
        (true, true) => Verdict::UniquePositiveRealization,
        (true, false) => Verdict::UniqueRealization,
        _ => Verdict::NoRealization,
    };
    Ok(ConditionReport {
        verdict,
        conditions: conds,
        numerator_roots: roots,
        denominator_roots: None,
        branches: Vec::new(),
        warnings: cancellation_warnings(h, tol),
    })
}

/// `p(0) > 0, p(z2) < 0, p(z3) > 0` with `z2 > z3`.
pub(crate) fn sign_pattern(p: &Polynomial, z2: f64, z3: f64) -> Condition {
    sign_pattern_values(
        p.constant_term(),
        p.eval_compensated(z2),
        p.eval_compensated(z3),
    )
}

pub(crate) fn sign_pattern_values(at0: f64, at2: f64, at3: f64) -> Condition {
    Condition::new(
        ConditionId::SignPattern,
        "p(0) > 0, p(z2) < 0 and p(z3) > 0",
        at0 > 0.0 && at2 < 0.0 && at3 > 0.0,
    )
    .witness("p(0)", at0)
    .witness("p(z2)", at2)
    .witness("p(z3)", at3)
}

/// Closed-form three-compartment realization.
pub fn realize3(h: &TransferFunction, tol: &Tolerances) -> Result<Realization, RealizationError> {
    let report = check_conditions3(h, tol)?;
    if !report.verdict.is_realizable() {
        return Err(RealizationError::ConditionsFailed(Box::new(report)));
    }
    let zeros = numerator_zeros(&report);
    let (z2, z3) = (zeros[0], zeros[1]);
    let alpha = h.den();
    let k10 = alpha.constant_term() / (z2 * z3);
    let k12 = alpha.eval_compensated(z2) / (z2 * (z2 - z3));
    let k13 = -alpha.eval_compensated(z3) / (z3 * (z2 - z3));
    let params = MammillaryParams::new(k10, vec![-z2, -z3], vec![k12, k13])?;
    verify(params, report, h, tol)
}
