//! Fourth-order PK-PD realization: a three-compartment mammillary PK block
//! followed by an effect-site lag `(k1e/V1) / (s + ke0)`.
//!
//! For `H = k (s - z2)(s - z3) / alpha(s)` with `z2 > z3`, the PK block
//! exchange rates are `k21 = -z2`, `k31 = -z3` and the gain is
//! `k1e/V1 = k`. Every real negative pole `z0` of `H` is a candidate for
//! the effect-site pole; with `a = alpha / (s - z0)`:
//!
//! ```text
//! ke0 = -z0
//! k10 = a(0) / (z2 z3)
//! k12 = a(z2) / (z2 (z2 - z3))
//! k13 = -a(z3) / (z3 (z2 - z3))
//! ```
//!
//! A candidate is kept when all seven values are positive, so up to four
//! positive realizations can exist.

use serde::{Deserialize, Serialize};

use crate::conditions::{BranchCheck, Condition, ConditionId, ConditionReport, Verdict};
use crate::error::{ParamError, RealizationError};
use crate::mammillary::{
    cancellation_warnings, numerator_root_conditions, relative_error, sign_pattern_values,
};
use crate::poly::{PolyError, Polynomial, RootSet};
use crate::statespace;
use crate::tf::TransferFunction;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPkPdParams", into = "RawPkPdParams")]
pub struct PkPdParams {
    k1e_over_v1: f64,
    k10: f64,
    k12: f64,
    k13: f64,
    k21: f64,
    k31: f64,
    ke0: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPkPdParams {
    #[serde(rename = "k1e_over_V1", alias = "k1e_over_v1")]
    k1e_over_v1: f64,
    k10: f64,
    k12: f64,
    k13: f64,
    k21: f64,
    k31: f64,
    ke0: f64,
}

impl TryFrom<RawPkPdParams> for PkPdParams {
    type Error = ParamError;

    fn try_from(r: RawPkPdParams) -> Result<Self, Self::Error> {
        PkPdParams::new(r.k1e_over_v1, r.k10, r.k12, r.k13, r.k21, r.k31, r.ke0)
    }
}

impl From<PkPdParams> for RawPkPdParams {
    fn from(p: PkPdParams) -> Self {
        RawPkPdParams {
            k1e_over_v1: p.k1e_over_v1,
            k10: p.k10,
            k12: p.k12,
            k13: p.k13,
            k21: p.k21,
            k31: p.k31,
            ke0: p.ke0,
        }
    }
}

impl PkPdParams {
    pub fn new(
        k1e_over_v1: f64,
        k10: f64,
        k12: f64,
        k13: f64,
        k21: f64,
        k31: f64,
        ke0: f64,
    ) -> Result<Self, ParamError> {
        let named = [
            ("k1e_over_V1", k1e_over_v1),
            ("k10", k10),
            ("k12", k12),
            ("k13", k13),
            ("k21", k21),
            ("k31", k31),
            ("ke0", ke0),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ParamError::NonFinite(name));
        }
        if k21 == k31 {
            return Err(ParamError::DuplicateRate(k21));
        }
        Ok(PkPdParams {
            k1e_over_v1,
            k10,
            k12,
            k13,
            k21,
            k31,
            ke0,
        })
    }

    pub fn k1e_over_v1(&self) -> f64 {
        self.k1e_over_v1
    }

    pub fn k10(&self) -> f64 {
        self.k10
    }

    pub fn k12(&self) -> f64 {
        self.k12
    }

    pub fn k13(&self) -> f64 {
        self.k13
    }

    pub fn k21(&self) -> f64 {
        self.k21
    }

    pub fn k31(&self) -> f64 {
        self.k31
    }

    pub fn ke0(&self) -> f64 {
        self.ke0
    }

    /// `(k1e/V1, k10, k12, k13, k21, k31, ke0)`.
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.k1e_over_v1,
            self.k10,
            self.k12,
            self.k13,
            self.k21,
            self.k31,
            self.ke0,
        ]
    }

    /// Relabels the two peripheral compartments: swaps `(k21, k31)` and
    /// `(k12, k13)`. The transfer function is unchanged.
    pub fn apply_swap(&self) -> PkPdParams {
        PkPdParams {
            k12: self.k13,
            k13: self.k12,
            k21: self.k31,
            k31: self.k21,
            ..self.clone()
        }
    }

    /// Form with `k21 < k31`, which is what realization returns.
    pub fn normalized(&self) -> PkPdParams {
        if self.k21 > self.k31 {
            self.apply_swap()
        } else {
            self.clone()
        }
    }

    pub fn is_positive(&self) -> bool {
        self.to_array().iter().all(|&k| k > 0.0)
    }

    pub fn max_relative_error(&self, other: &PkPdParams) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| relative_error(*a, b))
            .fold(0.0, f64::max)
    }

    pub fn transfer_function(&self) -> TransferFunction {
        statespace::pkpd_transfer_function(self)
            .expect("numerator degree 2 over denominator degree 4")
    }

    /// The three-compartment PK block as a transfer function.
    pub fn inner_transfer_function(&self) -> TransferFunction {
        TransferFunction::normalize(
            Polynomial::from_roots(&[-self.k21, -self.k31], 1.0),
            statespace::arrowhead_char_poly(self.k10, &[self.k21, self.k31], &[self.k12, self.k13]),
        )
        .expect("relative degree one")
    }
}

/// Published propofol parameters, stored as listed (with `k21 > k31`).
pub fn schnider_fixture() -> PkPdParams {
    PkPdParams::new(0.0018, 0.0065, 0.0063, 0.0033, 0.0011, 0.0001, 0.0077)
        .expect("fixture is valid")
}

/// [`schnider_fixture`] with the peripheral compartments relabelled so that
/// `k21 < k31`.
pub fn schnider_fixture_normalized() -> PkPdParams {
    schnider_fixture().normalized()
}

/// One candidate effect-site pole.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PkPdBranch {
    pub z0: f64,
    pub multiplicity: usize,
    pub ke0: f64,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<PkPdParams>,
    /// Closed-form values, present for every branch.
    pub k10: f64,
    pub k12: f64,
    pub k13: f64,
    /// `a(0)`, `a(z2)`, `a(z3)` with `a = alpha / (s - z0)`.
    pub a0: f64,
    pub a_z2: f64,
    pub a_z3: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_condition: Option<ConditionId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PkPdEnumeration {
    pub report: ConditionReport,
    /// Ordered by decreasing `ke0`.
    pub branches: Vec<PkPdBranch>,
    /// Accepted branch with `ke0` closest to the reference, if one was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_ke0: Option<f64>,
}

impl PkPdEnumeration {
    pub fn accepted(&self) -> impl Iterator<Item = &PkPdBranch> {
        self.branches.iter().filter(|b| b.accepted)
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted().count()
    }

    pub fn accepted_params(&self) -> Vec<PkPdParams> {
        self.accepted().filter_map(|b| b.params.clone()).collect()
    }
}

fn close_relative(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Real negative poles, merged when relatively coincident, with their
/// multiplicities; sorted by decreasing `|z0|`.
fn candidate_poles(poles: &RootSet, tol_sep: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut negatives: Vec<f64> = poles.reals().into_iter().filter(|&z| z < 0.0).collect();
    negatives.sort_by(|a, b| a.total_cmp(b));
    for z in negatives {
        match out.last_mut() {
            Some((rep, m)) if close_relative(*rep, z, tol_sep) => *m += 1,
            _ => out.push((z, 1)),
        }
    }
    out
}

struct Global {
    conditions: Vec<Condition>,
    zeros: Option<RootSet>,
    poles: Option<RootSet>,
    /// Conditions for any realization hold.
    exists: bool,
    /// Branch-independent positivity conditions hold.
    positive_globals: bool,
}

fn global_conditions(h: &TransferFunction, tol: &Tolerances) -> Global {
    let mut conds = vec![Condition::new(
        ConditionId::RelativeDegree,
        "relative degree is 2",
        h.relative_degree() == 2,
    )
    .witness("relative_degree", h.relative_degree() as f64)];
    let mut zeros = None;
    if h.num().degree() == 2 {
        let (c, set) = numerator_root_conditions(h.num(), tol);
        conds.extend(c);
        zeros = set;
    }
    let poles = h.den().real_roots(tol.tol_im, tol.tol_sep).ok();
    let real_poles = poles.as_ref().map(RootSet::reals).unwrap_or_default();
    let mut real_root = Condition::new(
        ConditionId::DenominatorRealRoot,
        "denominator has at least one real root",
        !real_poles.is_empty(),
    );
    for (i, p) in real_poles.iter().enumerate() {
        real_root = real_root.witness(format!("p[{i}]"), *p);
    }
    conds.push(real_root);

    let zero_values = zeros.as_ref().map(RootSet::reals).unwrap_or_default();
    let mut separation = Condition::new(
        ConditionId::PoleZeroSeparation,
        "no real pole coincides with a numerator root",
        true,
    );
    for &z in &zero_values {
        for &p in &real_poles {
            if close_relative(z, p, tol.tol_sep) {
                separation.passed = false;
                separation = separation.witness("zero", z).witness("pole", p);
            }
        }
    }
    conds.push(separation);

    let exists = conds.iter().all(|c| c.passed) && zeros.is_some() && poles.is_some();
    let mut positive_globals = false;
    if exists {
        let mut neg = Condition::new(
            ConditionId::NumeratorNegativeRoots,
            "numerator roots are strictly negative",
            zero_values.iter().all(|&z| z < 0.0),
        );
        for (i, z) in zero_values.iter().enumerate() {
            neg = neg.witness(format!("z[{i}]"), *z);
        }
        let gain = Condition::new(
            ConditionId::NumeratorPositiveGain,
            "numerator leading coefficient is positive",
            h.gain() > 0.0,
        )
        .witness("k", h.gain());
        let negative_pole = Condition::new(
            ConditionId::DenominatorNegativeRoot,
            "denominator has at least one real negative root",
            real_poles.iter().any(|&p| p < 0.0),
        );
        positive_globals = neg.passed && gain.passed && negative_pole.passed;
        conds.extend([neg, gain, negative_pole]);
    }
    Global {
        conditions: conds,
        zeros,
        poles,
        exists,
        positive_globals,
    }
}

struct Candidate {
    check: BranchCheck,
    ke0: f64,
    k10: f64,
    k12: f64,
    k13: f64,
    a: [f64; 3],
}

fn evaluate_branch(
    alpha: &Polynomial,
    z0: f64,
    multiplicity: usize,
    z2: f64,
    z3: f64,
    tol: &Tolerances,
) -> Candidate {
    // a = alpha / (s - z0); its values follow from alpha itself, which
    // avoids the rounding carried by deflated coefficients
    let at = |z: f64| {
        if z == z0 {
            alpha.eval_derivative(z)
        } else {
            alpha.eval_compensated(z) / (z - z0)
        }
    };
    let a = [-alpha.constant_term() / z0, at(z2), at(z3)];
    let mut conditions = Vec::new();
    if let Err(e) = alpha.deflate_with_tol(z0, tol.tol_deflate) {
        let remainder = match e {
            PolyError::NotARoot { remainder, .. } => remainder,
            _ => alpha.eval(z0),
        };
        conditions.push(
            Condition::new(
                ConditionId::DenominatorNegativeRoot,
                "z0 is a root of the denominator",
                false,
            )
            .witness("z0", z0)
            .witness("remainder", remainder),
        );
    }
    conditions.push(sign_pattern_values(a[0], a[1], a[2]));
    let passed = conditions.iter().all(|c| c.passed);
    Candidate {
        check: BranchCheck {
            z0,
            multiplicity,
            passed,
            conditions,
        },
        ke0: -z0,
        k10: a[0] / (z2 * z3),
        k12: a[1] / (z2 * (z2 - z3)),
        k13: -a[2] / (z3 * (z2 - z3)),
        a,
    }
}

struct Evaluation {
    report: ConditionReport,
    candidates: Vec<Candidate>,
    zeros: Vec<f64>,
}

fn evaluate(h: &TransferFunction, tol: &Tolerances) -> Result<Evaluation, RealizationError> {
    if h.order() != 4 {
        return Err(RealizationError::WrongOrder {
            expected: 4,
            found: h.order(),
        });
    }
    let g = global_conditions(h, tol);
    let zeros = g.zeros.as_ref().map(RootSet::reals).unwrap_or_default();
    let mut candidates = Vec::new();
    if g.exists {
        let (z2, z3) = (zeros[0], zeros[1]);
        let poles = g.poles.as_ref().expect("exists implies poles");
        for (z0, m) in candidate_poles(poles, tol.tol_sep) {
            candidates.push(evaluate_branch(h.den(), z0, m, z2, z3, tol));
        }
    }
    let any_positive = g.positive_globals && candidates.iter().any(|c| c.check.passed);
    let verdict = match (g.exists, any_positive) {
        (true, true) => Verdict::PositiveRealization,
        (true, false) => Verdict::Realization,
        _ => Verdict::NoRealization,
    };
    let report = ConditionReport {
        verdict,
        conditions: g.conditions,
        numerator_roots: g.zeros,
        denominator_roots: g.poles,
        branches: candidates.iter().map(|c| c.check.clone()).collect(),
        warnings: cancellation_warnings(h, tol),
    };
    Ok(Evaluation {
        report,
        candidates,
        zeros,
    })
}

/// Global existence conditions plus the sign conditions for every candidate
/// effect-site pole.
pub fn check_conditions_pkpd(
    h: &TransferFunction,
    tol: &Tolerances,
) -> Result<ConditionReport, RealizationError> {
    Ok(evaluate(h, tol)?.report)
}

/// Enumerates every candidate effect-site pole and keeps the positive ones.
///
/// Each kept parameter set is mapped forward and compared with `h`; a
/// mismatch above `tol.tol_verify` is an error.
pub fn realize_pkpd(
    h: &TransferFunction,
    reference_ke0: Option<f64>,
    tol: &Tolerances,
) -> Result<PkPdEnumeration, RealizationError> {
    let Evaluation {
        report,
        candidates,
        zeros,
    } = evaluate(h, tol)?;
    if !report.verdict.is_realizable() {
        return Err(RealizationError::ConditionsFailed(Box::new(report)));
    }
    let (z2, z3) = (zeros[0], zeros[1]);
    let global_failure = report.conditions.iter().find(|c| !c.passed).map(|c| c.id);
    let mut branches = Vec::with_capacity(candidates.len());
    for c in candidates {
        let values_positive = c.k10 > 0.0 && c.k12 > 0.0 && c.k13 > 0.0;
        let accepted = global_failure.is_none() && c.check.passed && values_positive;
        let failed_condition = if accepted {
            None
        } else {
            global_failure
                .or_else(|| c.check.conditions.iter().find(|x| !x.passed).map(|x| x.id))
                .or(Some(ConditionId::SignPattern))
        };
        let mut branch = PkPdBranch {
            z0: c.check.z0,
            multiplicity: c.check.multiplicity,
            ke0: c.ke0,
            accepted,
            params: None,
            k10: c.k10,
            k12: c.k12,
            k13: c.k13,
            a0: c.a[0],
            a_z2: c.a[1],
            a_z3: c.a[2],
            failed_condition,
            verification_residual: None,
        };
        if accepted {
            let p = PkPdParams::new(h.gain(), c.k10, c.k12, c.k13, -z2, -z3, c.ke0)?;
            let residual = p.transfer_function().coefficient_residual(h);
            if residual.is_nan() || residual > tol.tol_verify {
                return Err(RealizationError::VerificationFailed {
                    residual,
                    tolerance: tol.tol_verify,
                });
            }
            branch.params = Some(p);
            branch.verification_residual = Some(residual);
        }
        branches.push(branch);
    }
    let selected = reference_ke0.and_then(|r| {
        branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.accepted)
            .min_by(|(_, a), (_, b)| (a.ke0 - r).abs().total_cmp(&(b.ke0 - r).abs()))
            .map(|(i, _)| i)
    });
    Ok(PkPdEnumeration {
        report,
        branches,
        selected,
        reference_ke0,
    })
}
