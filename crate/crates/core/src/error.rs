use thiserror::Error;

use crate::conditions::ConditionReport;
use crate::poly::PolyError;
use crate::tf::TfError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("a mammillary model needs at least two compartments")]
    TooFewCompartments,
    #[error("k_to_center has {to} entries but k_from_center has {from}")]
    LengthMismatch { to: usize, from: usize },
    #[error("declared n = {declared} does not match {actual} compartments")]
    CompartmentCount { declared: usize, actual: usize },
    #[error("k_to_center must be strictly increasing (violated at index {0})")]
    NotIncreasing(usize),
    #[error("duplicate peripheral rate {0}")]
    DuplicateRate(f64),
    #[error("k_to_center entries must be nonzero")]
    ZeroRate,
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizationError {
    #[error("realization conditions failed ({})", failed_list(.0))]
    ConditionsFailed(Box<ConditionReport>),
    #[error("forward verification failed: residual {residual:e} exceeds {tolerance:e}")]
    VerificationFailed { residual: f64, tolerance: f64 },
    #[error("wrong order: expected a degree-{expected} denominator, found degree {found}")]
    WrongOrder { expected: usize, found: usize },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Tf(#[from] TfError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn failed_list(report: &ConditionReport) -> String {
    let ids: Vec<&str> = report.failed_ids().iter().map(|id| id.as_str()).collect();
    if ids.is_empty() {
        format!("{:?}", report.verdict)
    } else {
        ids.join(", ")
    }
}
