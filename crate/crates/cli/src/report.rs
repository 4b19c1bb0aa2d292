//! Common JSON envelope for `realize`, `pkpd` and `check`.

use mamrealize_core::{ConditionReport, PkPdEnumeration, Tolerances, TransferFunction, Verdict};
use serde::Serialize;

use crate::files::{write_output, ModelOut};
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct Verification {
    /// Largest coefficientwise relative mismatch of the forward map.
    pub coefficient_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impulse_max_error: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub input: TransferFunction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumeration: Option<PkPdEnumeration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    pub tolerances: Tolerances,
    pub warnings: Vec<String>,
}

impl Envelope {
    pub fn new(command: &'static str, input: TransferFunction, tolerances: Tolerances) -> Self {
        Envelope {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            input,
            verdict: None,
            report: None,
            params: None,
            enumeration: None,
            verification: None,
            tolerances,
            warnings: Vec::new(),
        }
    }

    pub fn set_report(&mut self, report: ConditionReport) {
        self.verdict = Some(report.verdict);
        self.report = Some(report);
    }

    pub fn emit(mut self) -> Result<(), CliError> {
        // the report inside the enumeration already carries these
        if let Some(r) = &mut self.report {
            r.warnings.clear();
        }
        if let Some(e) = &mut self.enumeration {
            e.report.warnings.clear();
        }
        for w in &self.warnings {
            eprintln!("warning: {w}");
        }
        write_output(&self)
    }
}
