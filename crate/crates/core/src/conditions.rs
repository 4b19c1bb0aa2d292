//! Condition reports shared by the mammillary and PK-PD checkers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::poly::RootSet;

/// Every realizability condition the checkers can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// Model order supported by the realization (n >= 2, or n = 4 for PK-PD).
    Order,
    RelativeDegree,
    NumeratorMonic,
    NumeratorRealRoots,
    NumeratorSimpleRoots,
    NumeratorNonzeroRoots,
    NumeratorNegativeRoots,
    NumeratorPositiveGain,
    PositiveDcGain,
    /// `beta_i(z_i) / alpha(z_i) > 0` at every numerator root.
    ResidueSigns,
    /// `p(0) > 0, p(z2) < 0, p(z3) > 0` for the (reduced) denominator `p`.
    SignPattern,
    DenominatorRealRoot,
    DenominatorNegativeRoot,
    PoleZeroSeparation,
}

impl ConditionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::Order => "order",
            ConditionId::RelativeDegree => "relative_degree",
            ConditionId::NumeratorMonic => "numerator_monic",
            ConditionId::NumeratorRealRoots => "numerator_real_roots",
            ConditionId::NumeratorSimpleRoots => "numerator_simple_roots",
            ConditionId::NumeratorNonzeroRoots => "numerator_nonzero_roots",
            ConditionId::NumeratorNegativeRoots => "numerator_negative_roots",
            ConditionId::NumeratorPositiveGain => "numerator_positive_gain",
            ConditionId::PositiveDcGain => "positive_dc_gain",
            ConditionId::ResidueSigns => "residue_signs",
            ConditionId::SignPattern => "sign_pattern",
            ConditionId::DenominatorRealRoot => "denominator_real_root",
            ConditionId::DenominatorNegativeRoot => "denominator_negative_root",
            ConditionId::PoleZeroSeparation => "pole_zero_separation",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: ConditionId,
    pub statement: String,
    pub passed: bool,
    pub witnesses: Vec<Witness>,
}

impl Condition {
    pub fn new(id: ConditionId, statement: impl Into<String>, passed: bool) -> Self {
        Condition {
            id,
            statement: statement.into(),
            passed,
            witnesses: Vec::new(),
        }
    }

    pub fn witness(mut self, name: impl Into<String>, value: f64) -> Self {
        self.witnesses.push(Witness {
            name: name.into(),
            value,
        });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    UniquePositiveRealization,
    UniqueRealization,
    /// At least one positive PK-PD realization (not unique in general).
    PositiveRealization,
    Realization,
    NoRealization,
}

impl Verdict {
    pub fn is_realizable(&self) -> bool {
        !matches!(self, Verdict::NoRealization)
    }

    pub fn is_positive(&self) -> bool {
        matches!(
            self,
            Verdict::UniquePositiveRealization | Verdict::PositiveRealization
        )
    }
}

/// Per-pole conditions evaluated for one candidate effect-site pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchCheck {
    pub z0: f64,
    pub multiplicity: usize,
    pub passed: bool,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub conditions: Vec<Condition>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub numerator_roots: Option<RootSet>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub denominator_roots: Option<RootSet>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub branches: Vec<BranchCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl ConditionReport {
    pub fn get(&self, id: ConditionId) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.id == id)
    }

    /// `Some(true|false)` when the condition was evaluated.
    pub fn passed(&self, id: ConditionId) -> Option<bool> {
        self.get(id).map(|c| c.passed)
    }

    /// First failing condition in evaluation order, including branch-level ones
    /// when no global condition failed and no branch passed.
    pub fn first_failure(&self) -> Option<ConditionId> {
        if let Some(c) = self.conditions.iter().find(|c| !c.passed) {
            return Some(c.id);
        }
        if !self.branches.is_empty() && !self.branches.iter().any(|b| b.passed) {
            return self.branches[0]
                .conditions
                .iter()
                .find(|c| !c.passed)
                .map(|c| c.id);
        }
        None
    }

    pub fn failed_ids(&self) -> Vec<ConditionId> {
        self.conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id)
            .collect()
    }
}
