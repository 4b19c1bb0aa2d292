//! Mammillary compartmental realization of transfer functions and
//! enumeration of PK-PD effect-site models.

pub mod conditions;
pub mod error;
pub mod expm;
pub mod mammillary;
pub mod pkpd;
pub mod poly;
pub mod statespace;
pub mod tf;
pub mod tolerance;

pub use conditions::{BranchCheck, Condition, ConditionId, ConditionReport, Verdict, Witness};
pub use error::{ParamError, RealizationError};
pub use mammillary::{
    check_conditions, check_conditions3, realize, realize3, MammillaryParams, Realization,
};
pub use pkpd::{
    check_conditions_pkpd, realize_pkpd, schnider_fixture, schnider_fixture_normalized, PkPdBranch,
    PkPdEnumeration, PkPdParams,
};
pub use poly::{PolyError, Polynomial, Root, RootSet};
pub use statespace::{
    build_mammillary, build_pkpd, char_poly, compartmental_check, controllable_canonical,
    eigen_check, impulse_max_difference, simulate_impulse, symmetrize, transfer_function,
    StateSpaceError, StateSpaceModel, Structure, Trajectory,
};
pub use tf::{TfError, TransferFunction};
pub use tolerance::Tolerances;
