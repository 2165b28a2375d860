//! Kraus-set algebra: validation, application, FSIO/GAD construction,
//! random channels and hierarchy classification.

pub mod classify;
pub mod fixtures;
pub mod fsio;
pub mod kraus;

pub use classify::{
    classify_kraus, Certificate, ChannelClassification, ClassFlags, IncoherentClass,
    SparsityPattern, Violation, ViolationKind, DEFAULT_ZERO_TOL,
};
pub use fsio::{
    amgm_sum, fsio_to_kraus, random_fio_probe, random_fsio, FsioChannel,
};
pub use kraus::{apply_channel, completeness_residual, gad_channel, KrausSet, COMPLETENESS_TOL};
