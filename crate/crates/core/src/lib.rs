//! Estimation of optimal spin-squeezing parameters from finite measurement
//! data.
//!
//! Five measurement schemes are supported: total-spin measurements (`TS`),
//! all-pair correlations (`AP1`, `AP2`) and randomly drawn pairs (`RP1`,
//! `RP2`). For each scheme the crate provides
//!
//! * exact samplers for Dicke, many-body singlet, depolarized and dense
//!   states ([`states`]),
//! * data collection and the unbiased estimators of `xi_a`..`xi_d`
//!   ([`schemes`]),
//! * analytic estimator variances and closed forms ([`variance`]),
//! * Cantelli p-value bounds and sample-size planning ([`hypothesis`]),
//! * a seeded, thread-count independent Monte Carlo runner ([`montecarlo`]).

pub mod error;
pub mod hypothesis;
pub mod montecarlo;
pub mod schemes;
pub mod states;
pub mod variance;

pub use error::{Error, Result};
pub use schemes::{Budget, Parameter, ParameterKind, Scheme};
pub use states::{Direction, MomentTable, StateModel};
