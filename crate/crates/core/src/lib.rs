//! Transmission-constraint screening for multi-interval unit commitment.
//!
//! The crate bundles the instance model, an LP simplex solver, a
//! branch-and-bound MILP solver on top of it, the UC and screening
//! formulations, the screening driver, a KNN commitment predictor and an
//! experiment harness.

pub mod error;
pub mod formulation;
pub mod harness;
pub mod lp;
pub mod milp;
pub mod model;
pub mod predictor;
pub mod screening;

pub use error::{Error, Result};
