//! Bounds and dynamics for resetting a qubit through a controllable coupling
//! to an ancilla.

pub mod control;
pub mod dynamics;
pub mod error;
pub mod lie;
pub mod majorization;
pub mod model;
pub mod operator;
pub mod weyl;

pub use error::{QresetError, Result};
