//! Verifying frontend for the QHTT surface language.
//!
//! Programs carry Hoare-style pre/postconditions in their types. Checking a
//! declaration symbolically executes its body to accumulate strongest
//! postconditions and discharges the declared postcondition against a
//! finite-dimensional subspace semantics. A dense state-vector simulator
//! provides an independent oracle for differential testing.

pub mod checker;
pub mod config;
pub mod error;
pub mod linalg;
pub mod props;
pub mod report;
pub mod simulator;
pub mod span;
pub mod surface;

pub use config::Config;
pub use span::Span;
