//! Operational-framework toolkit for probing modifications of quantum
//! measurement theory.
//!
//! The crate has three layers:
//!
//! * a validated quantum linear-algebra core ([`quantum`]) plus the
//!   operational state/effect formalism ([`gpt`]);
//! * outcome probability functions on symmetric tensor powers ([`opf`])
//!   together with composition rules and a Monte Carlo axiom-checker
//!   suite ([`star`]);
//! * simulators for hypothetical post-quantum readout devices
//!   ([`readout`]) and numerical-rank analysis of the function families
//!   they generate ([`span`]).
//!
//! Everything is seeded and deterministic: parallel runs (the default,
//! via the `parallel` feature) produce bit-identical results to
//! sequential ones.

pub mod error;
pub mod exec;
pub mod gpt;
pub mod haar;
pub mod readout;
pub mod linalg;
pub mod opf;
pub mod quantum;
pub mod span;
pub mod star;

pub use error::{Error, Result};
