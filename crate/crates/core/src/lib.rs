//! Branching Brownian motion: exact-event simulation, waiting-time
//! observables of the front, closed-form laws and bounds, and Monte Carlo
//! estimators that check the former against the latter.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod harness;
pub mod observables;
pub mod rng;
pub mod sim;

pub use error::{DomainError, EstimatorError, HarnessError, SimError};
pub use sim::{Population, SimConfig};
