//! Monte Carlo cross-checks of the simulator against closed-form
//! identities, tail estimates, and exponent regression.

pub mod fit;
pub mod gof;
mod identities;
mod mc;
pub mod quad;
mod tails;

pub use fit::{exponent_fit, fit_medians, ScaleSample, SlopeFit};
pub use identities::{
    bridge_moment_mc, many_to_one_check, many_to_two_check, pair_sum, pair_sum_expectation, Canonical, PairSumCheck,
    PathFunctional,
};
pub use mc::{median, McEstimate};
pub use tails::{front_samples, front_tail_estimate, left_tail_estimate, FrontTail, LeftTail};

use crate::exec::Execution;

/// Replicate count, seeding and dispatch for an estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McRun {
    pub replicates: usize,
    pub master_seed: u64,
    pub exec: Execution,
    pub max_particles: usize,
}

impl McRun {
    pub fn new(replicates: usize, master_seed: u64) -> Self {
        Self {
            replicates,
            master_seed,
            exec: Execution::available(),
            max_particles: 1_000_000,
        }
    }
}
