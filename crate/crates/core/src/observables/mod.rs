//! Waiting-time functionals measured on simulated populations.

mod cohort;
mod crossing;
mod grid;
mod lead;

pub use cohort::{additive_martingale, cohort_count, delta_cohort_count, sigma_m_sample, CohortCount, SigmaSample};
pub use crossing::{track_t, track_t_coupled, two_bbm_coupled, two_bbm_t, CrossingKind, CrossingRecord};
pub use lead::{advance_on_grid, assign_labels, theta, track_tau, track_tau_with, LabelInfo, SnapshotLabeling};
