//! Exact-event simulation of binary branching Brownian motion.

mod config;
mod population;

pub use config::SimConfig;
pub use population::{Event, Extremum, ParticleRecord, Population, SnapshotEntry};
