use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Run parameters for one population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub horizon: f64,
    /// Checkpoint spacing for path-dependent observables. Branch times are
    /// exact and never snapped to this grid.
    pub dt: f64,
    pub max_particles: usize,
    /// Front-window pruning gap. Particles further than this below the
    /// rightmost one are dropped at each checkpoint.
    pub prune_gap: Option<f64>,
    /// Brownian-bridge correction for threshold crossings between checkpoints.
    pub bridge_refine: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            horizon: 10.0,
            dt: 1e-3,
            max_particles: 1_000_000,
            prune_gap: None,
            bridge_refine: false,
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be positive and finite, got {}", self.horizon));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.dt >= self.horizon {
            return bad(format!(
                "dt ({}) must be smaller than horizon ({})",
                self.dt, self.horizon
            ));
        }
        if self.max_particles < 1 {
            return bad("max_particles must be at least 1".into());
        }
        if let Some(gap) = self.prune_gap {
            if !(gap > 0.0) {
                return bad(format!("prune_gap must be positive, got {gap}"));
            }
        }
        Ok(())
    }

    /// Number of whole checkpoints in `[0, horizon]`.
    pub fn grid_len(&self) -> u64 {
        (self.horizon / self.dt + 1e-9).floor() as u64
    }
}
