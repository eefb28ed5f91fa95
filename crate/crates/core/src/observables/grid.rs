use crate::error::SimError;

/// Checkpoints `k * dt` strictly after a start time and up to a horizon.
///
/// Times are computed from the integer index rather than by accumulation,
/// so two walkers over the same `dt` visit bit-identical times.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Grid {
    dt: f64,
    first: u64,
    last: u64,
}

impl Grid {
    pub(crate) fn from_now(now: f64, dt: f64, horizon: f64) -> Result<Self, SimError> {
        if !(horizon >= now) {
            return Err(SimError::InvalidArgument(format!(
                "horizon {horizon} lies before t={now}"
            )));
        }
        let start = index_of(now, dt);
        Ok(Self {
            dt,
            first: start + 1,
            last: (horizon / dt + 1e-9).floor() as u64,
        })
    }

    pub(crate) fn times(self) -> impl Iterator<Item = f64> {
        (self.first..=self.last).map(move |k| k as f64 * self.dt)
    }
}

/// Index of the checkpoint at (or just before) `t`.
pub(crate) fn index_of(t: f64, dt: f64) -> u64 {
    (t / dt + 1e-9).floor() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_walks_index_multiples() {
        let g = Grid::from_now(0.0, 0.25, 1.0).unwrap();
        assert_eq!(g.times().collect::<Vec<_>>(), vec![0.25, 0.5, 0.75, 1.0]);
        let g = Grid::from_now(0.5, 0.1, 0.8).unwrap();
        let t: Vec<f64> = g.times().collect();
        assert_eq!(t.len(), 3);
        assert_eq!(t[0], 6.0 * 0.1);
        assert!(Grid::from_now(2.0, 0.1, 1.0).is_err());
    }
}
