use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::sim::{Population, SimConfig};

/// `Z_a(k)`, the number of particles at or below `-a k` at time `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortCount {
    pub k: f64,
    pub a: f64,
    pub count: u64,
    /// Set when the slope came from `a = sqrt2 (1 - delta/2)`.
    pub delta_variant: Option<f64>,
}

pub fn cohort_count(pop: &Population, a: f64) -> CohortCount {
    let k = pop.now();
    // At k = 0 the level is the origin whatever the slope (and a = inf
    // must not turn into NaN).
    let level = if k == 0.0 { 0.0 } else { -a * k };
    let count = pop.particles().iter().filter(|p| p.position <= level).count() as u64;
    CohortCount {
        k,
        a,
        count,
        delta_variant: None,
    }
}

/// `N_delta(k) = Z_{sqrt2 (1 - delta/2)}(k)`.
pub fn delta_cohort_count(pop: &Population, delta: f64) -> CohortCount {
    CohortCount {
        delta_variant: Some(delta),
        ..cohort_count(pop, SQRT_2 * (1.0 - delta / 2.0))
    }
}

/// Additive martingale `W(t) = sum_u exp(sqrt2 X_u(t) - 2t)`.
pub fn additive_martingale(pop: &Population) -> f64 {
    let t = pop.now();
    pop.particles()
        .iter()
        .map(|p| (SQRT_2 * p.position - 2.0 * t).exp())
        .sum()
}

/// State of the population at the `M`-th branching time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSample {
    pub sigma: f64,
    pub leftmost: f64,
    pub alive: usize,
    pub distinct_positions: usize,
}

/// Run a population until it holds `M + 1` particles. The time is exact
/// (no grid involved).
pub fn sigma_m_sample(config: SimConfig, m: u64) -> Result<SigmaSample, SimError> {
    if m < 1 {
        return Err(SimError::InvalidArgument("M must be at least 1".into()));
    }
    let mut pop = Population::new(config)?;
    let mut sigma = 0.0;
    for _ in 0..m {
        sigma = pop.step_event()?;
    }
    let mut positions: Vec<f64> = pop.particles().iter().map(|p| p.position).collect();
    positions.sort_unstable_by(f64::total_cmp);
    positions.dedup();
    Ok(SigmaSample {
        sigma,
        leftmost: pop.leftmost().position,
        alive: pop.len(),
        distinct_positions: positions.len(),
    })
}
