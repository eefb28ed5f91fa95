use serde::{Deserialize, Serialize};

use super::mc::McEstimate;
use super::McRun;
use crate::analytic::{bramson_upper, lalley_sellke_bound, m_of_t, BoundSpec};
use crate::error::EstimatorError;
use crate::exec::map_replicates;
use crate::rng::mix64;
use crate::sim::{Population, SimConfig};

/// Empirical `P[R(t) > m(t) + y]` next to the front-tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontTail {
    pub y: f64,
    pub estimate: McEstimate,
    pub bound: f64,
    /// `2 <= y <= sqrt t`, where the bound is claimed.
    pub in_bound_domain: bool,
}

/// Final positions `(R(t), L(t))` of independent replicates.
pub fn front_samples(t: f64, run: &McRun) -> Result<Vec<(f64, f64)>, EstimatorError> {
    if !(t > 0.0) {
        return Err(EstimatorError::InvalidInput(format!("need t > 0, got {t}")));
    }
    let out: Vec<Option<(f64, f64)>> = map_replicates(run.replicates, run.master_seed, run.exec, |i, _| {
        let cfg = SimConfig {
            seed: mix64(run.master_seed, i),
            horizon: 2.0 * t,
            dt: t,
            max_particles: run.max_particles,
            ..SimConfig::default()
        };
        let mut pop = Population::new(cfg).ok()?;
        pop.advance_to(t).ok()?;
        Some((pop.rightmost().position, pop.leftmost().position))
    });
    let truncated = out.iter().filter(|v| v.is_none()).count();
    if truncated > 0 {
        return Err(EstimatorError::BudgetExceeded(truncated));
    }
    Ok(out.into_iter().flatten().collect())
}

/// Tail frequencies for several `y` from one set of replicates, so the
/// estimates are ordered in `y` realization by realization.
pub fn front_tail_estimate(
    t: f64,
    ys: &[f64],
    run: &McRun,
    spec: &BoundSpec,
) -> Result<Vec<FrontTail>, EstimatorError> {
    let samples = front_samples(t, run)?;
    let m = m_of_t(t)?;
    Ok(ys
        .iter()
        .map(|&y| {
            let hits = samples.iter().filter(|(r, _)| *r > m + y).count();
            FrontTail {
                y,
                estimate: McEstimate::frequency(hits, samples.len()),
                bound: bramson_upper(y, spec),
                in_bound_domain: (2.0..=t.sqrt()).contains(&y),
            }
        })
        .collect())
}

/// `P[L(s) <= -mu s]` and `P[R(s) >= mu s]` from the same replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeftTail {
    pub s: f64,
    pub mu: f64,
    pub left: McEstimate,
    pub right: McEstimate,
    pub bound: f64,
}

impl LeftTail {
    /// `left <= bound + k SE`.
    pub fn under_bound(&self, k: f64) -> bool {
        self.left.mean <= self.bound + k * self.left.std_error
    }

    pub fn symmetric_within(&self, k: f64) -> bool {
        self.left.agrees_with(&self.right, k)
    }
}

pub fn left_tail_estimate(s: f64, mu: f64, run: &McRun) -> Result<LeftTail, EstimatorError> {
    let bound = lalley_sellke_bound(s, mu)?;
    let samples = front_samples(s, run)?;
    let n = samples.len();
    let left = samples.iter().filter(|(_, l)| *l <= -mu * s).count();
    let right = samples.iter().filter(|(r, _)| *r >= mu * s).count();
    Ok(LeftTail {
        s,
        mu,
        left: McEstimate::frequency(left, n),
        right: McEstimate::frequency(right, n),
        bound,
    })
}
