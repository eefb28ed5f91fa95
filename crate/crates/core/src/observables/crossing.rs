use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::analytic::m_of_t;
use crate::error::SimError;
use crate::rng::{mix64, stream, SimRng};
use crate::sim::{Population, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    /// First `t >= 1` with `R(t) - m(t) > y`.
    TOfY,
    /// First time after the snapshot that a label owns the rightmost particle.
    TauLabel,
    /// Time until every label has led.
    Theta,
    /// First time one population leads another by more than `z`.
    TwoBbm,
}

/// A first-passage measurement read off the checkpoint grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub kind: CrossingKind,
    /// `y`, `z`, or the label id, depending on `kind`.
    pub threshold: f64,
    /// First-passage time; a lower bound when `censored`.
    pub time: f64,
    pub resolution: f64,
    pub censored: bool,
    /// Censoring was caused by the particle budget rather than the horizon.
    pub truncated: bool,
}

impl CrossingRecord {
    pub(crate) fn hit(kind: CrossingKind, threshold: f64, time: f64, dt: f64) -> Self {
        Self {
            kind,
            threshold,
            time,
            resolution: dt,
            censored: false,
            truncated: false,
        }
    }

    pub(crate) fn censored(kind: CrossingKind, threshold: f64, bound: f64, dt: f64, truncated: bool) -> Self {
        Self {
            kind,
            threshold,
            time: bound,
            resolution: dt,
            censored: true,
            truncated,
        }
    }
}

const BRIDGE_STREAM: u64 = 0xB41D_6E00;

/// `T(y)` on a single realization. See [`track_t_coupled`].
pub fn track_t(pop: &mut Population, y: f64, horizon: f64) -> Result<CrossingRecord, SimError> {
    Ok(track_t_coupled(pop, &[y], horizon)?[0])
}

/// `T(y)` for several thresholds on one realization.
///
/// Walks the checkpoint grid from `pop.now()` to `horizon` and reports, per
/// threshold, the first checkpoint `t >= 1` where `R(t) - m(t) > y`. With
/// `bridge_refine` set, a crossing inside a step is also declared with the
/// Brownian-bridge probability `exp(-2ab/dt)` for each lineage whose
/// endpoints sit at distances `a`, `b` below the (linearised) threshold; one
/// uniform per lineage is shared by all thresholds so that the coupled
/// results stay ordered. The population is pruned at every checkpoint when
/// its config carries a `prune_gap`.
pub fn track_t_coupled(pop: &mut Population, ys: &[f64], horizon: f64) -> Result<Vec<CrossingRecord>, SimError> {
    if let Some(bad) = ys.iter().find(|y| !(**y > 0.0)) {
        return Err(SimError::InvalidArgument(format!(
            "threshold y must be positive, got {bad}"
        )));
    }
    let cfg = pop.config().clone();
    let grid = Grid::from_now(pop.now(), cfg.dt, horizon)?;
    let mut found: Vec<Option<f64>> = vec![None; ys.len()];
    let mut truncated = false;

    let check = |pop: &Population, t: f64, found: &mut [Option<f64>]| {
        if t < 1.0 - 1e-12 {
            return;
        }
        let lead = pop.rightmost().position - m_of_t(t).expect("t >= 1");
        for (slot, &y) in found.iter_mut().zip(ys) {
            if slot.is_none() && lead > y {
                *slot = Some(t);
            }
        }
    };

    check(pop, pop.now(), &mut found);
    // Bridge uniforms come from their own stream so that switching the
    // correction on leaves the realization itself unchanged.
    let mut bridge_rng = stream(mix64(cfg.seed, BRIDGE_STREAM));
    if cfg.bridge_refine {
        pop.reset_anchors();
    }
    let mut prev = pop.now();
    for t in grid.times() {
        if found.iter().all(Option::is_some) {
            break;
        }
        if pop.advance_to(t).is_err() {
            truncated = true;
            break;
        }
        if cfg.bridge_refine {
            if prev >= 1.0 - 1e-12 {
                bridge_crossings(pop, &mut bridge_rng, ys, prev, t, &mut found);
            }
            pop.reset_anchors();
        }
        check(pop, t, &mut found);
        if let Some(gap) = cfg.prune_gap {
            pop.prune(gap)?;
        }
        prev = t;
    }

    let bound = if truncated { pop.now() } else { horizon };
    Ok(ys
        .iter()
        .zip(found)
        .map(|(&y, hit)| match hit {
            Some(t) => CrossingRecord::hit(CrossingKind::TOfY, y, t, cfg.dt),
            None => CrossingRecord::censored(CrossingKind::TOfY, y, bound, cfg.dt, truncated),
        })
        .collect())
}

fn bridge_crossings(pop: &Population, rng: &mut SimRng, ys: &[f64], t0: f64, t1: f64, found: &mut [Option<f64>]) {
    let (m0, m1) = (m_of_t(t0).expect("t0 >= 1"), m_of_t(t1).expect("t1 >= 1"));
    let span = t1 - t0;
    for (x0, x1) in pop.particles().iter().map(|p| (p.anchor, p.position)) {
        let u: f64 = rng.random();
        for (slot, &y) in found.iter_mut().zip(ys) {
            if slot.is_some() {
                continue;
            }
            let a = m0 + y - x0;
            let b = m1 + y - x1;
            if a > 0.0 && b > 0.0 && u < (-2.0 * a * b / span).exp() {
                *slot = Some(t1);
            }
        }
    }
}

/// First time `R^A(t) - R^B(t) > z` for two independent populations rooted
/// at the origin. See [`two_bbm_coupled`].
pub fn two_bbm_t(config_a: SimConfig, config_b: SimConfig, z: f64, horizon: f64) -> Result<CrossingRecord, SimError> {
    Ok(two_bbm_coupled(config_a, config_b, &[z], horizon)?[0])
}

/// Lead times of population A over population B for several `z` on one
/// pair of realizations. Both run on the checkpoint grid of `config_a`
/// (the two configs must agree on `dt`).
pub fn two_bbm_coupled(
    config_a: SimConfig,
    config_b: SimConfig,
    zs: &[f64],
    horizon: f64,
) -> Result<Vec<CrossingRecord>, SimError> {
    if let Some(bad) = zs.iter().find(|z| !(**z >= 0.0)) {
        return Err(SimError::InvalidArgument(format!("z must be non-negative, got {bad}")));
    }
    if config_a.dt != config_b.dt {
        return Err(SimError::InvalidArgument("both populations must share dt".into()));
    }
    let mut a = Population::new(config_a)?;
    let mut b = Population::new(config_b)?;
    let dt = a.config().dt;
    let gaps = (a.config().prune_gap, b.config().prune_gap);
    let grid = Grid::from_now(0.0, dt, horizon)?;
    let mut found: Vec<Option<f64>> = vec![None; zs.len()];
    let mut truncated = false;
    let mut reached = 0.0;

    let check = |a: &Population, b: &Population, t: f64, found: &mut [Option<f64>]| {
        let lead = a.rightmost().position - b.rightmost().position;
        for (slot, &z) in found.iter_mut().zip(zs) {
            if slot.is_none() && lead > z {
                *slot = Some(t);
            }
        }
    };
    check(&a, &b, 0.0, &mut found);
    for t in grid.times() {
        if found.iter().all(Option::is_some) {
            break;
        }
        if a.advance_to(t).is_err() || b.advance_to(t).is_err() {
            truncated = true;
            break;
        }
        reached = t;
        check(&a, &b, t, &mut found);
        if let Some(gap) = gaps.0 {
            a.prune(gap)?;
        }
        if let Some(gap) = gaps.1 {
            b.prune(gap)?;
        }
    }

    let bound = if truncated { reached } else { horizon };
    Ok(zs
        .iter()
        .zip(found)
        .map(|(&z, hit)| match hit {
            Some(t) => CrossingRecord::hit(CrossingKind::TwoBbm, z, t, dt),
            None => CrossingRecord::censored(CrossingKind::TwoBbm, z, bound, dt, truncated),
        })
        .collect())
}
