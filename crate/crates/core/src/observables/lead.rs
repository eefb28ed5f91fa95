use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::crossing::{CrossingKind, CrossingRecord};
use super::grid::{index_of, Grid};
use crate::error::SimError;
use crate::sim::Population;

/// A time-`s` particle and the data kept about it once it becomes a label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelInfo {
    pub label: u32,
    pub particle_id: u64,
    /// Position at the snapshot time.
    pub position: f64,
    /// Absolute time at which this particle splits.
    pub first_branch_time: f64,
}

/// Partition of the time-`s` population into labels inherited by all
/// descendants.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotLabeling {
    pub s: f64,
    /// Particle id at time `s` to label.
    pub labels: BTreeMap<u64, u32>,
    /// Indexed by label.
    pub members: Vec<LabelInfo>,
    /// Label of the leftmost particle at time `s`.
    pub leftmost_label: u32,
    pub rightmost_label: u32,
    /// Labels that have owned the rightmost particle since `s`.
    pub led: BTreeSet<u32>,
}

impl SnapshotLabeling {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Bring a fresh population to `t` along the checkpoint grid.
///
/// Trackers that start later (lead tracking at a snapshot time) walk the
/// same grid from zero, so a given seed yields the same realization
/// whichever observable is being measured.
pub fn advance_on_grid(pop: &mut Population, t: f64) -> Result<(), SimError> {
    let dt = pop.config().dt;
    let target = index_of(t, dt);
    if (target as f64 * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(SimError::InvalidArgument(format!("t={t} is not a multiple of dt={dt}")));
    }
    for k in index_of(pop.now(), dt) + 1..=target {
        pop.advance_to(k as f64 * dt)?;
    }
    Ok(())
}

/// Label every particle alive now, in id order.
pub fn assign_labels(pop: &mut Population) -> Result<SnapshotLabeling, SimError> {
    if pop.truncated() {
        return Err(SimError::TruncatedPopulation);
    }
    if pop.pruned() {
        return Err(SimError::PruningForbidden);
    }
    let mut order: Vec<(u64, f64, f64)> = pop
        .particles()
        .iter()
        .map(|p| (p.id, p.position, p.next_branch_time))
        .collect();
    order.sort_unstable_by_key(|e| e.0);

    let mut labels = BTreeMap::new();
    let members: Vec<LabelInfo> = order
        .iter()
        .enumerate()
        .map(|(i, &(id, position, first_branch_time))| {
            labels.insert(id, i as u32);
            LabelInfo {
                label: i as u32,
                particle_id: id,
                position,
                first_branch_time,
            }
        })
        .collect();
    pop.apply_labels(|p| labels[&p.id]);

    Ok(SnapshotLabeling {
        s: pop.now(),
        leftmost_label: labels[&pop.leftmost().id],
        rightmost_label: labels[&pop.rightmost().id],
        labels,
        members,
        led: BTreeSet::new(),
    })
}

/// `tau_u` for every label: the first checkpoint after `s` (as an offset
/// from `s`) at which the rightmost particle carries that label.
pub fn track_tau(
    pop: &mut Population,
    labeling: &mut SnapshotLabeling,
    horizon: f64,
) -> Result<BTreeMap<u32, CrossingRecord>, SimError> {
    track_tau_with(pop, labeling, horizon, |_, _| {})
}

/// As [`track_tau`], calling `observe(offset, labeling)` after every
/// checkpoint.
pub fn track_tau_with(
    pop: &mut Population,
    labeling: &mut SnapshotLabeling,
    horizon: f64,
    mut observe: impl FnMut(f64, &SnapshotLabeling),
) -> Result<BTreeMap<u32, CrossingRecord>, SimError> {
    if pop.config().prune_gap.is_some() || pop.pruned() {
        return Err(SimError::PruningForbidden);
    }
    if (pop.now() - labeling.s).abs() > 1e-12 {
        return Err(SimError::InvalidArgument(format!(
            "population is at t={}, labeling was taken at s={}",
            pop.now(),
            labeling.s
        )));
    }
    let dt = pop.config().dt;
    let start = index_of(labeling.s, dt);
    let mut tau: Vec<Option<f64>> = vec![None; labeling.len()];
    let mut truncated = false;

    for (k, t) in (start + 1..).zip(Grid::from_now(labeling.s, dt, horizon)?.times()) {
        if labeling.led.len() == labeling.len() {
            break;
        }
        if pop.advance_to(t).is_err() {
            truncated = true;
            break;
        }
        let offset = (k - start) as f64 * dt;
        let leader = pop
            .get(pop.rightmost().id)
            .and_then(|p| p.label)
            .expect("every particle carries a label after assign_labels");
        if labeling.led.insert(leader) {
            tau[leader as usize] = Some(offset);
        }
        observe(offset, labeling);
    }

    let bound = if truncated {
        pop.now() - labeling.s
    } else {
        horizon - labeling.s
    };
    Ok(tau
        .into_iter()
        .enumerate()
        .map(|(label, hit)| {
            let label = label as u32;
            let rec = match hit {
                Some(t) => CrossingRecord::hit(CrossingKind::TauLabel, label as f64, t, dt),
                None => CrossingRecord::censored(CrossingKind::TauLabel, label as f64, bound, dt, truncated),
            };
            (label, rec)
        })
        .collect())
}

/// `Theta_s`, the largest `tau_u`. Censored when any label is censored, in
/// which case the time is a lower bound. `threshold` holds the label that
/// attains the maximum (smallest label on ties).
pub fn theta(tau_map: &BTreeMap<u32, CrossingRecord>) -> Result<CrossingRecord, SimError> {
    let mut best: Option<&CrossingRecord> = None;
    for rec in tau_map.values() {
        if best.is_none_or(|b| rec.time > b.time) {
            best = Some(rec);
        }
    }
    let best = best.ok_or_else(|| SimError::InvalidArgument("theta of an empty tau map".into()))?;
    let censored = tau_map.values().any(|r| r.censored);
    let truncated = tau_map.values().any(|r| r.truncated);
    Ok(CrossingRecord {
        kind: CrossingKind::Theta,
        threshold: best.threshold,
        time: best.time,
        resolution: best.resolution,
        censored,
        truncated,
    })
}
