use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::error::SimError;
use crate::rng::{stream, SimRng};

const DEAD: u32 = u32::MAX;

/// One alive particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleRecord {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub birth_time: f64,
    pub position: f64,
    /// Time of this particle's split, drawn at birth.
    pub next_branch_time: f64,
    /// Label inherited from the ancestor alive at the last snapshot, if any.
    pub label: Option<u32>,
    /// Time up to which `position` has been sampled.
    pub(crate) updated_at: f64,
    /// Lineage position at the previous checkpoint (bridge correction).
    pub(crate) anchor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub id: u64,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub id: u64,
    pub position: f64,
    pub label: Option<u32>,
}

/// Entries of the optional event log.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Branch {
        time: f64,
        parent: u64,
        position: f64,
        children: [u64; 2],
    },
    Prune {
        time: f64,
        removed: Vec<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    time: f64,
    id: u64,
}

impl Eq for Pending {}

impl Ord for Pending {
    // Reversed so that `BinaryHeap` pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Binary branching Brownian motion driven by per-particle exponential clocks.
///
/// Branch times are exact. Positions are sampled lazily: a particle's
/// position is only refreshed (with a Gaussian increment whose variance is
/// the elapsed time) when it branches or when the population is brought to
/// a requested time. Between public calls every position is current at
/// [`Population::now`].
#[derive(Debug, Clone)]
pub struct Population {
    config: SimConfig,
    rng: SimRng,
    now: f64,
    alive: Vec<ParticleRecord>,
    slot_of: Vec<u32>,
    queue: BinaryHeap<Pending>,
    stale: usize,
    next_id: u64,
    rightmost: Extremum,
    leftmost: Extremum,
    event_count: u64,
    truncated: bool,
    pruned: bool,
    labeling_active: bool,
    log: Option<Vec<Event>>,
}

impl Population {
    /// A single root at the origin at time zero.
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let mut rng = stream(config.seed);
        let clock: f64 = rng.sample(Exp1);
        let root = ParticleRecord {
            id: 0,
            parent_id: None,
            birth_time: 0.0,
            position: 0.0,
            next_branch_time: clock,
            label: None,
            updated_at: 0.0,
            anchor: 0.0,
        };
        let mut queue = BinaryHeap::new();
        queue.push(Pending { time: clock, id: 0 });
        let origin = Extremum { id: 0, position: 0.0 };
        Ok(Self {
            config,
            rng,
            now: 0.0,
            alive: vec![root],
            slot_of: vec![0],
            queue,
            stale: 0,
            next_id: 1,
            rightmost: origin,
            leftmost: origin,
            event_count: 0,
            truncated: false,
            pruned: false,
            labeling_active: false,
            log: None,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    /// Alive particles in storage order (not sorted; see [`Self::snapshot`]).
    pub fn particles(&self) -> &[ParticleRecord] {
        &self.alive
    }

    pub fn rightmost(&self) -> Extremum {
        self.rightmost
    }

    pub fn leftmost(&self) -> Extremum {
        self.leftmost
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// True once any particle has been removed by [`Self::prune`].
    pub fn pruned(&self) -> bool {
        self.pruned
    }

    pub fn labeling_active(&self) -> bool {
        self.labeling_active
    }

    pub fn enable_event_log(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    pub fn event_log(&self) -> &[Event] {
        self.log.as_deref().unwrap_or(&[])
    }

    pub fn get(&self, id: u64) -> Option<&ParticleRecord> {
        match self.slot_of.get(id as usize) {
            Some(&slot) if slot != DEAD => Some(&self.alive[slot as usize]),
            _ => None,
        }
    }

    /// Time of the next pending branch event.
    pub fn next_event_time(&mut self) -> Option<f64> {
        self.drop_stale_head();
        self.queue.peek().map(|p| p.time)
    }

    /// Process every branch event with time `<= t`, then bring all positions
    /// to `t`.
    ///
    /// On budget exhaustion the population is left at the time of the
    /// offending event with all positions current and `truncated` set.
    pub fn advance_to(&mut self, t: f64) -> Result<(), SimError> {
        if self.truncated {
            return Err(self.budget_error());
        }
        if !(t >= self.now) {
            return Err(SimError::TimeReversal {
                now: self.now,
                target: t,
            });
        }
        while let Some(time) = self.next_event_time() {
            if time > t {
                break;
            }
            self.branch_next()?;
        }
        self.sync_positions(t);
        self.now = t;
        self.refresh_extrema();
        Ok(())
    }

    /// Process exactly one branch event and return its time.
    pub fn step_event(&mut self) -> Result<f64, SimError> {
        if self.truncated {
            return Err(self.budget_error());
        }
        let time = self
            .next_event_time()
            .expect("an alive particle always has a pending clock");
        self.branch_next()?;
        self.sync_positions(time);
        self.now = time;
        self.refresh_extrema();
        Ok(time)
    }

    /// Alive particles sorted by id.
    pub fn snapshot(&self) -> Vec<SnapshotEntry> {
        let mut out: Vec<SnapshotEntry> = self
            .alive
            .iter()
            .map(|p| SnapshotEntry {
                id: p.id,
                position: p.position,
                label: p.label,
            })
            .collect();
        out.sort_unstable_by_key(|e| e.id);
        out
    }

    /// Drop every particle strictly more than `gap` below the rightmost one.
    /// Returns the number removed.
    pub fn prune(&mut self, gap: f64) -> Result<usize, SimError> {
        if self.labeling_active {
            return Err(SimError::PruningForbidden);
        }
        if !(gap > 0.0) {
            return Err(SimError::InvalidArgument(format!(
                "prune gap must be positive, got {gap}"
            )));
        }
        let cutoff = self.rightmost.position - gap;
        if !(self.leftmost.position < cutoff) {
            return Ok(0);
        }
        let mut removed = Vec::new();
        let mut slot = 0;
        while slot < self.alive.len() {
            if self.alive[slot].position < cutoff {
                let gone = self.remove_slot(slot);
                removed.push(gone.id);
            } else {
                slot += 1;
            }
        }
        self.stale += removed.len();
        self.pruned = true;
        if self.stale > 2 * self.alive.len() + 1024 {
            let slot_of = &self.slot_of;
            self.queue.retain(|p| slot_of[p.id as usize] != DEAD);
            self.stale = 0;
        }
        self.refresh_extrema();
        let count = removed.len();
        if let Some(log) = self.log.as_mut() {
            removed.sort_unstable();
            log.push(Event::Prune {
                time: self.now,
                removed,
            });
        }
        Ok(count)
    }

    /// Store the current position of every particle as its lineage anchor.
    pub(crate) fn reset_anchors(&mut self) {
        for p in &mut self.alive {
            p.anchor = p.position;
        }
    }

    /// Give each alive particle the label returned by `label_of`, and mark
    /// lead tracking active (which forbids pruning from now on).
    pub(crate) fn apply_labels(&mut self, mut label_of: impl FnMut(&ParticleRecord) -> u32) {
        for p in &mut self.alive {
            p.label = Some(label_of(p));
        }
        self.labeling_active = true;
    }

    fn budget_error(&self) -> SimError {
        SimError::PopulationBudgetExceeded {
            time: self.now,
            max_particles: self.config.max_particles,
        }
    }

    fn drop_stale_head(&mut self) {
        while let Some(head) = self.queue.peek() {
            if self.slot_of[head.id as usize] != DEAD {
                break;
            }
            self.queue.pop();
            self.stale = self.stale.saturating_sub(1);
        }
    }

    /// Split the particle owning the earliest pending clock (which must be
    /// alive; callers go through `next_event_time` first).
    fn branch_next(&mut self) -> Result<(), SimError> {
        let Pending { time, id } = *self.queue.peek().expect("pending event");
        if self.alive.len() + 1 > self.config.max_particles {
            self.truncated = true;
            self.sync_positions(time);
            self.now = time;
            self.refresh_extrema();
            return Err(self.budget_error());
        }
        self.queue.pop();
        let slot = self.slot_of[id as usize] as usize;

        let elapsed = time - self.alive[slot].updated_at;
        let z: f64 = self.rng.sample(StandardNormal);
        let parent = &mut self.alive[slot];
        parent.position += elapsed.sqrt() * z;
        let (position, label, anchor) = (parent.position, parent.label, parent.anchor);

        let first = self.next_id;
        let second = first + 1;
        self.next_id += 2;
        let child = |cid: u64, rng: &mut SimRng| ParticleRecord {
            id: cid,
            parent_id: Some(id),
            birth_time: time,
            position,
            next_branch_time: time + rng.sample::<f64, _>(Exp1),
            label,
            updated_at: time,
            anchor,
        };
        let a = child(first, &mut self.rng);
        let b = child(second, &mut self.rng);
        self.queue.push(Pending {
            time: a.next_branch_time,
            id: first,
        });
        self.queue.push(Pending {
            time: b.next_branch_time,
            id: second,
        });

        self.slot_of[id as usize] = DEAD;
        self.slot_of.push(slot as u32);
        self.slot_of.push(self.alive.len() as u32);
        self.alive[slot] = a;
        self.alive.push(b);

        self.event_count += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(Event::Branch {
                time,
                parent: id,
                position,
                children: [first, second],
            });
        }
        Ok(())
    }

    fn remove_slot(&mut self, slot: usize) -> ParticleRecord {
        let gone = self.alive.swap_remove(slot);
        self.slot_of[gone.id as usize] = DEAD;
        if let Some(moved) = self.alive.get(slot) {
            self.slot_of[moved.id as usize] = slot as u32;
        }
        gone
    }

    fn sync_positions(&mut self, t: f64) {
        for p in &mut self.alive {
            let elapsed = t - p.updated_at;
            if elapsed > 0.0 {
                let z: f64 = self.rng.sample(StandardNormal);
                p.position += elapsed.sqrt() * z;
                p.updated_at = t;
            }
        }
    }

    fn refresh_extrema(&mut self) {
        let first = &self.alive[0];
        let mut hi = Extremum {
            id: first.id,
            position: first.position,
        };
        let mut lo = hi;
        for p in &self.alive[1..] {
            if p.position > hi.position || (p.position == hi.position && p.id < hi.id) {
                hi = Extremum {
                    id: p.id,
                    position: p.position,
                };
            }
            if p.position < lo.position || (p.position == lo.position && p.id < lo.id) {
                lo = Extremum {
                    id: p.id,
                    position: p.position,
                };
            }
        }
        self.rightmost = hi;
        self.leftmost = lo;
    }
}
