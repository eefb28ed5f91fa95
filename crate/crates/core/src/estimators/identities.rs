//! Many-to-one and many-to-two identity checks.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mc::McEstimate;
use super::quad::integrate;
use super::McRun;
use crate::analytic::bridge_exp_moment;
use crate::error::EstimatorError;
use crate::exec::map_replicates;
use crate::rng::{mix64, replicate_stream};
use crate::sim::{Event, Population, SimConfig};

/// A functional of a discretized path `(x_0 = 0, x_1, ..., x_steps)`.
pub trait PathFunctional: Sync {
    fn eval(&self, path: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Sync> PathFunctional for F {
    fn eval(&self, path: &[f64]) -> f64 {
        self(path)
    }
}

/// The three functionals used by the validation suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Canonical {
    One,
    EndpointNonNegative,
    ExpSqrt2Endpoint,
}

impl Canonical {
    pub const ALL: [Canonical; 3] = [
        Canonical::One,
        Canonical::EndpointNonNegative,
        Canonical::ExpSqrt2Endpoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Canonical::One => "F=1",
            Canonical::EndpointNonNegative => "F=1{B_t>=0}",
            Canonical::ExpSqrt2Endpoint => "F=exp(sqrt2 B_t)",
        }
    }
}

impl PathFunctional for Canonical {
    fn eval(&self, path: &[f64]) -> f64 {
        let end = *path.last().expect("non-empty path");
        match self {
            Canonical::One => 1.0,
            Canonical::EndpointNonNegative => f64::from(u8::from(end >= 0.0)),
            Canonical::ExpSqrt2Endpoint => (SQRT_2 * end).exp(),
        }
    }
}

const RHS_STREAM: u64 = 0x5EED_0001;

/// Both sides of `E[sum_{u in N(t)} F(X_u)] = e^t E[F(B)]`.
///
/// The left side averages `sum_u F(path of u)` over BBM replicates whose
/// lineage paths are read at `steps` equally spaced checkpoints. The right
/// side averages `F` over single Brownian paths drawn in antithetic pairs
/// `(B, -B)` and multiplies by `e^t`; the standard error is computed from
/// the pair means. Odd functionals therefore come out exact.
pub fn many_to_one_check(
    f: &impl PathFunctional,
    t: f64,
    steps: usize,
    run: &McRun,
) -> Result<(McEstimate, McEstimate), EstimatorError> {
    if !(t > 0.0) || steps == 0 || run.replicates < 2 {
        return Err(EstimatorError::InvalidInput(
            "need t > 0, steps >= 1 and at least two replicates".into(),
        ));
    }
    let dt = t / steps as f64;
    let lhs: Vec<Option<f64>> = map_replicates(run.replicates, run.master_seed, run.exec, |i, _| {
        let cfg = SimConfig {
            seed: mix64(run.master_seed, i),
            horizon: t + dt,
            dt,
            max_particles: run.max_particles,
            ..SimConfig::default()
        };
        lineage_sum(f, cfg, steps).ok()
    });
    let truncated = lhs.iter().filter(|v| v.is_none()).count();
    if truncated > 0 {
        return Err(EstimatorError::BudgetExceeded(truncated));
    }
    let lhs: Vec<f64> = lhs.into_iter().flatten().collect();

    let pairs = run.replicates / 2;
    let rhs_seed = mix64(run.master_seed, RHS_STREAM);
    let pair_means = map_replicates(pairs, rhs_seed, run.exec, |_, rng| {
        let mut path = vec![0.0; steps + 1];
        let mut mirror = vec![0.0; steps + 1];
        for k in 1..=steps {
            let z: f64 = rng.sample(StandardNormal);
            path[k] = path[k - 1] + dt.sqrt() * z;
            mirror[k] = -path[k];
        }
        0.5 * (f.eval(&path) + f.eval(&mirror))
    });
    let growth = t.exp();
    let rhs = McEstimate::from_samples(&pair_means).scaled(growth);
    let rhs = McEstimate { n: 2 * pairs, ..rhs };
    Ok((McEstimate::from_samples(&lhs), rhs))
}

/// `sum_u F(path of u)` for one realization.
fn lineage_sum(f: &impl PathFunctional, cfg: SimConfig, steps: usize) -> Result<f64, EstimatorError> {
    let dt = cfg.dt;
    let mut pop = Population::new(cfg)?;
    pop.enable_event_log();
    let mut paths: HashMap<u64, Vec<f64>> = HashMap::from([(0, vec![0.0])]);
    let mut seen = 0;
    for k in 1..=steps {
        pop.advance_to(k as f64 * dt)?;
        for ev in &pop.event_log()[seen..] {
            if let Event::Branch { parent, children, .. } = ev {
                let path = paths.remove(parent).expect("parent path");
                paths.insert(children[1], path.clone());
                paths.insert(children[0], path);
            }
        }
        seen = pop.event_log().len();
        for p in pop.particles() {
            paths.get_mut(&p.id).expect("alive path").push(p.position);
        }
    }
    let mut ids: Vec<u64> = paths.keys().copied().collect();
    ids.sort_unstable();
    Ok(ids.iter().map(|id| f.eval(&paths[id])).sum())
}

/// `sum_{u in I} sum_{w != u} exp(sqrt2 (X_w - X_u))` over the positions of
/// one population at time `k`, where `I` holds the particles with
/// `lo * k <= X_u <= hi * k`.
pub fn pair_sum(positions: &[f64], k: f64, window: (f64, f64)) -> f64 {
    let total: f64 = positions.iter().map(|x| (SQRT_2 * x).exp()).sum();
    positions
        .iter()
        .filter(|&&x| in_window(x, k, window))
        .map(|&x| (-SQRT_2 * x).exp() * (total - (SQRT_2 * x).exp()))
        .sum()
}

fn in_window(x: f64, k: f64, (lo, hi): (f64, f64)) -> bool {
    let below = if lo == f64::NEG_INFINITY { true } else { lo * k <= x };
    let above = if hi == f64::INFINITY { true } else { x <= hi * k };
    below && above
}

/// Expected pair sum via the common-ancestor integral
/// `2 int_0^k e^{3k-2s} int_{lo k}^{hi k} e^{-sqrt2 x} P[B_k in dx] E[e^{sqrt2 b_s(x)}] ds`,
/// where `b(x)` is a Brownian bridge from 0 to `x` on `[0, k]`.
pub fn pair_sum_expectation(k: f64, window: (f64, f64)) -> Result<f64, EstimatorError> {
    if !(k > 0.0) || !(window.0 <= window.1) {
        return Err(EstimatorError::InvalidInput(format!(
            "need k > 0 and an ordered window, got k={k}, {window:?}"
        )));
    }
    let density = |x: f64| (-x * x / (2.0 * k)).exp() / (2.0 * PI * k).sqrt();
    let outer = |s: f64| {
        // As a function of x the integrand is Gaussian around -sqrt2 (k - s)
        // with variance k; twelve standard deviations capture it.
        let centre = -SQRT_2 * (k - s);
        let reach = 12.0 * k.sqrt();
        let lo = (window.0 * k).max(centre - reach);
        let hi = (window.1 * k).min(centre + reach);
        if lo >= hi {
            return 0.0;
        }
        let inner = |x: f64| (-SQRT_2 * x).exp() * density(x) * bridge_exp_moment(k, s, x).expect("0 <= s <= k");
        2.0 * (3.0 * k - 2.0 * s).exp() * integrate(&inner, lo, hi, 1e-11)
    };
    Ok(integrate(&outer, 0.0, k, 1e-9))
}

/// Monte Carlo pair sum at time `k` next to its quadrature value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSumCheck {
    pub estimate: McEstimate,
    pub quadrature: f64,
}

impl PairSumCheck {
    pub fn within_se(&self, k: f64) -> bool {
        (self.estimate.mean - self.quadrature).abs() <= k * self.estimate.std_error
    }
}

pub fn many_to_two_check(k: f64, window: (f64, f64), run: &McRun) -> Result<PairSumCheck, EstimatorError> {
    let quadrature = pair_sum_expectation(k, window)?;
    let sums: Vec<Option<f64>> = map_replicates(run.replicates, run.master_seed, run.exec, |i, _| {
        let cfg = SimConfig {
            seed: mix64(run.master_seed, i),
            horizon: k,
            dt: k / 2.0,
            max_particles: run.max_particles,
            ..SimConfig::default()
        };
        let mut pop = Population::new(cfg).ok()?;
        pop.advance_to(k).ok()?;
        let xs: Vec<f64> = pop.particles().iter().map(|p| p.position).collect();
        Some(pair_sum(&xs, k, window))
    });
    let truncated = sums.iter().filter(|v| v.is_none()).count();
    if truncated > 0 {
        return Err(EstimatorError::BudgetExceeded(truncated));
    }
    let sums: Vec<f64> = sums.into_iter().flatten().collect();
    Ok(PairSumCheck {
        estimate: McEstimate::from_samples(&sums),
        quadrature,
    })
}

/// Monte Carlo of `E[exp(sqrt2 B_s) | B_k = x]` from Brownian bridges built
/// as `B_s - (s/k) B_k + (s/k) x`.
pub fn bridge_moment_mc(k: f64, s: f64, x: f64, n: usize, seed: u64) -> McEstimate {
    let mut rng = replicate_stream(seed, 0);
    let samples: Vec<f64> = (0..n)
        .map(|_| {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let b_s = s.sqrt() * z1;
            let b_k = b_s + (k - s).sqrt() * z2;
            (SQRT_2 * (b_s - s / k * b_k + s / k * x)).exp()
        })
        .collect();
    McEstimate::from_samples(&samples)
}
