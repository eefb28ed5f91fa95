use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::record::{key, to_json, Observed, ReplicateResult};
use super::spec::{ExperimentSpec, Kind};
use crate::error::{HarnessError, SimError};
use crate::exec::{map_indices, with_threads, Execution};
use crate::observables::{
    additive_martingale, advance_on_grid, assign_labels, cohort_count, theta, track_t_coupled, track_tau,
    two_bbm_coupled, CrossingRecord,
};
use crate::rng::mix64;
use crate::sim::Population;

/// Execution settings that do not affect results.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub exec: Execution,
    /// Fill `wall_time_ms` in every record.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub output_path: PathBuf,
    pub manifest_path: PathBuf,
    pub config_digest: String,
    pub replicates: usize,
    pub truncated_replicates: usize,
}

impl RunSummary {
    /// 0 on success, 2 when any replicate hit the particle budget.
    pub fn exit_code(&self) -> i32 {
        if self.truncated_replicates > 0 {
            2
        } else {
            0
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    spec: &'a ExperimentSpec,
    config_digest: &'a str,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    replicates: usize,
    truncated_replicates: usize,
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// `results.jsonl` -> `results.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}

/// Run every replicate of a per-replicate experiment and write the JSONL
/// results (in replicate order) plus the manifest.
pub fn run(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunSummary, HarnessError> {
    if !spec.kind.is_replicated() {
        return Err(HarnessError::Invalid(format!(
            "{} does not produce replicate records",
            spec.kind
        )));
    }
    spec.validate()?;
    let started = unix_ms();
    let digest = spec.digest();
    let records = with_threads(opts.threads, || {
        map_indices(spec.replicates, opts.exec, |i| {
            let clock = Instant::now();
            let mut rec = replicate(spec, i, &digest);
            if opts.timing {
                rec.wall_time_ms = Some(clock.elapsed().as_secs_f64() * 1e3);
            }
            rec
        })
    });

    let mut out = BufWriter::new(File::create(&spec.output_path)?);
    for rec in &records {
        writeln!(out, "{}", to_json(rec))?;
    }
    out.flush()?;

    let truncated = records.iter().filter(|r| r.truncated).count();
    let manifest = manifest_path(&spec.output_path);
    let body = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        spec,
        config_digest: &digest,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        replicates: records.len(),
        truncated_replicates: truncated,
    };
    std::fs::write(&manifest, to_json(&body) + "\n")?;
    Ok(RunSummary {
        output_path: spec.output_path.clone(),
        manifest_path: manifest,
        config_digest: digest,
        replicates: records.len(),
        truncated_replicates: truncated,
    })
}

/// Replicate `index` of `spec`, computed from its seed alone.
pub fn replicate(spec: &ExperimentSpec, index: u64, digest: &str) -> ReplicateResult {
    let seed = mix64(spec.master_seed, index);
    let mut observables = BTreeMap::new();
    let truncated = measure(spec, seed, &mut observables);
    ReplicateResult {
        replicate_index: index,
        seed_used: seed,
        observables,
        truncated,
        wall_time_ms: None,
        config_digest: digest.to_owned(),
    }
}

fn crossing(rec: &CrossingRecord) -> Observed {
    Observed {
        value: rec.time,
        censored: rec.censored,
    }
}

/// Fill `out` and report whether the particle budget was hit.
fn measure(spec: &ExperimentSpec, seed: u64, out: &mut BTreeMap<String, Observed>) -> bool {
    let p = &spec.params;
    let cfg = spec.sim_config(seed);
    let budget_hit = |e: &SimError| {
        matches!(
            e,
            SimError::PopulationBudgetExceeded { .. } | SimError::TruncatedPopulation
        )
    };
    match spec.kind {
        Kind::Simulate | Kind::Cohort => {
            let t = spec.observation_time();
            let mut pop = Population::new(cfg).expect("validated config");
            let reached = walk(&mut pop, t);
            let obs = |v: f64| {
                if reached {
                    Observed::exact(v)
                } else {
                    Observed::lower_bound(v)
                }
            };
            out.insert("N".into(), obs(pop.len() as f64));
            if spec.kind == Kind::Simulate {
                out.insert("R".into(), obs(pop.rightmost().position));
                out.insert("L".into(), obs(pop.leftmost().position));
                out.insert("W".into(), obs(additive_martingale(&pop)));
            } else {
                for &a in &p.a {
                    out.insert(key("Z", a), obs(cohort_count(&pop, a).count as f64));
                }
            }
            !reached
        }
        Kind::Crossing => {
            let mut pop = Population::new(cfg).expect("validated config");
            let recs = track_t_coupled(&mut pop, &p.y, p.horizon).expect("validated thresholds");
            for (y, rec) in p.y.iter().zip(&recs) {
                out.insert(key("T", *y), crossing(rec));
            }
            recs.iter().any(|r| r.truncated)
        }
        Kind::TwoBbm => {
            let side = |k: u64| spec.sim_config(mix64(seed, k));
            let recs = two_bbm_coupled(side(0), side(1), &p.z, p.horizon).expect("validated thresholds");
            for (z, rec) in p.z.iter().zip(&recs) {
                out.insert(key("calT", *z), crossing(rec));
            }
            recs.iter().any(|r| r.truncated)
        }
        Kind::Lead | Kind::Theta => {
            let mut truncated = false;
            for &s in &p.s {
                // A fresh population per snapshot time: the grid walk makes
                // every copy follow the same realization up to `s`.
                let mut pop = Population::new(cfg.clone()).expect("validated config");
                let tracked = advance_on_grid(&mut pop, s).and_then(|()| {
                    let mut labeling = assign_labels(&mut pop)?;
                    let map = track_tau(&mut pop, &mut labeling, p.horizon)?;
                    Ok((labeling, map))
                });
                let (labeling, map) = match tracked {
                    Ok(v) => v,
                    Err(e) => {
                        debug_assert!(budget_hit(&e), "{e}");
                        truncated = true;
                        let names: &[&str] = if spec.kind == Kind::Lead {
                            &["tau_leftmost", "tau_rightmost"]
                        } else {
                            &["theta", "tau_leftmost"]
                        };
                        for name in names {
                            out.insert(key(name, s), Observed::lower_bound(0.0));
                        }
                        continue;
                    }
                };
                truncated |= map.values().any(|r| r.truncated);
                out.insert(key("labels", s), Observed::exact(labeling.len() as f64));
                out.insert(key("tau_leftmost", s), crossing(&map[&labeling.leftmost_label]));
                if spec.kind == Kind::Lead {
                    out.insert(key("tau_rightmost", s), crossing(&map[&labeling.rightmost_label]));
                    out.insert(key("led", s), Observed::exact(labeling.led.len() as f64));
                } else {
                    let th = theta(&map).expect("non-empty labeling");
                    out.insert(key("theta", s), crossing(&th));
                }
            }
            truncated
        }
        Kind::Validate | Kind::Fit => unreachable!("not a replicated kind"),
    }
}

/// Walk the checkpoint grid to `t`, pruning if configured. False when the
/// budget stopped the walk early.
fn walk(pop: &mut Population, t: f64) -> bool {
    let dt = pop.config().dt;
    let gap = pop.config().prune_gap;
    let steps = (t / dt).round() as u64;
    for k in 1..=steps {
        if pop.advance_to(k as f64 * dt).is_err() {
            return false;
        }
        if let Some(g) = gap {
            pop.prune(g).expect("positive gap, no labels");
        }
    }
    true
}
