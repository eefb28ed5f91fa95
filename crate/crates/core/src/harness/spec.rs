use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::HarnessError;
use crate::sim::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Simulate,
    Crossing,
    Lead,
    Theta,
    TwoBbm,
    Cohort,
    Validate,
    Fit,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Simulate,
        Kind::Crossing,
        Kind::Lead,
        Kind::Theta,
        Kind::TwoBbm,
        Kind::Cohort,
        Kind::Validate,
        Kind::Fit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Crossing => "crossing",
            Kind::Lead => "lead",
            Kind::Theta => "theta",
            Kind::TwoBbm => "two-bbm",
            Kind::Cohort => "cohort",
            Kind::Validate => "validate",
            Kind::Fit => "fit",
        }
    }

    /// Kinds that produce one JSONL record per replicate.
    pub fn is_replicated(self) -> bool {
        !matches!(self, Kind::Validate | Kind::Fit)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown experiment kind `{s}`")))
    }
}

/// Kind-specific settings. Lists left empty are unused by the kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub horizon: f64,
    pub dt: f64,
    pub max_particles: usize,
    pub prune_gap: Option<f64>,
    pub bridge_refine: bool,
    /// `crossing` thresholds.
    pub y: Vec<f64>,
    /// `two-bbm` leads.
    pub z: Vec<f64>,
    /// `lead` / `theta` snapshot times.
    pub s: Vec<f64>,
    /// `cohort` slopes.
    pub a: Vec<f64>,
    /// Observation time for `simulate` and `cohort`.
    pub t: Option<f64>,
    /// `fit` inputs (JSONL files written by earlier runs).
    pub input: Vec<PathBuf>,
    pub include_censored: bool,
    pub csv: Option<PathBuf>,
}

impl Default for Params {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            horizon: sim.horizon,
            dt: sim.dt,
            max_particles: sim.max_particles,
            prune_gap: None,
            bridge_refine: false,
            y: Vec::new(),
            z: Vec::new(),
            s: Vec::new(),
            a: Vec::new(),
            t: None,
            input: Vec::new(),
            include_censored: false,
            csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub params: Params,
    pub replicates: usize,
    pub master_seed: u64,
    pub output_path: PathBuf,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, HarnessError> {
    Err(HarnessError::Invalid(msg.into()))
}

fn on_grid(x: f64, dt: f64) -> bool {
    let k = (x / dt).round();
    (k * dt - x).abs() <= 1e-9 * x.max(1.0)
}

impl ExperimentSpec {
    /// Population settings for one replicate.
    pub fn sim_config(&self, seed: u64) -> SimConfig {
        let p = &self.params;
        SimConfig {
            seed,
            horizon: p.horizon,
            dt: p.dt,
            max_particles: p.max_particles,
            prune_gap: p.prune_gap,
            bridge_refine: p.bridge_refine,
        }
    }

    /// Observation time of `simulate` and `cohort`.
    pub fn observation_time(&self) -> f64 {
        self.params.t.unwrap_or(self.params.horizon)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replicates < 1 {
            return invalid("--replicates must be at least 1");
        }
        let p = &self.params;
        if self.kind == Kind::Fit {
            if p.input.is_empty() {
                return invalid("fit needs at least one --input file");
            }
            return Ok(());
        }
        self.sim_config(0).validate()?;
        let need = |list: &[f64], flag: &str, ok: &dyn Fn(f64) -> bool, what: &str| -> Result<(), HarnessError> {
            if list.is_empty() {
                return invalid(format!("{} needs --{flag}", self.kind));
            }
            match list.iter().find(|v| !ok(**v)) {
                Some(bad) => invalid(format!("--{flag} {bad}: {what}")),
                None => Ok(()),
            }
        };
        let no_pruning = || match p.prune_gap {
            Some(_) => invalid(format!("{} cannot run with --prune-gap", self.kind)),
            None => Ok(()),
        };
        let time_ok = |t: f64| t > 0.0 && t <= p.horizon && on_grid(t, p.dt);
        match self.kind {
            Kind::Crossing => need(&p.y, "y", &|y| y > 0.0 && y.is_finite(), "must be positive")?,
            Kind::TwoBbm => need(&p.z, "z", &|z| z >= 0.0 && z.is_finite(), "must be non-negative")?,
            Kind::Lead | Kind::Theta => {
                no_pruning()?;
                need(
                    &p.s,
                    "s",
                    &|s| time_ok(s) && s < p.horizon,
                    "must be a checkpoint before the horizon",
                )?;
            }
            Kind::Cohort => {
                no_pruning()?;
                need(&p.a, "a", &|a| a >= 0.0, "must be non-negative")?;
                if !time_ok(self.observation_time()) {
                    return invalid(format!(
                        "--t {} must be a checkpoint in (0, horizon]",
                        self.observation_time()
                    ));
                }
            }
            Kind::Simulate => {
                if !time_ok(self.observation_time()) {
                    return invalid(format!(
                        "--t {} must be a checkpoint in (0, horizon]",
                        self.observation_time()
                    ));
                }
            }
            Kind::Validate | Kind::Fit => {}
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the whole spec.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("spec serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}
