use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::record::{split_key, to_json, ReplicateResult};
use super::spec::ExperimentSpec;
use crate::analytic::CONSTANTS;
use crate::error::HarnessError;
use crate::estimators::{fit_medians, median, ScaleSample, SlopeFit};

/// Observables whose log grows linearly in their scale, with the limiting
/// slope.
pub const FIT_TARGETS: [(&str, f64); 5] = [
    ("T", CONSTANTS.t_exponent),
    ("calT", CONSTANTS.t_exponent),
    ("tau_leftmost", CONSTANTS.tau_leftmost_exponent),
    ("tau_rightmost", CONSTANTS.tau_leftmost_exponent),
    ("theta", CONSTANTS.theta_exponent),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleSummary {
    pub scale: f64,
    pub replicates: usize,
    pub censored_fraction: f64,
    /// Median log time over the replicates entering the fit.
    pub median_log_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub observable: String,
    pub include_censored: bool,
    /// Asymptotic slope, for reference only.
    pub reference_slope: f64,
    pub scales: Vec<ScaleSummary>,
    pub fit: Option<SlopeFit>,
    /// Why `fit` is missing.
    pub note: Option<String>,
}

/// Read every record of a JSONL results file.
pub fn read_results(path: &Path) -> Result<Vec<ReplicateResult>, HarnessError> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            serde_json::from_str(line).map_err(|e| HarnessError::Input {
                path: path.display().to_string(),
                reason: format!("line {}: {e}", n + 1),
            })
        })
        .collect()
}

/// Group log times by observable and scale.
pub fn collect_samples(records: &[ReplicateResult]) -> BTreeMap<String, Vec<ScaleSample>> {
    let mut groups: BTreeMap<String, BTreeMap<u64, ScaleSample>> = BTreeMap::new();
    for rec in records {
        for (k, obs) in &rec.observables {
            let (name, Some(scale)) = split_key(k) else { continue };
            if !FIT_TARGETS.iter().any(|(n, _)| *n == name) {
                continue;
            }
            let entry = groups
                .entry(name.to_owned())
                .or_default()
                .entry(scale.to_bits())
                .or_insert_with(|| ScaleSample {
                    scale,
                    log_times: Vec::new(),
                    censored: Vec::new(),
                });
            // A zero lower bound (budget hit before the snapshot) carries no
            // information on the log scale.
            match (obs.censored, obs.value > 0.0) {
                (false, true) => entry.log_times.push(obs.value.ln()),
                (true, true) => entry.censored.push(obs.value.ln()),
                _ => {}
            }
        }
    }
    groups
        .into_iter()
        .map(|(name, by_scale)| {
            let mut v: Vec<ScaleSample> = by_scale.into_values().collect();
            v.sort_unstable_by(|a, b| a.scale.total_cmp(&b.scale));
            (name, v)
        })
        .collect()
}

pub fn fit_report(name: &str, samples: &[ScaleSample], include_censored: bool) -> FitReport {
    let scales = samples
        .iter()
        .map(|s| {
            let n = s.log_times.len() + s.censored.len();
            let mut used = s.log_times.clone();
            if include_censored {
                used.extend_from_slice(&s.censored);
            }
            ScaleSummary {
                scale: s.scale,
                replicates: n,
                censored_fraction: if n == 0 {
                    0.0
                } else {
                    s.censored.len() as f64 / n as f64
                },
                median_log_time: (!used.is_empty()).then(|| median(&used)),
            }
        })
        .collect();
    let (fit, note) = match fit_medians(samples, include_censored) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    FitReport {
        observable: name.to_owned(),
        include_censored,
        reference_slope: FIT_TARGETS.iter().find(|(n, _)| *n == name).map_or(f64::NAN, |t| t.1),
        scales,
        fit,
        note,
    }
}

/// `fit`: read the inputs, fit every target observable with at least one
/// scale, write the reports as JSON lines to the output path and the
/// per-scale points to the CSV path if one is given.
pub fn run_fit(spec: &ExperimentSpec) -> Result<Vec<FitReport>, HarnessError> {
    spec.validate()?;
    let mut records = Vec::new();
    for path in &spec.params.input {
        records.extend(read_results(path)?);
    }
    let reports: Vec<FitReport> = collect_samples(&records)
        .iter()
        .map(|(name, samples)| fit_report(name, samples, spec.params.include_censored))
        .collect();
    if reports.is_empty() {
        return Err(HarnessError::Invalid(
            "inputs contain no first-passage observables to fit".into(),
        ));
    }
    let body: String = reports.iter().map(|r| to_json(r) + "\n").collect();
    fs::write(&spec.output_path, body)?;
    if let Some(csv) = &spec.params.csv {
        fs::write(csv, to_csv(&reports))?;
    }
    Ok(reports)
}

pub fn to_csv(reports: &[FitReport]) -> String {
    let mut out = String::from("observable,scale,median_log_time,replicates,censored_fraction\n");
    for r in reports {
        for s in &r.scales {
            let median = s.median_log_time.map(|m| format!("{m:.16e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{:.16e}",
                r.observable, s.scale, median, s.replicates, s.censored_fraction
            )
            .expect("writing to a String");
        }
    }
    out
}

/// Human-readable summary of fit reports.
pub fn render(reports: &[FitReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "{} (reference slope {:.4})", r.observable, r.reference_slope);
        for s in &r.scales {
            let m = s.median_log_time.map_or("-".to_owned(), |m| format!("{m:.4}"));
            let _ = writeln!(
                out,
                "  scale {:<8} n {:<6} censored {:>5.1}%  median log time {m}",
                s.scale,
                s.replicates,
                100.0 * s.censored_fraction
            );
        }
        match (&r.fit, &r.note) {
            (Some(f), _) => {
                let _ = writeln!(
                    out,
                    "  slope {:.4}  95% CI [{:.4}, {:.4}]  intercept {:.4}",
                    f.slope, f.slope_ci95.0, f.slope_ci95.1, f.intercept
                );
            }
            (None, Some(note)) => {
                let _ = writeln!(out, "  no fit: {note}");
            }
            (None, None) => {}
        }
    }
    out
}
