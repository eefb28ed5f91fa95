use std::f64::consts::{E, SQRT_2};
use std::fmt::Write as _;

use serde::Serialize;

use super::record::to_json;
use super::run::replicate;
use super::spec::{ExperimentSpec, Kind, Params};
use crate::analytic::{gauss_tail_bounds, gauss_tail_exact, geometric_pmf, sigma_cdf};
use crate::estimators::gof::{chi_square_discrete, ks_one_sample};
use crate::estimators::{left_tail_estimate, many_to_one_check, many_to_two_check, Canonical, McEstimate, McRun};
use crate::exec::{map_replicates, Execution};
use crate::observables::{
    additive_martingale, advance_on_grid, assign_labels, sigma_m_sample, theta, track_t_coupled, track_tau_with,
};
use crate::rng::mix64;
use crate::sim::{Population, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_owned(),
        passed,
        detail,
    }
}

fn failed(name: &str, err: impl std::fmt::Display) -> CheckOutcome {
    outcome(name, false, format!("error: {err}"))
}

const ALPHA: f64 = 1e-3;

/// The invariant suite. `n` sets the Monte Carlo sample size of the
/// distributional checks; path-tracking checks use `n / 100` replicates.
pub fn suite(n: usize, master_seed: u64, exec: Execution) -> Vec<CheckOutcome> {
    let n = n.max(200);
    let seed = |k: u64| mix64(master_seed, k);
    let run = |k: u64, reps: usize| McRun {
        replicates: reps,
        master_seed: seed(k),
        exec,
        max_particles: 1_000_000,
    };
    let paths = (n / 100).max(20);
    let mut out = Vec::new();

    let counts: Vec<u64> = map_replicates(n, seed(1), exec, |i, _| {
        let mut pop = Population::new(SimConfig::with_seed(mix64(seed(1), i))).expect("default config");
        pop.advance_to(1.0).expect("budget");
        pop.len() as u64
    });
    let gof = chi_square_discrete(&counts, |k| geometric_pmf(1.0, k).expect("t > 0"), 5.0);
    out.push(outcome(
        "population size at t=1 is Geometric(e^-1)",
        gof.passes(ALPHA),
        format!("chi2 {:.3} df {} p {:.4}", gof.statistic, gof.size, gof.p_value),
    ));
    let mean = McEstimate::from_samples(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
    out.push(outcome(
        "E N(1) = e",
        (mean.mean - E).abs() <= 3.0 * mean.std_error,
        format!("{:.5} +- {:.5}", mean.mean, mean.std_error),
    ));

    let sigmas: Vec<(f64, usize)> = map_replicates(n, seed(2), exec, |i, _| {
        let s = sigma_m_sample(SimConfig::with_seed(mix64(seed(2), i)), 3).expect("M >= 1");
        (s.sigma, s.alive)
    });
    let ks = ks_one_sample(&sigmas.iter().map(|s| s.0).collect::<Vec<_>>(), |s| {
        sigma_cdf(3, s).expect("M >= 1")
    });
    let alive_ok = sigmas.iter().all(|s| s.1 == 4);
    out.push(outcome(
        "sigma_3 has cdf (1-e^-s)^3, 4 alive",
        ks.passes(ALPHA) && alive_ok,
        format!("KS {:.4} p {:.4}", ks.statistic, ks.p_value),
    ));

    let mut sandwich = true;
    for s in [1.0, 4.0, 9.0] {
        for r in [1.5, 2.0, 3.0, 5.0] {
            let a = r * f64::sqrt(s);
            let (lo, hi) = gauss_tail_bounds(s, a).expect("s >= 1, a > 0");
            let exact = gauss_tail_exact(s, a).expect("s > 0");
            sandwich &= lo <= exact + 1e-12 && exact <= hi + 1e-12;
        }
    }
    out.push(outcome("Gaussian tail sandwich", sandwich, "12 grid points".into()));

    for (j, f) in Canonical::ALL.into_iter().enumerate() {
        let name = format!("many-to-one at t=1, {}", f.name());
        match many_to_one_check(&f, 1.0, 4, &run(10 + j as u64, n / 4)) {
            Ok((l, r)) => out.push(outcome(
                &name,
                l.agrees_with(&r, 3.0),
                format!(
                    "lhs {:.4}+-{:.4} rhs {:.4}+-{:.4}",
                    l.mean, l.std_error, r.mean, r.std_error
                ),
            )),
            Err(e) => out.push(failed(&name, e)),
        }
    }

    let name = "P[L(1) <= -sqrt2] = P[R(1) >= sqrt2] <= bound";
    match left_tail_estimate(1.0, SQRT_2, &run(20, n)) {
        Ok(lt) => out.push(outcome(
            name,
            lt.symmetric_within(3.0) && lt.under_bound(3.0),
            format!("L {:.5} R {:.5} bound {:.5}", lt.left.mean, lt.right.mean, lt.bound),
        )),
        Err(e) => out.push(failed(name, e)),
    }

    let w: Vec<f64> = map_replicates(n, seed(30), exec, |i, _| {
        let mut pop = Population::new(SimConfig::with_seed(mix64(seed(30), i))).expect("default config");
        pop.advance_to(1.0).expect("budget");
        additive_martingale(&pop)
    });
    let w = McEstimate::from_samples(&w);
    out.push(outcome(
        "E W(1) = 1",
        (w.mean - 1.0).abs() <= 3.0 * w.std_error,
        format!("{:.4} +- {:.4}", w.mean, w.std_error),
    ));

    let name = "pair sum at k=1 matches quadrature";
    match many_to_two_check(1.0, (f64::NEG_INFINITY, f64::INFINITY), &run(40, n)) {
        Ok(c) => out.push(outcome(
            name,
            c.within_se(3.0),
            format!(
                "mc {:.3}+-{:.3} quad {:.4}",
                c.estimate.mean, c.estimate.std_error, c.quadrature
            ),
        )),
        Err(e) => out.push(failed(name, e)),
    }

    let ys = [0.25, 0.5, 1.0];
    let nested: Vec<bool> = map_replicates(paths, seed(50), exec, |i, _| {
        let cfg = SimConfig {
            seed: mix64(seed(50), i),
            horizon: 5.0,
            dt: 0.01,
            prune_gap: Some(6.0),
            ..SimConfig::default()
        };
        let mut pop = Population::new(cfg).expect("valid config");
        let recs = track_t_coupled(&mut pop, &ys, 5.0).expect("positive thresholds");
        recs.windows(2).all(|w| w[0].time <= w[1].time)
    });
    out.push(outcome(
        "T(y) nondecreasing in y on coupled runs",
        nested.iter().all(|&b| b),
        format!("{paths} replicates"),
    ));

    let lead_ok: Vec<bool> = map_replicates(paths, seed(60), exec, |i, _| {
        let cfg = SimConfig {
            seed: mix64(seed(60), i),
            horizon: 5.0,
            dt: 0.01,
            max_particles: 20_000,
            ..SimConfig::default()
        };
        let mut pop = Population::new(cfg).expect("valid config");
        let Ok(mut labeling) = advance_on_grid(&mut pop, 0.5).and_then(|()| assign_labels(&mut pop)) else {
            return true;
        };
        let mut monotone = true;
        let mut last = 0;
        let map = track_tau_with(&mut pop, &mut labeling, 5.0, |_, l| {
            monotone &= l.led.len() >= last;
            last = l.led.len();
        })
        .expect("no pruning");
        let th = theta(&map).expect("non-empty");
        monotone && (th.censored || map.values().all(|r| r.time <= th.time))
    });
    out.push(outcome(
        "Theta >= every tau, led set grows",
        lead_ok.iter().all(|&b| b),
        format!("{paths} replicates"),
    ));

    let spec = ExperimentSpec {
        kind: Kind::Crossing,
        params: Params {
            horizon: 3.0,
            dt: 0.01,
            prune_gap: Some(6.0),
            y: vec![0.5, 1.0],
            ..Params::default()
        },
        replicates: 1,
        master_seed,
        output_path: "validate.jsonl".into(),
    };
    let digest = spec.digest();
    let same = to_json(&replicate(&spec, 0, &digest)) == to_json(&replicate(&spec, 0, &digest));
    out.push(outcome("replicate output is deterministic", same, String::new()));

    out
}

/// Table with one line per check.
pub fn render(checks: &[CheckOutcome]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{verdict}  {:<width$}  {}", c.name, c.detail);
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(s, "{passed}/{} checks passed", checks.len());
    s
}
