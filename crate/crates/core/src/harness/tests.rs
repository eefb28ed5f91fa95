use std::collections::BTreeMap;

use super::*;
use crate::error::HarnessError;

fn crossing_spec(dir: &std::path::Path) -> ExperimentSpec {
    ExperimentSpec {
        kind: Kind::Crossing,
        params: Params {
            horizon: 4.0,
            dt: 0.01,
            prune_gap: Some(6.0),
            y: vec![0.5, 1.0],
            ..Params::default()
        },
        replicates: 6,
        master_seed: 42,
        output_path: dir.join("r.jsonl"),
    }
}

#[test]
fn reals_use_seventeen_significant_digits() {
    let rec = ReplicateResult {
        replicate_index: 3,
        seed_used: 9,
        observables: BTreeMap::from([("T@0.5".to_owned(), Observed::exact(0.1))]),
        truncated: false,
        wall_time_ms: None,
        config_digest: "ab".into(),
    };
    let line = to_json(&rec);
    assert_eq!(
        line,
        r#"{"replicate_index":3,"seed_used":9,"observables":{"T@0.5":{"value":1.0000000000000001e-1,"censored":false}},"truncated":false,"wall_time_ms":null,"config_digest":"ab"}"#
    );
    let back: ReplicateResult = serde_json::from_str(&line).unwrap();
    assert_eq!(back, rec);
}

#[test]
fn awkward_reals_round_trip() {
    for v in [
        f64::MIN_POSITIVE,
        5e-324,
        1.0 / 3.0,
        -2.5e300,
        0.0,
        -0.0,
        123_456_789.123_456_79,
    ] {
        let back: f64 = serde_json::from_str(&to_json(&v)).unwrap();
        assert_eq!(back.to_bits(), v.to_bits(), "{v}");
    }
}

#[test]
fn keys_split_into_name_and_scale() {
    assert_eq!(key("T", 0.5), "T@0.5");
    assert_eq!(key("calT", 1.0), "calT@1");
    assert_eq!(split_key("tau_leftmost@0.3"), ("tau_leftmost", Some(0.3)));
    assert_eq!(split_key("N"), ("N", None));
}

#[test]
fn kind_names_parse_back() {
    for k in Kind::ALL {
        assert_eq!(k.name().parse::<Kind>().unwrap(), k);
    }
    assert!(matches!("walk".parse::<Kind>(), Err(HarnessError::Invalid(_))));
}

#[test]
fn digest_tracks_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let base = crossing_spec(dir.path());
    let d = base.digest();
    assert_eq!(d, base.clone().digest());
    assert_eq!(d.len(), 64);
    let variants = [
        ExperimentSpec {
            replicates: 7,
            ..base.clone()
        },
        ExperimentSpec {
            master_seed: 43,
            ..base.clone()
        },
        ExperimentSpec {
            output_path: dir.path().join("s.jsonl"),
            ..base.clone()
        },
        ExperimentSpec {
            kind: Kind::TwoBbm,
            ..base.clone()
        },
        ExperimentSpec {
            params: Params {
                dt: 0.02,
                ..base.params.clone()
            },
            ..base.clone()
        },
        ExperimentSpec {
            params: Params {
                y: vec![0.5],
                ..base.params.clone()
            },
            ..base.clone()
        },
        ExperimentSpec {
            params: Params {
                bridge_refine: true,
                ..base.params.clone()
            },
            ..base.clone()
        },
    ];
    for v in variants {
        assert_ne!(v.digest(), d, "{v:?}");
    }
}

#[test]
fn validation_rejects_incomplete_specs() {
    let dir = tempfile::tempdir().unwrap();
    let base = crossing_spec(dir.path());
    let with = |f: &dyn Fn(&mut ExperimentSpec)| {
        let mut s = base.clone();
        f(&mut s);
        s.validate()
    };
    assert!(base.validate().is_ok());
    let bad: [&dyn Fn(&mut ExperimentSpec); 9] = [
        &|s| s.params.y.clear(),
        &|s| s.params.y = vec![-1.0],
        &|s| s.params.dt = 0.0,
        &|s| s.replicates = 0,
        &|s| s.kind = Kind::Lead,
        &|s| {
            s.kind = Kind::Theta;
            s.params.prune_gap = None;
            s.params.s = vec![0.505];
        },
        &|s| {
            s.kind = Kind::Cohort;
            s.params.a = vec![0.5];
        },
        &|s| {
            s.kind = Kind::Simulate;
            s.params.t = Some(9.0);
        },
        &|s| s.kind = Kind::Fit,
    ];
    for f in bad {
        assert!(matches!(with(f), Err(HarnessError::Invalid(_))));
    }
}

#[test]
fn rerun_is_byte_identical_and_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let spec = crossing_spec(dir.path());
    let first = run(&spec, &RunOptions::default()).unwrap();
    let a = std::fs::read(&spec.output_path).unwrap();
    let seq = RunOptions {
        exec: crate::exec::Execution::Sequential,
        threads: Some(1),
        ..RunOptions::default()
    };
    run(&spec, &seq).unwrap();
    let b = std::fs::read(&spec.output_path).unwrap();
    assert_eq!(a, b);
    assert_eq!(first.exit_code(), 0);

    let records = read_results(&spec.output_path).unwrap();
    assert_eq!(records.len(), 6);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.replicate_index, i as u64);
        assert_eq!(r.seed_used, crate::rng::mix64(42, i as u64));
        assert_eq!(r.config_digest, first.config_digest);
        assert!(r.observables["T@0.5"].value <= r.observables["T@1"].value);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&first.manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["config_digest"], first.config_digest.as_str());
    assert_eq!(manifest["spec"]["kind"], "crossing");
}

#[test]
fn timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        replicates: 2,
        ..crossing_spec(dir.path())
    };
    run(
        &spec,
        &RunOptions {
            timing: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert!(read_results(&spec.output_path)
        .unwrap()
        .iter()
        .all(|r| r.wall_time_ms.is_some()));
}

#[test]
fn budget_hits_are_flagged_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        kind: Kind::Simulate,
        params: Params {
            horizon: 6.0,
            dt: 0.5,
            max_particles: 4,
            ..Params::default()
        },
        replicates: 3,
        master_seed: 1,
        output_path: dir.path().join("sim.jsonl"),
    };
    let summary = run(&spec, &RunOptions::default()).unwrap();
    assert_eq!(summary.exit_code(), 2);
    let recs = read_results(&spec.output_path).unwrap();
    assert_eq!(recs.len(), 3);
    assert!(recs.iter().all(|r| r.truncated && r.observables["N"].censored));
}

#[test]
fn every_replicated_kind_produces_its_observables() {
    let dir = tempfile::tempdir().unwrap();
    let base = Params {
        horizon: 2.0,
        dt: 0.01,
        max_particles: 10_000,
        ..Params::default()
    };
    let cases = [
        (
            Kind::Simulate,
            Params {
                t: Some(1.0),
                ..base.clone()
            },
            vec!["N", "R", "L", "W"],
        ),
        (
            Kind::Crossing,
            Params {
                y: vec![0.5],
                ..base.clone()
            },
            vec!["T@0.5"],
        ),
        (
            Kind::TwoBbm,
            Params {
                z: vec![0.3],
                ..base.clone()
            },
            vec!["calT@0.3"],
        ),
        (
            Kind::Lead,
            Params {
                s: vec![0.5],
                ..base.clone()
            },
            vec!["tau_leftmost@0.5", "tau_rightmost@0.5", "led@0.5", "labels@0.5"],
        ),
        (
            Kind::Theta,
            Params {
                s: vec![0.5],
                ..base.clone()
            },
            vec!["theta@0.5", "tau_leftmost@0.5", "labels@0.5"],
        ),
        (
            Kind::Cohort,
            Params {
                a: vec![0.5, 1.0],
                t: Some(2.0),
                ..base.clone()
            },
            vec!["N", "Z@0.5", "Z@1"],
        ),
    ];
    for (kind, params, keys) in cases {
        let spec = ExperimentSpec {
            kind,
            params,
            replicates: 3,
            master_seed: 5,
            output_path: dir.path().join(format!("{kind}.jsonl")),
        };
        run(&spec, &RunOptions::default()).unwrap();
        for rec in read_results(&spec.output_path).unwrap() {
            let got: Vec<&str> = rec.observables.keys().map(String::as_str).collect();
            for k in &keys {
                assert!(got.contains(k), "{kind}: {got:?}");
            }
        }
    }
}

#[test]
fn fit_reads_crossing_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        replicates: 30,
        params: Params {
            y: vec![0.5, 1.0, 1.5],
            horizon: 10.0,
            ..crossing_spec(dir.path()).params
        },
        ..crossing_spec(dir.path())
    };
    run(&spec, &RunOptions::default()).unwrap();
    let fit_spec = ExperimentSpec {
        kind: Kind::Fit,
        params: Params {
            input: vec![spec.output_path.clone()],
            csv: Some(dir.path().join("fit.csv")),
            ..Params::default()
        },
        replicates: 1,
        master_seed: 0,
        output_path: dir.path().join("fit.json"),
    };
    let reports = run_fit(&fit_spec).unwrap();
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    assert_eq!(r.observable, "T");
    assert_eq!(r.scales.len(), 3);
    let fit = r.fit.as_ref().unwrap();
    assert!(fit.slope_ci95.0 <= fit.slope && fit.slope <= fit.slope_ci95.1);
    let csv = std::fs::read_to_string(dir.path().join("fit.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(render_fits(&reports).contains("slope"));
}

#[test]
fn malformed_results_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, "{\"replicate_index\":0}\n").unwrap();
    match read_results(&path) {
        Err(HarnessError::Input { reason, .. }) => assert!(reason.starts_with("line 1")),
        other => panic!("{other:?}"),
    }
}
