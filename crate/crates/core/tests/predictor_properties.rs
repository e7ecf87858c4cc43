// SPDX-License-Identifier: Apache-2.0

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rtlcast::features::{FeatureVector, FEATURE_COUNT, SCHEMA_VERSION};
use rtlcast::predictor::synth::{synthetic_dataset, SynthConfig};
use rtlcast::predictor::{
    evaluate, load_model, model_from_json, model_to_json, predict, save_model, train, Dataset, ModelIoError, Row,
    TrainConfig, Transform, TreeNode,
};

fn split(d: Dataset, n_train: usize) -> (Dataset, Dataset) {
    let mut rows = d.rows;
    let test = rows.split_off(n_train);
    (
        Dataset {
            schema_version: SCHEMA_VERSION,
            rows,
        },
        Dataset {
            schema_version: SCHEMA_VERSION,
            rows: test,
        },
    )
}

fn one_feature(values: &[(f64, f64)]) -> Dataset {
    Dataset {
        schema_version: SCHEMA_VERSION,
        rows: values
            .iter()
            .map(|(x, y)| {
                let mut v = vec![0.0; FEATURE_COUNT];
                v[0] = *x;
                Row {
                    design: None,
                    features: FeatureVector::from_values(v).unwrap(),
                    power_uw: *y,
                    tns_ns: *y,
                }
            })
            .collect(),
    }
}

fn small_cfg() -> TrainConfig {
    TrainConfig {
        n_trees: 60,
        ..TrainConfig::default()
    }
}

#[test]
fn identical_runs_give_identical_bytes() {
    let d = synthetic_dataset(&SynthConfig {
        rows: 120,
        ..SynthConfig::default()
    });
    let a = model_to_json(&train(&d, &small_cfg()).unwrap());
    let b = model_to_json(&train(&d, &small_cfg()).unwrap());
    assert_eq!(a, b);
    let sub = TrainConfig {
        row_subsample: 0.7,
        feature_subsample: 0.5,
        seed: 9,
        ..small_cfg()
    };
    assert_eq!(model_to_json(&train(&d, &sub).unwrap()), model_to_json(&train(&d, &sub).unwrap()));
}

#[test]
fn training_mse_never_increases() {
    let d = synthetic_dataset(&SynthConfig {
        rows: 150,
        ..SynthConfig::default()
    });
    let m = train(&d, &small_cfg()).unwrap();
    for e in [&m.power, &m.tns] {
        assert_eq!(e.train_mse.len(), e.trees.len() + 1);
        for w in e.train_mse.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} > {}", w[1], w[0]);
        }
    }
}

#[test]
fn step_function_is_fit_by_one_split() {
    let data: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 / 10.0, if i < 50 { 0.0 } else { 50.0 })).collect();
    // Independent oracle: scan every midpoint and keep the lowest SSE.
    let xs: Vec<f64> = data.iter().map(|p| p.0).collect();
    let mut best = (f64::INFINITY, 0.0);
    for w in xs.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        let (l, r): (Vec<_>, Vec<_>) = data.iter().partition(|p| p.0 < t);
        let sse = |s: &[&(f64, f64)]| {
            let m = s.iter().map(|p| p.1).sum::<f64>() / s.len() as f64;
            s.iter().map(|p| (p.1 - m).powi(2)).sum::<f64>()
        };
        let total = sse(&l) + sse(&r);
        if total < best.0 {
            best = (total, t);
        }
    }
    assert_eq!(best.0, 0.0);
    let cfg = TrainConfig {
        tns_transform: Transform::Identity,
        ..TrainConfig::default()
    };
    let m = train(&one_feature(&data), &cfg).unwrap();
    match &m.tns.trees[0].nodes[0] {
        TreeNode::Split { feature, threshold, .. } => {
            assert_eq!(*feature, 0);
            assert!((threshold - best.1).abs() < 1e-12);
        }
        other => panic!("expected a split, got {:?}", other),
    }
    assert!(*m.tns.train_mse.last().unwrap() < 1e-6);
}

#[test]
fn mean_predictor_has_zero_r_squared() {
    let data: Vec<(f64, f64)> = (0..30).map(|i| (i as f64, (i * 7 % 11) as f64 + 1.0)).collect();
    let cfg = TrainConfig {
        n_trees: 1,
        max_depth: 1,
        min_leaf_rows: 1000,
        power_transform: Transform::Identity,
        ..TrainConfig::default()
    };
    let m = train(&one_feature(&data), &cfg).unwrap();
    let r = evaluate(&m, &one_feature(&data)).unwrap();
    assert!(r.power.r2.unwrap().abs() < 1e-12);
    assert!(r.tns.r2.unwrap().abs() < 1e-12);
}

#[test]
fn identity_predictions_stay_within_target_range() {
    let d = synthetic_dataset(&SynthConfig {
        rows: 150,
        ..SynthConfig::default()
    });
    let cfg = TrainConfig {
        power_transform: Transform::Identity,
        ..small_cfg()
    };
    let m = train(&d, &cfg).unwrap();
    let max = d.rows.iter().map(|r| r.power_uw).fold(f64::MIN, f64::max);
    let min = d.rows.iter().map(|r| r.power_uw).fold(f64::MAX, f64::min);
    for r in &d.rows {
        let p = predict(&m, &r.features).unwrap().power_uw;
        assert!(p <= max + 1e-6 && p >= min.min(0.0) - 1e-6, "{} outside [{}, {}]", p, min, max);
    }
}

#[test]
fn synthetic_linear_targets_generalize() {
    let d = synthetic_dataset(&SynthConfig::default());
    assert_eq!(d.rows.len(), 500);
    let (tr, te) = split(d, 400);
    let m = train(&tr, &TrainConfig::default()).unwrap();
    let r = evaluate(&m, &te).unwrap();
    println!("held-out R²: power {:.4}, tns {:.4}", r.power.r2.unwrap(), r.tns.r2.unwrap());
    assert!(r.power.r2.unwrap() >= 0.9);
    assert!(r.tns.r2.unwrap() >= 0.9);
}

fn random_vectors(n: usize, seed: u64) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v = (0..FEATURE_COUNT).map(|_| rng.gen_range(0.0..200.0)).collect();
            FeatureVector::from_values(v).unwrap()
        })
        .collect()
}

#[test]
fn save_load_round_trip() {
    let d = synthetic_dataset(&SynthConfig {
        rows: 100,
        ..SynthConfig::default()
    });
    let m = train(&d, &small_cfg()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.lcmodel.json");
    save_model(&m, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, m);
    for fv in random_vectors(100, 3) {
        assert_eq!(predict(&m, &fv).unwrap(), predict(&back, &fv).unwrap());
    }
}

#[test]
fn load_errors_are_distinct() {
    let d = synthetic_dataset(&SynthConfig {
        rows: 30,
        ..SynthConfig::default()
    });
    let text = model_to_json(&train(&d, &small_cfg()).unwrap());

    let bumped = text.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
    assert!(matches!(model_from_json(&bumped), Err(ModelIoError::VersionMismatch { found: 2, .. })));

    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["schema_hash"] = "00".into();
    assert!(matches!(model_from_json(&v.to_string()), Err(ModelIoError::SchemaHashMismatch { .. })));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let cut = rng.gen_range(0..text.len() - 2);
        match model_from_json(&text[..cut]) {
            Err(ModelIoError::Corrupt(_)) => {}
            other => panic!("truncation at {} gave {:?}", cut, other.map(|_| ())),
        }
    }
}
