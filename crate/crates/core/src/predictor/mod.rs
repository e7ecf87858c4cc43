// SPDX-License-Identifier: Apache-2.0

//! Gradient-boosted regression trees mapping feature vectors to power and
//! |TNS|.
//!
//! Training is exact greedy: every node scans all sorted unique values of
//! every candidate feature and splits at the midpoint with the largest
//! squared-error reduction. Equal gains go to the lower feature index, then
//! the lower threshold, so a given dataset and config always produce the
//! same model.

mod dataset;
mod io;
pub mod synth;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::{feature_names, schema_hash, FeatureVector, FEATURE_COUNT, SCHEMA_VERSION};
use crate::metrics::{self, EvalSet, MetricError, MetricsReport};

pub use dataset::{load_dataset_csv, read_dataset_csv, write_dataset_csv, Dataset, DatasetError, Row};
pub use io::{load_model, model_from_json, model_to_json, save_model, ModelIoError, MODEL_EXTENSION, MODEL_FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Identity,
    Log1p,
}

impl Transform {
    pub fn forward(self, y: f64) -> f64 {
        match self {
            Transform::Identity => y,
            Transform::Log1p => y.ln_1p(),
        }
    }

    pub fn inverse(self, z: f64) -> f64 {
        match self {
            Transform::Identity => z,
            Transform::Log1p => z.exp_m1(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf_rows: usize,
    pub seed: u64,
    pub power_transform: Transform,
    pub tns_transform: Transform,
    /// Fraction of rows drawn (without replacement) per tree.
    pub row_subsample: f64,
    /// Fraction of features considered per tree.
    pub feature_subsample: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_trees: 200,
            max_depth: 6,
            learning_rate: 0.05,
            min_leaf_rows: 2,
            seed: 0,
            power_transform: Transform::Log1p,
            tns_transform: Transform::Identity,
            row_subsample: 1.0,
            feature_subsample: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset schema version {found} does not match feature schema {expected}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("row {row}: non-finite {target} target")]
    NonFiniteTarget { row: usize, target: &'static str },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PredictError {
    #[error("feature schema version {found} does not match model schema {expected}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("feature vector has {found} values, model expects {expected}")]
    WrongLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Binary tree stored as a node array; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        RegressionTree {
            nodes: vec![TreeNode::Leaf { value }],
        }
    }

    /// `x[feature] < threshold` goes left; equal goes right.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] < *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(t: &RegressionTree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + d(t, *left).max(d(t, *right)),
            }
        }
        d(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub base_score: f64,
    pub transform: Transform,
    pub trees: Vec<RegressionTree>,
    /// Transformed-space training MSE after 0, 1, …, n trees.
    pub train_mse: Vec<f64>,
}

impl Ensemble {
    /// Raw (transformed-space) score.
    pub fn score(&self, x: &[f64], learning_rate: f64) -> f64 {
        self.base_score + learning_rate * self.trees.iter().map(|t| t.eval(x)).sum::<f64>()
    }

    pub fn predict(&self, x: &[f64], learning_rate: f64) -> f64 {
        self.transform.inverse(self.score(x, learning_rate)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    /// RFC 3339 time of training, set by the caller; absent keeps files reproducible.
    pub timestamp: Option<String>,
    pub row_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub schema_version: u32,
    pub schema_hash: String,
    pub feature_names: Vec<String>,
    pub learning_rate: f64,
    pub train_seed: u64,
    pub config: TrainConfig,
    pub metadata: ModelMetadata,
    pub power: Ensemble,
    pub tns: Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    #[serde(rename = "power_uW")]
    pub power_uw: f64,
    pub tns_ns: f64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if self.n_trees < 1 {
            return bad("n_trees must be at least 1");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if self.min_leaf_rows < 1 {
            return bad("min_leaf_rows must be at least 1");
        }
        for (name, v) in [("row_subsample", self.row_subsample), ("feature_subsample", self.feature_subsample)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(TrainError::InvalidConfig(format!("{} must be in (0, 1]", name)));
            }
        }
        Ok(())
    }
}

/// Train the power and TNS ensembles.
pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<TrainedModel, TrainError> {
    cfg.validate()?;
    if data.rows.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if data.schema_version != SCHEMA_VERSION {
        return Err(TrainError::SchemaMismatch {
            expected: SCHEMA_VERSION,
            found: data.schema_version,
        });
    }
    for (i, r) in data.rows.iter().enumerate() {
        if r.features.schema_version != SCHEMA_VERSION || r.features.values.len() != FEATURE_COUNT {
            return Err(TrainError::SchemaMismatch {
                expected: SCHEMA_VERSION,
                found: r.features.schema_version,
            });
        }
        if !r.power_uw.is_finite() {
            return Err(TrainError::NonFiniteTarget { row: i, target: "power" });
        }
        if !r.tns_ns.is_finite() {
            return Err(TrainError::NonFiniteTarget { row: i, target: "tns" });
        }
    }
    let x: Vec<&[f64]> = data.rows.iter().map(|r| r.features.values.as_slice()).collect();
    let power_y: Vec<f64> = data.rows.iter().map(|r| r.power_uw).collect();
    let tns_y: Vec<f64> = data.rows.iter().map(|r| r.tns_ns.abs()).collect();
    // Separate streams so the two targets do not perturb each other.
    let power = fit_ensemble(&x, &power_y, cfg.power_transform, cfg, cfg.seed);
    let tns = fit_ensemble(&x, &tns_y, cfg.tns_transform, cfg, cfg.seed.wrapping_add(1));
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        schema_version: SCHEMA_VERSION,
        schema_hash: schema_hash(),
        feature_names: feature_names().iter().map(|s| s.to_string()).collect(),
        learning_rate: cfg.learning_rate,
        train_seed: cfg.seed,
        config: cfg.clone(),
        metadata: ModelMetadata {
            timestamp: None,
            row_count: data.rows.len(),
        },
        power,
        tns,
    })
}

fn mse(target: &[f64], pred: &[f64]) -> f64 {
    target.iter().zip(pred).map(|(t, p)| (t - p).powi(2)).sum::<f64>() / target.len() as f64
}

fn fit_ensemble(x: &[&[f64]], y: &[f64], transform: Transform, cfg: &TrainConfig, seed: u64) -> Ensemble {
    let n = y.len();
    let z: Vec<f64> = y.iter().map(|v| transform.forward(*v)).collect();
    let base = z.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut train_mse = vec![mse(&z, &pred)];
    let n_features = x.first().map_or(0, |r| r.len());
    for _ in 0..cfg.n_trees {
        let residual: Vec<f64> = z.iter().zip(&pred).map(|(t, p)| t - p).collect();
        let mut rows: Vec<usize> = (0..n).collect();
        if cfg.row_subsample < 1.0 {
            rows.shuffle(&mut rng);
            rows.truncate(((n as f64 * cfg.row_subsample).ceil() as usize).max(1));
            rows.sort_unstable();
        }
        let mut feats: Vec<usize> = (0..n_features).collect();
        if cfg.feature_subsample < 1.0 {
            feats.shuffle(&mut rng);
            feats.truncate(((n_features as f64 * cfg.feature_subsample).ceil() as usize).max(1));
            feats.sort_unstable();
        }
        let tree = build_tree(x, &residual, rows, &feats, cfg);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += cfg.learning_rate * tree.eval(x[i]);
        }
        train_mse.push(mse(&z, &pred));
        trees.push(tree);
    }
    Ensemble {
        base_score: base,
        transform,
        trees,
        train_mse,
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Smallest squared-error reduction considered a real split.
const MIN_GAIN: f64 = 1e-12;

fn build_tree(x: &[&[f64]], r: &[f64], rows: Vec<usize>, feats: &[usize], cfg: &TrainConfig) -> RegressionTree {
    let mut tree = RegressionTree { nodes: Vec::new() };
    grow(&mut tree, x, r, rows, feats, cfg, 0);
    tree
}

fn grow(
    tree: &mut RegressionTree,
    x: &[&[f64]],
    r: &[f64],
    rows: Vec<usize>,
    feats: &[usize],
    cfg: &TrainConfig,
    depth: usize,
) -> usize {
    let id = tree.nodes.len();
    let mean = rows.iter().map(|i| r[*i]).sum::<f64>() / rows.len() as f64;
    tree.nodes.push(TreeNode::Leaf { value: mean });
    if depth >= cfg.max_depth || rows.len() < 2 * cfg.min_leaf_rows {
        return id;
    }
    let Some(best) = best_split(x, r, &rows, feats, cfg.min_leaf_rows) else {
        return id;
    };
    let (l, rr): (Vec<usize>, Vec<usize>) = rows.iter().partition(|i| x[**i][best.feature] < best.threshold);
    let left = grow(tree, x, r, l, feats, cfg, depth + 1);
    let right = grow(tree, x, r, rr, feats, cfg, depth + 1);
    tree.nodes[id] = TreeNode::Split {
        feature: best.feature,
        threshold: best.threshold,
        left,
        right,
    };
    id
}

fn best_split(x: &[&[f64]], r: &[f64], rows: &[usize], feats: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    let n = rows.len();
    let total: f64 = rows.iter().map(|i| r[*i]).sum();
    let parent = total * total / n as f64;
    let mut best: Option<SplitChoice> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for &f in feats {
        order.sort_by(|a, b| x[*a][f].total_cmp(&x[*b][f]).then(a.cmp(b)));
        let mut left_sum = 0.0;
        for k in 0..n - 1 {
            left_sum += r[order[k]];
            let (lo, hi) = (x[order[k]][f], x[order[k + 1]][f]);
            if lo == hi {
                continue;
            }
            let nl = k + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / nl as f64 + right_sum * right_sum / nr as f64 - parent;
            if gain <= MIN_GAIN {
                continue;
            }
            let threshold = lo + (hi - lo) / 2.0;
            // Features ascend and thresholds ascend within a feature, so a
            // strict comparison keeps the lowest index/threshold on ties.
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

impl TrainedModel {
    fn check(&self, fv: &FeatureVector) -> Result<(), PredictError> {
        if fv.schema_version != self.schema_version {
            return Err(PredictError::SchemaMismatch {
                expected: self.schema_version,
                found: fv.schema_version,
            });
        }
        if fv.values.len() != self.feature_names.len() {
            return Err(PredictError::WrongLength {
                expected: self.feature_names.len(),
                found: fv.values.len(),
            });
        }
        Ok(())
    }
}

pub fn predict(model: &TrainedModel, fv: &FeatureVector) -> Result<Forecast, PredictError> {
    model.check(fv)?;
    Ok(Forecast {
        power_uw: model.power.predict(&fv.values, model.learning_rate),
        tns_ns: model.tns.predict(&fv.values, model.learning_rate),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub power: MetricsReport,
    pub tns: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvaluateError {
    #[error("dataset is empty")]
    Empty,
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error("{target}: {source}")]
    Metric { target: &'static str, source: MetricError },
}

/// Forecast every row and score both targets.
pub fn evaluate(model: &TrainedModel, data: &Dataset) -> Result<EvaluationReport, EvaluateError> {
    if data.rows.is_empty() {
        return Err(EvaluateError::Empty);
    }
    let mut power = Vec::with_capacity(data.rows.len());
    let mut tns = Vec::with_capacity(data.rows.len());
    for r in &data.rows {
        let f = predict(model, &r.features)?;
        power.push((f.power_uw, r.power_uw));
        tns.push((f.tns_ns, r.tns_ns.abs()));
    }
    let score = |label: &'static str, pairs: Vec<(f64, f64)>| {
        EvalSet::new(label, pairs)
            .and_then(|s| metrics::report(&s))
            .map_err(|source| EvaluateError::Metric { target: label, source })
    };
    Ok(EvaluationReport {
        power: score("power", power)?,
        tns: score("tns", tns)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv_with(idx: usize, v: f64) -> FeatureVector {
        let mut values = vec![0.0; FEATURE_COUNT];
        values[idx] = v;
        FeatureVector::from_values(values).unwrap()
    }

    fn dataset(rows: Vec<(FeatureVector, f64, f64)>) -> Dataset {
        Dataset {
            schema_version: SCHEMA_VERSION,
            rows: rows
                .into_iter()
                .map(|(features, power_uw, tns_ns)| Row {
                    design: None,
                    features,
                    power_uw,
                    tns_ns,
                })
                .collect(),
        }
    }

    #[test]
    fn constant_target() {
        let d = dataset((0..20).map(|i| (fv_with(1, i as f64), 100.0, 0.5)).collect());
        let m = train(&d, &TrainConfig::default()).unwrap();
        for v in [0.0, 3.5, 19.0, 1e6] {
            let f = predict(&m, &fv_with(1, v)).unwrap();
            assert!((f.power_uw - 100.0).abs() < 1e-6);
            assert!((f.tns_ns - 0.5).abs() < 1e-9);
        }
        let e = evaluate(&m, &d).unwrap();
        assert!(e.power.apme_percent < 1e-6);
        assert!(e.power.nrmse_percent < 1e-6);
    }

    #[test]
    fn tie_goes_right() {
        let t = RegressionTree {
            nodes: vec![
                TreeNode::Split {
                    feature: 0,
                    threshold: 5.0,
                    left: 1,
                    right: 2,
                },
                TreeNode::Leaf { value: -1.0 },
                TreeNode::Leaf { value: 1.0 },
            ],
        };
        assert_eq!(t.eval(&[4.999]), -1.0);
        assert_eq!(t.eval(&[5.0]), 1.0);
    }

    #[test]
    fn hand_computed_single_split() {
        let tree = RegressionTree {
            nodes: vec![
                TreeNode::Split {
                    feature: 2,
                    threshold: 10.0,
                    left: 1,
                    right: 2,
                },
                TreeNode::Leaf { value: 4.0 },
                TreeNode::Leaf { value: 8.0 },
            ],
        };
        let mut m = train(
            &dataset(vec![(fv_with(0, 0.0), 1.0, 1.0), (fv_with(0, 1.0), 1.0, 1.0)]),
            &TrainConfig {
                n_trees: 1,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        m.tns = Ensemble {
            base_score: 2.0,
            transform: Transform::Identity,
            trees: vec![tree],
            train_mse: vec![],
        };
        m.learning_rate = 0.5;
        // 2 + 0.5 * 8
        assert_eq!(predict(&m, &fv_with(2, 12.0)).unwrap().tns_ns, 6.0);
        // 2 + 0.5 * 4
        assert_eq!(predict(&m, &fv_with(2, 3.0)).unwrap().tns_ns, 4.0);
    }

    #[test]
    fn lowest_feature_wins_ties() {
        // Features 0 and 1 carry identical information.
        let rows = (0..10)
            .map(|i| {
                let mut v = vec![0.0; FEATURE_COUNT];
                v[0] = i as f64;
                v[1] = i as f64;
                (FeatureVector::from_values(v).unwrap(), if i < 5 { 1.0 } else { 9.0 }, 0.0)
            })
            .collect();
        let m = train(
            &dataset(rows),
            &TrainConfig {
                n_trees: 1,
                max_depth: 1,
                power_transform: Transform::Identity,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        match &m.power.trees[0].nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 4.5);
            }
            other => panic!("expected a split, got {:?}", other),
        }
    }

    #[test]
    fn errors_are_distinct() {
        assert_eq!(train(&dataset(vec![]), &TrainConfig::default()), Err(TrainError::EmptyDataset));
        let mut d = dataset(vec![(fv_with(0, 1.0), f64::NAN, 0.0)]);
        assert_eq!(
            train(&d, &TrainConfig::default()),
            Err(TrainError::NonFiniteTarget { row: 0, target: "power" })
        );
        d.rows[0].power_uw = 1.0;
        d.schema_version = 99;
        assert!(matches!(train(&d, &TrainConfig::default()), Err(TrainError::SchemaMismatch { .. })));
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&dataset(vec![]), &bad), Err(TrainError::InvalidConfig(_))));
    }

    #[test]
    fn schema_mismatch_at_prediction() {
        let d = dataset((0..4).map(|i| (fv_with(0, i as f64), 1.0, 1.0)).collect());
        let m = train(&d, &TrainConfig::default()).unwrap();
        let mut fv = fv_with(0, 1.0);
        fv.schema_version = 2;
        assert!(matches!(predict(&m, &fv), Err(PredictError::SchemaMismatch { .. })));
    }
}
