// SPDX-License-Identifier: Apache-2.0

//! Forecast accuracy metrics: APME, NRMSE, R², syntax rate and the
//! conditional accuracy/error that discounts accuracy by syntax rate.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("evaluation set is empty")]
    Empty,
    #[error("metric undefined: mean ground truth is zero")]
    ZeroMeanTruth,
    #[error("metric undefined: ground truth has zero variance")]
    ZeroVariance,
    #[error("R² needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("non-finite value in pair {0}")]
    NonFinite(usize),
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSet {
    pub label: String,
    /// `(forecast, truth)` pairs.
    pub pairs: Vec<(f64, f64)>,
}

impl EvalSet {
    pub fn new(label: impl Into<String>, pairs: Vec<(f64, f64)>) -> Result<Self, MetricError> {
        for (i, (f, t)) in pairs.iter().enumerate() {
            if !f.is_finite() || !t.is_finite() {
                return Err(MetricError::NonFinite(i));
            }
        }
        Ok(EvalSet {
            label: label.into(),
            pairs,
        })
    }

    pub fn from_columns(label: impl Into<String>, forecast: &[f64], truth: &[f64]) -> Result<Self, MetricError> {
        assert_eq!(forecast.len(), truth.len(), "column lengths differ");
        Self::new(label, forecast.iter().copied().zip(truth.iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn means(&self) -> Result<(f64, f64), MetricError> {
        if self.pairs.is_empty() {
            return Err(MetricError::Empty);
        }
        let n = self.pairs.len() as f64;
        let f = self.pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let t = self.pairs.iter().map(|p| p.1).sum::<f64>() / n;
        Ok((f, t))
    }
}

/// `100 · |mean(forecast) − mean(truth)| / mean(truth)`.
pub fn apme(set: &EvalSet) -> Result<f64, MetricError> {
    let (f, t) = set.means()?;
    if t == 0.0 {
        return Err(MetricError::ZeroMeanTruth);
    }
    Ok(100.0 * (f - t).abs() / t.abs())
}

/// `100 · RMSE / mean(truth)`.
pub fn nrmse(set: &EvalSet) -> Result<f64, MetricError> {
    let (_, t) = set.means()?;
    if t == 0.0 {
        return Err(MetricError::ZeroMeanTruth);
    }
    let mse = set.pairs.iter().map(|(f, y)| (y - f).powi(2)).sum::<f64>() / set.len() as f64;
    Ok(100.0 * mse.sqrt() / t.abs())
}

/// `1 − SS_res / SS_tot`, with SS_tot taken about the truth mean.
pub fn r_squared(set: &EvalSet) -> Result<f64, MetricError> {
    if set.len() < 2 {
        return Err(MetricError::TooFewPairs(set.len()));
    }
    let (_, t) = set.means()?;
    let ss_tot: f64 = set.pairs.iter().map(|(_, y)| (y - t).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(MetricError::ZeroVariance);
    }
    let ss_res: f64 = set.pairs.iter().map(|(f, y)| (y - f).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub label: String,
    pub apme_percent: f64,
    pub nrmse_percent: f64,
    /// `None` when R² is undefined (fewer than 2 pairs or constant truth).
    pub r2: Option<f64>,
    pub n: usize,
    pub mean_forecast: f64,
    pub mean_truth: f64,
}

pub fn report(set: &EvalSet) -> Result<MetricsReport, MetricError> {
    let (mf, mt) = set.means()?;
    Ok(MetricsReport {
        label: set.label.clone(),
        apme_percent: apme(set)?,
        nrmse_percent: nrmse(set)?,
        r2: r_squared(set).ok(),
        n: set.len(),
        mean_forecast: mf,
        mean_truth: mt,
    })
}

/// Fraction of syntactically correct designs.
pub fn syntax_rate(outcomes: &[bool]) -> Result<f64, MetricError> {
    if outcomes.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(outcomes.iter().filter(|o| **o).count() as f64 / outcomes.len() as f64)
}

/// `ρ · (1 − E) · 100`, with `E` a fraction.
pub fn conditional_accuracy(rho: f64, e: f64) -> Result<f64, MetricError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(MetricError::OutOfRange { name: "rho", value: rho });
    }
    if !(0.0..=1.0).contains(&e) {
        return Err(MetricError::OutOfRange { name: "E", value: e });
    }
    Ok(rho * (1.0 - e) * 100.0)
}

pub fn conditional_error(rho: f64, e: f64) -> Result<f64, MetricError> {
    Ok(100.0 - conditional_accuracy(rho, e)?)
}

/// Correct only if every attempt was correct.
pub fn binary_correct(attempts: &[bool]) -> Result<bool, MetricError> {
    if attempts.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(attempts.iter().all(|a| *a))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalReport {
    pub label: String,
    pub rho: f64,
    /// APME of the syntax-correct subset, percent.
    pub e_percent: f64,
    pub conditional_accuracy_percent: f64,
    pub conditional_error_percent: f64,
    pub n_total: usize,
    pub n_correct: usize,
}

/// Conditional metrics over `n_total` designs of which the pairs in `correct`
/// are the syntax-correct ones.
pub fn conditional_report(correct: &EvalSet, n_total: usize) -> Result<ConditionalReport, MetricError> {
    let outcomes: Vec<bool> = (0..n_total).map(|i| i < correct.len()).collect();
    let rho = syntax_rate(&outcomes)?;
    let e = apme(correct)? / 100.0;
    // E can exceed 1 for very poor forecasts; accuracy bottoms out at zero.
    let e_clamped = e.min(1.0);
    let acc = conditional_accuracy(rho, e_clamped)?;
    Ok(ConditionalReport {
        label: correct.label.clone(),
        rho,
        e_percent: e * 100.0,
        conditional_accuracy_percent: acc,
        conditional_error_percent: 100.0 - acc,
        n_total,
        n_correct: correct.len(),
    })
}
