// SPDX-License-Identifier: Apache-2.0

//! Generation loop with syntax feedback, followed by feature extraction and
//! prediction.

mod log;

pub use self::log::{read_session_log, SessionLog, SessionRecord};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::features::{extract_features, EdaParams, FeatureError, FeatureVector};
use crate::llm::{with_retries, LlmBackend, LlmRequest, RetryPolicy};
use crate::metrics::{self, MetricError};
use crate::predictor::{predict, Forecast, PredictError, TrainedModel};
use crate::promptgen::{build_feedback, build_repic, extract_code, DesignSpec, PromptError, Templates};
use crate::verilog::diag::source_digest;
use crate::verilog::{check_syntax, parse, DiagnosticKind, Span, SyntaxDiagnostic, SyntaxReport};

/// Default bound on generation attempts per design.
pub const DEFAULT_MAX_ITERATIONS: u32 = 10;

pub const NO_CODE_MESSAGE: &str = "no Verilog code block found in the response";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptKind {
    Repic,
    Feedback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub index: u32,
    pub prompt_kind: PromptKind,
    pub prompt_text: String,
    pub response_text: String,
    pub extracted_code: Option<String>,
    pub syntax_report: Option<SyntaxReport>,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    SyntaxOk,
    MaxIterationsExhausted,
    NoCodeExtracted,
    BackendFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSession {
    pub spec_digest: String,
    pub template_version: String,
    pub model_id: String,
    pub max_iterations: u32,
    pub attempts: Vec<Attempt>,
    pub outcome: Outcome,
    /// Last extracted code, kept even when it does not parse.
    pub final_code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub max_iterations: u32,
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub retry: RetryPolicy,
    /// Record per-attempt wall time; off makes transcripts byte-reproducible.
    pub record_timing: bool,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            model_id: "gpt-4".into(),
            temperature: 0.0,
            max_output_tokens: 4096,
            retry: RetryPolicy::default(),
            record_timing: true,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("max_iterations must be at least 1")]
    ZeroIterations,
    #[error("session log: {0}")]
    Log(#[from] std::io::Error),
}

/// Report standing in for a response that held no code.
pub fn no_code_report(response: &str) -> SyntaxReport {
    let d = SyntaxDiagnostic::new(response, Span::new(1, 1, 0, 0), DiagnosticKind::UnexpectedToken, NO_CODE_MESSAGE);
    SyntaxReport::new(response, vec![d])
}

/// Run the prompt, check, repair loop for one design.
pub fn generate_with_ipref(
    spec: &DesignSpec,
    backend: &mut dyn LlmBackend,
    cfg: &GenerationConfig,
    templates: &Templates,
    mut log: Option<&mut SessionLog>,
) -> Result<GenerationSession, PipelineError> {
    if cfg.max_iterations < 1 {
        return Err(PipelineError::ZeroIterations);
    }
    let repic = build_repic(spec, templates)?;
    let mut session = GenerationSession {
        spec_digest: spec.digest(),
        template_version: templates.version(),
        model_id: cfg.model_id.clone(),
        max_iterations: cfg.max_iterations,
        attempts: Vec::new(),
        outcome: Outcome::MaxIterationsExhausted,
        final_code: None,
        backend_error: None,
    };
    if let Some(l) = log.as_deref_mut() {
        l.header(&session)?;
    }
    let mut prompt = (PromptKind::Repic, repic.rendered_text);
    for index in 0..cfg.max_iterations {
        let start = Instant::now();
        let request = LlmRequest {
            prompt_text: prompt.1.clone(),
            temperature: cfg.temperature,
            max_output_tokens: cfg.max_output_tokens,
            model_id: cfg.model_id.clone(),
            request_tag: format!("{}:{}", &session.spec_digest[..12], index),
        };
        let response = match with_retries(backend, &request, &cfg.retry) {
            Ok(r) => r,
            Err(e) => {
                session.outcome = Outcome::BackendFailed;
                session.backend_error = Some(e.to_string());
                break;
            }
        };
        let code = extract_code(&response.text);
        let report = code.as_deref().map(check_syntax);
        let attempt = Attempt {
            index,
            prompt_kind: prompt.0,
            prompt_text: prompt.1.clone(),
            response_text: response.text.clone(),
            extracted_code: code.clone(),
            syntax_report: report.clone(),
            wall_ms: if cfg.record_timing { start.elapsed().as_millis() as u64 } else { 0 },
        };
        if let Some(l) = log.as_deref_mut() {
            l.attempt(&attempt)?;
        }
        session.attempts.push(attempt);
        if code.is_some() {
            session.final_code = code.clone();
        }
        let (prior, report) = match (code, report) {
            (Some(_), Some(r)) if r.ok() => {
                session.outcome = Outcome::SyntaxOk;
                break;
            }
            (Some(c), Some(r)) => (c, r),
            _ => (response.text.clone(), no_code_report(&response.text)),
        };
        if index + 1 < cfg.max_iterations {
            let fb = build_feedback(&prior, &report, index + 1, templates)?;
            prompt = (PromptKind::Feedback, fb.rendered_text);
        }
    }
    if session.outcome == Outcome::MaxIterationsExhausted && session.final_code.is_none() {
        session.outcome = Outcome::NoCodeExtracted;
    }
    if let Some(l) = log {
        l.outcome(&session)?;
    }
    Ok(session)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub forecast: Forecast,
    pub session: GenerationSession,
    pub features: FeatureVector,
    pub eda: EdaParams,
    pub model_id_used: String,
    pub predictor_version: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ForecastError {
    #[error("forecast refused: generation ended with {:?}", .session.outcome)]
    Refused { session: Box<GenerationSession> },
    #[error("a design spec needs an LLM backend")]
    MissingBackend,
    #[error(transparent)]
    Eda(#[from] FeatureError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

impl ForecastError {
    pub fn session(&self) -> Option<&GenerationSession> {
        match self {
            ForecastError::Refused { session } => Some(session),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ForecastInput {
    Spec(DesignSpec),
    Code(String),
}

pub fn predictor_version(model: &TrainedModel) -> String {
    format!("lcmodel-v{}-{}", model.format_version, &model.schema_hash[..12.min(model.schema_hash.len())])
}

/// Session for code supplied directly, without generation.
pub fn direct_session(code: &str) -> GenerationSession {
    let report = check_syntax(code);
    let ok = report.ok();
    GenerationSession {
        spec_digest: source_digest(code),
        template_version: String::new(),
        model_id: "direct".into(),
        max_iterations: 1,
        attempts: vec![Attempt {
            index: 0,
            prompt_kind: PromptKind::Repic,
            prompt_text: String::new(),
            response_text: code.to_string(),
            extracted_code: Some(code.to_string()),
            syntax_report: Some(report),
            wall_ms: 0,
        }],
        outcome: if ok { Outcome::SyntaxOk } else { Outcome::MaxIterationsExhausted },
        final_code: Some(code.to_string()),
        backend_error: None,
    }
}

/// Forecast from a finished session; refuses anything but syntax-clean code.
pub fn forecast_session(
    session: GenerationSession,
    model: &TrainedModel,
    eda: &EdaParams,
) -> Result<ForecastResult, ForecastError> {
    eda.validate()?;
    let forest = match (&session.outcome, &session.final_code) {
        (Outcome::SyntaxOk, Some(code)) => parse(code).ok(),
        _ => None,
    };
    let Some(forest) = forest else {
        return Err(ForecastError::Refused {
            session: Box::new(session),
        });
    };
    let features = extract_features(&forest, eda);
    let forecast = predict(model, &features)?;
    Ok(ForecastResult {
        forecast,
        model_id_used: session.model_id.clone(),
        session,
        features,
        eda: *eda,
        predictor_version: predictor_version(model),
    })
}

pub fn forecast(
    input: &ForecastInput,
    model: &TrainedModel,
    eda: &EdaParams,
    backend: Option<&mut dyn LlmBackend>,
    cfg: &GenerationConfig,
    templates: &Templates,
    log: Option<&mut SessionLog>,
) -> Result<ForecastResult, ForecastError> {
    eda.validate()?;
    let session = match input {
        ForecastInput::Code(code) => direct_session(code),
        ForecastInput::Spec(spec) => {
            let backend = backend.ok_or(ForecastError::MissingBackend)?;
            generate_with_ipref(spec, backend, cfg, templates, log)?
        }
    };
    forecast_session(session, model, eda)
}

#[derive(Debug)]
pub struct BatchResult {
    /// One entry per input spec, in input order.
    pub results: Vec<Result<ForecastResult, ForecastError>>,
    pub syntax_rate: f64,
}

/// Forecast every spec, each with its own backend from `make_backend(i)`.
pub fn batch_forecast<F>(
    specs: &[DesignSpec],
    model: &TrainedModel,
    eda: &EdaParams,
    make_backend: F,
    cfg: &GenerationConfig,
    templates: &Templates,
    concurrency: usize,
) -> Result<BatchResult, MetricError>
where
    F: Fn(usize) -> Box<dyn LlmBackend> + Sync,
{
    if specs.is_empty() {
        return Err(MetricError::Empty);
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<ForecastResult, ForecastError>>>> =
        Mutex::new((0..specs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..concurrency.clamp(1, specs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= specs.len() {
                    break;
                }
                let mut backend = make_backend(i);
                let r = forecast(
                    &ForecastInput::Spec(specs[i].clone()),
                    model,
                    eda,
                    Some(&mut *backend),
                    cfg,
                    templates,
                    None,
                );
                slots.lock().expect("batch slots")[i] = Some(r);
            });
        }
    });
    let results: Vec<_> = slots
        .into_inner()
        .expect("batch slots")
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect();
    let outcomes: Vec<bool> = results
        .iter()
        .map(|r| match r {
            Ok(fr) => fr.session.outcome == Outcome::SyntaxOk,
            Err(e) => e.session().is_some_and(|s| s.outcome == Outcome::SyntaxOk),
        })
        .collect();
    Ok(BatchResult {
        syntax_rate: metrics::syntax_rate(&outcomes)?,
        results,
    })
}
