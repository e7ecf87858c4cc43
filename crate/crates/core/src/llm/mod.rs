// SPDX-License-Identifier: Apache-2.0

//! Completion backends: an HTTP chat-completions client and a scripted
//! replay backend for offline runs.

mod http;
mod replay;
mod retry;

pub use http::{BackendConfig, HttpBackend, API_KEY_ENV};
pub use replay::{ReplayBackend, ReplayEntry, ReplayScript};
pub use retry::{with_retries, with_retries_sleeping, RetryPolicy};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub prompt_text: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub model_id: String,
    /// Correlates the call with a session in logs.
    pub request_tag: String,
}

impl LlmRequest {
    pub fn new(prompt_text: impl Into<String>, model_id: impl Into<String>) -> Self {
        LlmRequest {
            prompt_text: prompt_text.into(),
            temperature: 0.0,
            max_output_tokens: 4096,
            model_id: model_id.into(),
            request_tag: String::new(),
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.prompt_text.is_empty() {
            return Err(LlmError::InvalidRequest("prompt is empty".into()));
        }
        if self.max_output_tokens < 1 {
            return Err(LlmError::InvalidRequest("max_output_tokens must be at least 1".into()));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(LlmError::InvalidRequest(format!("temperature {} is invalid", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub latency_ms: u64,
    pub backend_id: String,
    /// The backend stopped at the output token limit.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("authentication failed (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("rate limited (HTTP {status})")]
    RateLimited { status: u16 },
    #[error("server error (HTTP {status}): {body}")]
    Server { status: u16, body: String },
    #[error("request rejected (HTTP {status}): {body}")]
    Rejected { status: u16, body: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("replay script exhausted after {served} responses")]
    ReplayExhausted { served: usize },
    #[error("replay entry {ordinal} expects prompt digest {expected}, got {found}")]
    ReplayMismatch {
        ordinal: usize,
        expected: String,
        found: String,
    },
    #[error("{last} (gave up after {attempts} attempts)")]
    RetriesExhausted { attempts: u32, last: Box<LlmError> },
}

impl LlmError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            LlmError::RateLimited { .. } | LlmError::Server { .. } | LlmError::Network(_) | LlmError::Timeout(_)
        )
    }

    /// Map an HTTP error status to its class.
    pub fn from_status(status: u16, body: String) -> LlmError {
        match status {
            401 | 403 => LlmError::Auth { status, body },
            429 => LlmError::RateLimited { status },
            408 => LlmError::Timeout(format!("HTTP {}", status)),
            500..=599 => LlmError::Server { status, body },
            _ => LlmError::Rejected { status, body },
        }
    }
}

pub trait LlmBackend: Send {
    fn backend_id(&self) -> &str;
    fn complete(&mut self, request: &LlmRequest) -> Result<LlmResponse, LlmError>;
}

impl<B: LlmBackend + ?Sized> LlmBackend for Box<B> {
    fn backend_id(&self) -> &str {
        (**self).backend_id()
    }

    fn complete(&mut self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        (**self).complete(request)
    }
}
