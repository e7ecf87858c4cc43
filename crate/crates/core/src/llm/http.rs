// SPDX-License-Identifier: Apache-2.0

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{LlmBackend, LlmError, LlmRequest, LlmResponse};

pub const API_KEY_ENV: &str = "LORECAST_API_KEY";

/// Live backend settings as they appear in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub endpoint_url: String,
    pub model_id: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
}

fn default_timeout() -> u64 {
    120
}

fn default_attempts() -> u32 {
    3
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            model_id: "gpt-4".into(),
            timeout_s: default_timeout(),
            max_attempts: default_attempts(),
        }
    }
}

/// Chat-completions client (`POST {model, messages, temperature, max_tokens}`).
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    endpoint_url: String,
    api_key: Option<String>,
    id: String,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

impl HttpBackend {
    pub fn new(cfg: &BackendConfig, api_key: Option<String>) -> Result<Self, LlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_s))
            .build()
            .map_err(|e| LlmError::Network(e.to_string()))?;
        Ok(HttpBackend {
            client,
            endpoint_url: cfg.endpoint_url.clone(),
            api_key,
            id: format!("http:{}", cfg.model_id),
        })
    }

    /// Key from `LORECAST_API_KEY`, if set.
    pub fn from_env(cfg: &BackendConfig) -> Result<Self, LlmError> {
        Self::new(cfg, std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()))
    }
}

fn body_excerpt(body: &str) -> String {
    const MAX: usize = 500;
    match body.char_indices().nth(MAX) {
        Some((i, _)) => format!("{}…", &body[..i]),
        None => body.to_string(),
    }
}

impl LlmBackend for HttpBackend {
    fn backend_id(&self) -> &str {
        &self.id
    }

    fn complete(&mut self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        request.validate()?;
        let start = Instant::now();
        let payload = json!({
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt_text}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });
        let mut req = self.client.post(&self.endpoint_url).json(&payload);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        if !request.request_tag.is_empty() {
            req = req.header("X-Request-Tag", &request.request_tag);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                LlmError::Timeout(e.to_string())
            } else {
                LlmError::Network(e.to_string())
            }
        })?;
        let status = resp.status();
        let body = resp.text().map_err(|e| LlmError::Network(e.to_string()))?;
        if !status.is_success() {
            return Err(LlmError::from_status(status.as_u16(), body_excerpt(&body)));
        }
        let parsed: ChatResponse = serde_json::from_str(&body).map_err(|e| LlmError::Protocol(e.to_string()))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| LlmError::Protocol("response has no choices".into()))?;
        Ok(LlmResponse {
            text: choice.message.content.unwrap_or_default(),
            latency_ms: start.elapsed().as_millis() as u64,
            backend_id: self.id.clone(),
            truncated: choice.finish_reason.as_deref() == Some("length"),
        })
    }
}
