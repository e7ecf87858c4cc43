// SPDX-License-Identifier: Apache-2.0

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LlmBackend, LlmError, LlmRequest, LlmResponse};

/// Exponential backoff: `initial · multiplier^k`, capped at `max_backoff_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
    pub multiplier: f64,
    pub max_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            initial_backoff_ms: 500,
            multiplier: 2.0,
            max_backoff_ms: 8_000,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let ms = self.initial_backoff_ms as f64 * self.multiplier.powi(retry as i32);
        Duration::from_millis((ms.min(self.max_backoff_ms as f64)) as u64)
    }
}

pub fn with_retries(
    backend: &mut dyn LlmBackend,
    request: &LlmRequest,
    policy: &RetryPolicy,
) -> Result<LlmResponse, LlmError> {
    with_retries_sleeping(backend, request, policy, &mut std::thread::sleep)
}

/// Like [`with_retries`] with an injectable sleep.
pub fn with_retries_sleeping(
    backend: &mut dyn LlmBackend,
    request: &LlmRequest,
    policy: &RetryPolicy,
    sleep: &mut dyn FnMut(Duration),
) -> Result<LlmResponse, LlmError> {
    if policy.max_attempts < 1 {
        return Err(LlmError::InvalidRequest("max_attempts must be at least 1".into()));
    }
    let mut attempt = 0;
    loop {
        attempt += 1;
        match backend.complete(request) {
            Ok(r) => return Ok(r),
            Err(e) if !e.is_retryable() => return Err(e),
            Err(e) if attempt >= policy.max_attempts => {
                return Err(LlmError::RetriesExhausted {
                    attempts: attempt,
                    last: Box::new(e),
                })
            }
            Err(e) => {
                log::warn!("attempt {} of {} failed: {}", attempt, policy.max_attempts, e);
                sleep(policy.backoff(attempt - 1));
            }
        }
    }
}
