// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{LlmBackend, LlmError, LlmRequest, LlmResponse};
use crate::verilog::diag::source_digest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub text: String,
    /// When set, the request prompt must hash to this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_digest: Option<String>,
}

/// Canned responses served in order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplayScript {
    pub entries: Vec<ReplayEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Text(String),
    Entry {
        #[serde(default)]
        ordinal: Option<usize>,
        text: String,
        #[serde(default)]
        prompt_digest: Option<String>,
    },
}

impl ReplayScript {
    pub fn from_texts<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> Self {
        ReplayScript {
            entries: texts
                .into_iter()
                .map(|t| ReplayEntry {
                    text: t.into(),
                    prompt_digest: None,
                })
                .collect(),
        }
    }

    /// Accepts a JSON array or JSONL; each item is a string or an object
    /// `{"ordinal"?, "text", "prompt_digest"?}`. Ordinals, when present,
    /// must run 0, 1, 2, …
    pub fn parse(text: &str) -> Result<Self, String> {
        let raw: Vec<RawEntry> = if text.trim_start().starts_with('[') {
            serde_json::from_str(text).map_err(|e| format!("replay script: {}", e))?
        } else {
            text.lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("replay script line {}: {}", i + 1, e)))
                .collect::<Result<_, _>>()?
        };
        let mut entries = Vec::with_capacity(raw.len());
        for (i, r) in raw.into_iter().enumerate() {
            entries.push(match r {
                RawEntry::Text(text) => ReplayEntry {
                    text,
                    prompt_digest: None,
                },
                RawEntry::Entry {
                    ordinal,
                    text,
                    prompt_digest,
                } => {
                    if let Some(o) = ordinal {
                        if o != i {
                            return Err(format!("replay script: entry {} has ordinal {}", i, o));
                        }
                    }
                    ReplayEntry { text, prompt_digest }
                }
            });
        }
        Ok(ReplayScript { entries })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBackend {
    script: ReplayScript,
    cursor: usize,
}

impl ReplayBackend {
    pub fn new(script: ReplayScript) -> Self {
        ReplayBackend { script, cursor: 0 }
    }

    /// Responses served so far.
    pub fn cursor(&self) -> usize {
        self.cursor
    }
}

impl LlmBackend for ReplayBackend {
    fn backend_id(&self) -> &str {
        "replay"
    }

    fn complete(&mut self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let start = Instant::now();
        request.validate()?;
        let entry = self
            .script
            .entries
            .get(self.cursor)
            .ok_or(LlmError::ReplayExhausted { served: self.cursor })?;
        if let Some(expected) = &entry.prompt_digest {
            let found = source_digest(&request.prompt_text);
            if &found != expected {
                return Err(LlmError::ReplayMismatch {
                    ordinal: self.cursor,
                    expected: expected.clone(),
                    found,
                });
            }
        }
        self.cursor += 1;
        Ok(LlmResponse {
            text: entry.text.clone(),
            latency_ms: start.elapsed().as_millis() as u64,
            backend_id: "replay".into(),
            truncated: false,
        })
    }
}
