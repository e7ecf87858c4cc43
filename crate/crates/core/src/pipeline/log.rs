// SPDX-License-Identifier: Apache-2.0

//! Append-only JSONL session log: a header record, one record per attempt,
//! and a closing outcome record.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Attempt, GenerationSession, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum SessionRecord {
    Session {
        spec_digest: String,
        template_version: String,
        model_id: String,
        max_iterations: u32,
    },
    Attempt(Attempt),
    Outcome {
        outcome: Outcome,
        final_code: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        backend_error: Option<String>,
    },
}

pub struct SessionLog {
    out: Box<dyn Write + Send>,
}

impl SessionLog {
    pub fn new(out: impl Write + Send + 'static) -> Self {
        SessionLog { out: Box::new(out) }
    }

    /// Append to (or create) `path`.
    pub fn append(path: &Path) -> std::io::Result<Self> {
        let f = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self::new(f))
    }

    fn write(&mut self, rec: &SessionRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_string(rec).map_err(std::io::Error::other)?;
        line.push('\n');
        self.out.write_all(line.as_bytes())?;
        self.out.flush()
    }

    pub fn header(&mut self, s: &GenerationSession) -> std::io::Result<()> {
        self.write(&SessionRecord::Session {
            spec_digest: s.spec_digest.clone(),
            template_version: s.template_version.clone(),
            model_id: s.model_id.clone(),
            max_iterations: s.max_iterations,
        })
    }

    pub fn attempt(&mut self, a: &Attempt) -> std::io::Result<()> {
        self.write(&SessionRecord::Attempt(a.clone()))
    }

    pub fn outcome(&mut self, s: &GenerationSession) -> std::io::Result<()> {
        self.write(&SessionRecord::Outcome {
            outcome: s.outcome,
            final_code: s.final_code.clone(),
            backend_error: s.backend_error.clone(),
        })
    }
}

/// Rebuild the sessions stored in a log. A session cut short (no outcome
/// record) is returned with outcome `BackendFailed`.
pub fn read_session_log(path: &Path) -> std::io::Result<Vec<GenerationSession>> {
    let reader = BufReader::new(File::open(path)?);
    let mut sessions: Vec<GenerationSession> = Vec::new();
    let mut open = false;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SessionRecord = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}:{}: {}", path.display(), n + 1, e))
        })?;
        let bad = |msg: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {}", n + 1, msg));
        match rec {
            SessionRecord::Session {
                spec_digest,
                template_version,
                model_id,
                max_iterations,
            } => {
                sessions.push(GenerationSession {
                    spec_digest,
                    template_version,
                    model_id,
                    max_iterations,
                    attempts: Vec::new(),
                    outcome: Outcome::BackendFailed,
                    final_code: None,
                    backend_error: None,
                });
                open = true;
            }
            SessionRecord::Attempt(a) => {
                let s = sessions.last_mut().filter(|_| open).ok_or_else(|| bad("attempt outside a session"))?;
                s.attempts.push(a);
            }
            SessionRecord::Outcome {
                outcome,
                final_code,
                backend_error,
            } => {
                let s = sessions.last_mut().filter(|_| open).ok_or_else(|| bad("outcome outside a session"))?;
                s.outcome = outcome;
                s.final_code = final_code;
                s.backend_error = backend_error;
                open = false;
            }
        }
    }
    Ok(sessions)
}
