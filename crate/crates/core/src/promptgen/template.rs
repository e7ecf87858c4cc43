// SPDX-License-Identifier: Apache-2.0

//! Plain-text templates split into `[[section]]` blocks with `{{field}}`
//! placeholders.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::{FEEDBACK_SECTIONS, REPIC_SECTIONS};

const DEFAULT_REPIC: &str = include_str!("../../templates/repic.txt");
const DEFAULT_FEEDBACK: &str = include_str!("../../templates/feedback.txt");

pub const REPIC_FILE: &str = "repic.txt";
pub const FEEDBACK_FILE: &str = "feedback.txt";

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("template {template}: expected sections {expected:?}, found {found:?}")]
    Sections {
        template: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("template {template}: unterminated placeholder in section '{section}'")]
    Unterminated { template: String, section: String },
    #[error("template {template}: unknown placeholder '{{{{{name}}}}}'")]
    UnknownField { template: String, name: String },
    #[error("reading template {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub name: String,
    pub sections: Vec<(String, String)>,
}

impl Template {
    /// Parse `text` and check it has exactly `expected` sections, in order.
    pub fn parse(name: &str, text: &str, expected: &[&str]) -> Result<Self, TemplateError> {
        let mut sections: Vec<(String, String)> = Vec::new();
        for line in text.lines() {
            let t = line.trim();
            if let Some(sec) = t.strip_prefix("[[").and_then(|r| r.strip_suffix("]]")) {
                sections.push((sec.trim().to_string(), String::new()));
            } else if let Some((_, body)) = sections.last_mut() {
                body.push_str(line);
                body.push('\n');
            }
        }
        for (_, body) in sections.iter_mut() {
            let trimmed = body.trim_matches('\n').trim_end().to_string();
            *body = trimmed;
        }
        let found: Vec<String> = sections.iter().map(|(n, _)| n.clone()).collect();
        if found != expected {
            return Err(TemplateError::Sections {
                template: name.to_string(),
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found,
            });
        }
        Ok(Template {
            name: name.to_string(),
            sections,
        })
    }

    /// Substitute every placeholder; unknown fields are an error.
    pub fn render_sections(&self, vars: &[(&str, String)]) -> Result<Vec<(String, String)>, TemplateError> {
        self.sections
            .iter()
            .map(|(sec, body)| Ok((sec.clone(), self.render(sec, body, vars)?)))
            .collect()
    }

    fn render(&self, section: &str, body: &str, vars: &[(&str, String)]) -> Result<String, TemplateError> {
        let mut out = String::with_capacity(body.len());
        let mut rest = body;
        while let Some(start) = rest.find("{{") {
            out.push_str(&rest[..start]);
            let after = &rest[start + 2..];
            let end = after.find("}}").ok_or_else(|| TemplateError::Unterminated {
                template: self.name.clone(),
                section: section.to_string(),
            })?;
            let key = after[..end].trim();
            let value = vars.iter().find(|(k, _)| *k == key).ok_or_else(|| TemplateError::UnknownField {
                template: self.name.clone(),
                name: key.to_string(),
            })?;
            out.push_str(&value.1);
            rest = &after[end + 2..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Templates {
    pub repic: Template,
    pub feedback: Template,
}

impl Default for Templates {
    fn default() -> Self {
        Templates {
            repic: Template::parse(REPIC_FILE, DEFAULT_REPIC, &REPIC_SECTIONS).expect("bundled template"),
            feedback: Template::parse(FEEDBACK_FILE, DEFAULT_FEEDBACK, &FEEDBACK_SECTIONS).expect("bundled template"),
        }
    }
}

impl Templates {
    /// Load overrides from `dir`; files that are absent keep the bundled text.
    pub fn from_dir(dir: &Path) -> Result<Self, TemplateError> {
        let load = |file: &str, default: &str, expected: &[&str]| {
            let path = dir.join(file);
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => default.to_string(),
                Err(source) => {
                    return Err(TemplateError::Io {
                        path: path.display().to_string(),
                        source,
                    })
                }
            };
            Template::parse(&path.display().to_string(), &text, expected)
        };
        Ok(Templates {
            repic: load(REPIC_FILE, DEFAULT_REPIC, &REPIC_SECTIONS)?,
            feedback: load(FEEDBACK_FILE, DEFAULT_FEEDBACK, &FEEDBACK_SECTIONS)?,
        })
    }

    /// Short hex digest of both template texts, recorded with each session.
    pub fn version(&self) -> String {
        let mut h = Sha256::new();
        for t in [&self.repic, &self.feedback] {
            for (n, b) in &t.sections {
                h.update(n.as_bytes());
                h.update([0]);
                h.update(b.as_bytes());
                h.update([0]);
            }
        }
        hex::encode(&h.finalize()[..8])
    }
}
