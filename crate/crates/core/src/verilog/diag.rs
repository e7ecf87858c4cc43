// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiagnosticKind {
    UnexpectedToken,
    UnterminatedConstruct,
    UnknownDirective,
    IllegalCharacter,
    MismatchedDelimiter,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxDiagnostic {
    pub span: Span,
    pub kind: DiagnosticKind,
    pub message: String,
    /// Verbatim text of source line `span.line`, without the line terminator.
    pub offending_line_text: String,
}

impl SyntaxDiagnostic {
    pub fn new(source: &str, span: Span, kind: DiagnosticKind, message: impl Into<String>) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        SyntaxDiagnostic {
            span,
            kind,
            message,
            offending_line_text: source_line(source, span.line).to_string(),
        }
    }

    /// `<file>:<line>:<col>: <kind>: <message>`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: {}: {}",
            file, self.span.line, self.span.column, self.kind, self.message
        )
    }
}

/// Line `line` (1-based) of `source` without its terminator; empty when out of range.
pub fn source_line(source: &str, line: u32) -> &str {
    source
        .split('\n')
        .nth(line.saturating_sub(1) as usize)
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .unwrap_or("")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxReport {
    pub diagnostics: Vec<SyntaxDiagnostic>,
    /// Hex SHA-256 of the checked source bytes.
    pub source_hash: String,
}

impl SyntaxReport {
    pub fn new(source: &str, mut diagnostics: Vec<SyntaxDiagnostic>) -> Self {
        diagnostics.sort_by_key(|d| (d.span.line, d.span.column));
        diagnostics.dedup_by_key(|d| (d.span.line, d.span.column));
        SyntaxReport {
            diagnostics,
            source_hash: source_digest(source),
        }
    }

    pub fn ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn render(&self, file: &str) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            out.push_str(&d.render(file));
            out.push('\n');
        }
        out
    }
}

pub fn source_digest(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}
