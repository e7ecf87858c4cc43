// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::io::Write;

use serde_json::Value;

use crate::config::OutputFormat;

/// One command result in every supported format.
pub struct Output {
    pub json: Value,
    pub csv: String,
    pub text: String,
}

impl Output {
    pub fn write(&self, format: OutputFormat, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.json)?;
                out.write_all(b"\n")
            }
            OutputFormat::Csv => out.write_all(self.csv.as_bytes()),
            OutputFormat::Text => out.write_all(self.text.as_bytes()),
        }
    }
}

/// Build CSV text from a header and rows.
pub fn csv_table<S: AsRef<str>>(header: &[&str], rows: impl IntoIterator<Item = Vec<S>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r.iter().map(|s| s.as_ref())).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BACKEND: u8 = 3;

/// A failed command: exit code, message for stderr, and optional output
/// (refusals still print a document).
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
    pub output: Option<Output>,
}

impl fmt::Debug for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exit {}: {:#}", self.code, self.error)
    }
}

pub fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: e.into(),
        output: None,
    }
}

pub fn domain(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_DOMAIN,
        error: e.into(),
        output: None,
    }
}

pub fn backend(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_BACKEND,
        error: e.into(),
        output: None,
    }
}
