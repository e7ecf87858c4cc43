// SPDX-License-Identifier: Apache-2.0

//! Prompt construction: the structured generation prompt, syntax-feedback
//! prompts, and code extraction from model responses.

mod extract;
mod spec;
mod template;

pub use extract::extract_code;
pub use spec::{ClockSpec, DesignSpec, Direction, Edge, Polarity, PortSpec, ResetSpec, SpecError};
pub use template::{Template, TemplateError, Templates};

use serde::{Deserialize, Serialize};

use crate::verilog::SyntaxReport;

/// Diagnostics quoted per feedback prompt.
pub const FEEDBACK_DIAGNOSTIC_LIMIT: usize = 5;

pub const REPIC_SECTIONS: [&str; 5] = [
    "role_preamble",
    "interface_contract",
    "functional_description",
    "pseudocode_first_instruction",
    "output_format_rules",
];

pub const FEEDBACK_SECTIONS: [&str; 4] = ["header", "error_digest", "prior_code", "correction_instruction"];

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("feedback requested for a report without diagnostics")]
    ReportOk,
    #[error("feedback attempt index must be at least 1")]
    AttemptIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepicPrompt {
    pub role_preamble: String,
    pub interface_contract: String,
    pub functional_description: String,
    pub pseudocode_first_instruction: String,
    pub output_format_rules: String,
    pub rendered_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackPrompt {
    pub prior_code: String,
    pub error_digest: Vec<String>,
    pub correction_instruction: String,
    pub attempt_index: u32,
    pub rendered_text: String,
}

fn or_none(s: &Option<String>) -> String {
    match s.as_deref().map(str::trim) {
        Some(t) if !t.is_empty() => t.to_string(),
        _ => "None.".to_string(),
    }
}

fn port_table(spec: &DesignSpec) -> String {
    let name_w = spec.ports.iter().map(|p| p.name.len()).max().unwrap_or(0).max(4);
    let mut out = format!("| {:<name_w$} | direction | width |\n", "name");
    out.push_str(&format!("|{}|-----------|-------|\n", "-".repeat(name_w + 2)));
    for p in &spec.ports {
        out.push_str(&format!("| {:<name_w$} | {:<9} | {:>5} |\n", p.name, p.direction.keyword(), p.width_bits));
    }
    out.pop();
    out
}

fn timing_lines(spec: &DesignSpec) -> String {
    let mut lines = Vec::new();
    match &spec.clock {
        Some(c) => lines.push(format!(
            "Clock: `{}`, edge: {} (trigger on {} {}).",
            c.name,
            c.edge.as_str(),
            c.edge.keyword(),
            c.name
        )),
        None => lines.push("Clock: none; the design is purely combinational.".to_string()),
    }
    if let Some(r) = &spec.reset {
        lines.push(format!(
            "Reset: `{}`, active: {}, {}.",
            r.name,
            r.active.as_str(),
            if r.sync { "synchronous" } else { "asynchronous" }
        ));
    }
    format!("\n{}", lines.join("\n"))
}

/// Render the structured generation prompt for `spec`.
pub fn build_repic(spec: &DesignSpec, templates: &Templates) -> Result<RepicPrompt, PromptError> {
    spec.validate()?;
    let vars = [
        ("module_name", spec.module_name.clone()),
        ("port_table", port_table(spec)),
        ("timing_lines", timing_lines(spec)),
        ("behavior", spec.behavior.trim().to_string()),
        ("constraints", or_none(&spec.constraints)),
        ("pseudocode_hints", or_none(&spec.pseudocode_hints)),
    ];
    let sections = templates.repic.render_sections(&vars)?;
    let get = |name: &str| sections.iter().find(|(n, _)| n == name).map(|(_, t)| t.clone()).unwrap_or_default();
    Ok(RepicPrompt {
        role_preamble: get("role_preamble"),
        interface_contract: get("interface_contract"),
        functional_description: get("functional_description"),
        pseudocode_first_instruction: get("pseudocode_first_instruction"),
        output_format_rules: get("output_format_rules"),
        rendered_text: join_sections(&sections),
    })
}

fn join_sections(sections: &[(String, String)]) -> String {
    let mut s = sections.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>().join("\n\n");
    s.push('\n');
    s
}

/// `line L, column C: Kind: message` followed by the quoted source line.
pub fn digest_entry(d: &crate::verilog::SyntaxDiagnostic) -> String {
    format!(
        "line {}, column {}: {}: {}\n    {} | {}",
        d.span.line, d.span.column, d.kind, d.message, d.span.line, d.offending_line_text
    )
}

/// Render a repair prompt from the failing code and its syntax report.
pub fn build_feedback(
    prior_code: &str,
    report: &SyntaxReport,
    attempt_index: u32,
    templates: &Templates,
) -> Result<FeedbackPrompt, PromptError> {
    if report.ok() {
        return Err(PromptError::ReportOk);
    }
    if attempt_index < 1 {
        return Err(PromptError::AttemptIndex);
    }
    let digest: Vec<String> = report
        .diagnostics
        .iter()
        .take(FEEDBACK_DIAGNOSTIC_LIMIT)
        .map(digest_entry)
        .collect();
    let vars = [
        ("attempt_index", attempt_index.to_string()),
        ("error_count", report.diagnostics.len().to_string()),
        ("shown_count", digest.len().to_string()),
        ("error_digest", digest.join("\n")),
        ("prior_code", prior_code.trim_end().to_string()),
    ];
    let sections = templates.feedback.render_sections(&vars)?;
    let correction = sections
        .iter()
        .find(|(n, _)| n == "correction_instruction")
        .map(|(_, t)| t.clone())
        .unwrap_or_default();
    Ok(FeedbackPrompt {
        prior_code: prior_code.to_string(),
        error_digest: digest,
        correction_instruction: correction,
        attempt_index,
        rendered_text: join_sections(&sections),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog::check_syntax;

    fn passthrough() -> DesignSpec {
        serde_json::from_str(
            r#"{"module_name": "pass", "ports": [
                {"name": "a", "direction": "in", "width_bits": 8},
                {"name": "y", "direction": "out", "width_bits": 8}],
                "behavior": "y follows a."}"#,
        )
        .unwrap()
    }

    #[test]
    fn sections_in_order() {
        let p = build_repic(&passthrough(), &Templates::default()).unwrap();
        let mut last = 0;
        for s in [
            &p.role_preamble,
            &p.interface_contract,
            &p.functional_description,
            &p.pseudocode_first_instruction,
            &p.output_format_rules,
        ] {
            assert!(!s.is_empty());
            let at = p.rendered_text.find(s.as_str()).unwrap();
            assert!(at >= last);
            last = at;
        }
        assert!(p.interface_contract.contains("| a    | input     |     8 |"));
        assert!(p.interface_contract.contains("| y    | output    |     8 |"));
        assert_eq!(p.rendered_text.matches("```verilog").count(), 1);
        assert!(p.pseudocode_first_instruction.contains("First write pseudocode"));
    }

    #[test]
    fn feedback_caps_and_quotes() {
        let code = (0..9).map(|i| format!("wire w{} = ;", i)).collect::<Vec<_>>().join("\n");
        let src = format!("module m;\n{}\nendmodule\n", code);
        let r = check_syntax(&src);
        assert!(r.diagnostics.len() >= 9);
        let f = build_feedback(&src, &r, 1, &Templates::default()).unwrap();
        assert_eq!(f.error_digest.len(), 5);
        for (entry, d) in f.error_digest.iter().zip(&r.diagnostics) {
            assert!(entry.ends_with(&d.offending_line_text));
            assert_eq!(src.lines().nth(d.span.line as usize - 1).unwrap(), d.offending_line_text);
        }
        assert!(f.rendered_text.contains(src.trim_end()));
        assert!(matches!(
            build_feedback("module m; endmodule", &check_syntax("module m; endmodule"), 1, &Templates::default()),
            Err(PromptError::ReportOk)
        ));
        assert!(matches!(build_feedback(&src, &r, 0, &Templates::default()), Err(PromptError::AttemptIndex)));
    }
}
