// SPDX-License-Identifier: Apache-2.0

const VERILOG_TAGS: [&str; 4] = ["verilog", "v", "systemverilog", "sv"];

struct Fence<'a> {
    tag: &'a str,
    body: String,
}

fn fenced_blocks(text: &str) -> Vec<Fence<'_>> {
    let mut out = Vec::new();
    let mut open: Option<(&str, Vec<&str>)> = None;
    for line in text.lines() {
        let t = line.trim_start();
        match open.as_mut() {
            None => {
                if let Some(tag) = t.strip_prefix("```") {
                    open = Some((tag.trim(), Vec::new()));
                }
            }
            Some((tag, lines)) => {
                if t.trim_end() == "```" {
                    let mut body = lines.join("\n");
                    body.push('\n');
                    out.push(Fence { tag, body });
                    open = None;
                } else {
                    lines.push(line);
                }
            }
        }
    }
    out
}

fn has_module_keyword(s: &str) -> bool {
    s.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '$'))
        .any(|w| w == "module")
}

/// Pull Verilog out of a model response.
///
/// Prefers the last fenced block tagged as Verilog or containing `module`;
/// without fences, takes the span from the first `module` to the last
/// `endmodule`.
pub fn extract_code(response: &str) -> Option<String> {
    let blocks = fenced_blocks(response);
    if let Some(b) = blocks
        .iter()
        .rev()
        .find(|b| VERILOG_TAGS.contains(&b.tag.to_ascii_lowercase().as_str()) || has_module_keyword(&b.body))
    {
        return Some(b.body.clone());
    }
    if !blocks.is_empty() {
        return None;
    }
    let start = response.find("module")?;
    let end = response.rfind("endmodule")?;
    if end < start {
        return None;
    }
    let mut code = response[start..end + "endmodule".len()].to_string();
    code.push('\n');
    Some(code)
}
