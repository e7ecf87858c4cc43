// SPDX-License-Identifier: Apache-2.0

//! Canonical Verilog printer. Output re-parses to an isomorphic tree.

use std::fmt;

use super::ast::{attr, AstNode, NodeKind, Span};

/// The tree violates an invariant the printer relies on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralError {
    pub kind: NodeKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for StructuralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "malformed {} node at {}:{}: {}",
            self.kind, self.span.line, self.span.column, self.message
        )
    }
}

impl std::error::Error for StructuralError {}

/// Print a forest as canonical Verilog text.
pub fn pretty_print(forest: &[AstNode]) -> Result<String, StructuralError> {
    for m in forest {
        validate(m)?;
    }
    let mut out = String::new();
    for (i, m) in forest.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if m.kind != NodeKind::Module {
            return Err(StructuralError {
                kind: m.kind,
                span: m.span,
                message: "forest roots must be Module nodes".into(),
            });
        }
        write_module(&mut out, m);
    }
    Ok(out)
}

fn bad(n: &AstNode, message: impl Into<String>) -> StructuralError {
    StructuralError {
        kind: n.kind,
        span: n.span,
        message: message.into(),
    }
}

fn validate(n: &AstNode) -> Result<(), StructuralError> {
    let k = n.children.len();
    if let Some(arity) = n.kind.operator_arity() {
        if k != arity {
            return Err(bad(n, format!("expected {} operands, found {}", arity, k)));
        }
    }
    let need = |key: &str| -> Result<(), StructuralError> {
        match n.attr(key) {
            Some(v) if !v.is_empty() => Ok(()),
            _ => Err(bad(n, format!("missing '{}' attribute", key))),
        }
    };
    let count = |lo: usize, hi: usize| -> Result<(), StructuralError> {
        if k < lo || k > hi {
            Err(bad(n, format!("expected {}..={} children, found {}", lo, hi, k)))
        } else {
            Ok(())
        }
    };
    match n.kind {
        NodeKind::BinaryOp | NodeKind::UnaryOp => need(attr::OP)?,
        NodeKind::Identifier | NodeKind::Module | NodeKind::Call | NodeKind::PortDecl => need(attr::NAME)?,
        NodeKind::NetDecl | NodeKind::RegDecl | NodeKind::ParamDecl => {
            need(attr::NAME)?;
            count(if n.kind == NodeKind::ParamDecl { 1 } else { 0 }, 1)?;
        }
        NodeKind::IntLiteral => need(attr::VALUE)?,
        NodeKind::IndexSelect => count(2, 2)?,
        NodeKind::RangeSelect => {
            count(3, 3)?;
            need(attr::MODE)?;
        }
        NodeKind::ContinuousAssign | NodeKind::BlockingAssign | NodeKind::NonBlockingAssign => count(2, 2)?,
        NodeKind::IfStmt => count(2, 3)?,
        NodeKind::ForLoop => count(4, 4)?,
        NodeKind::AlwaysBlock => {
            count(2, 2)?;
            if n.children[0].kind != NodeKind::SensitivityList {
                return Err(bad(n, "first child must be a SensitivityList"));
            }
        }
        NodeKind::InitialBlock | NodeKind::EventControl => count(1, 1)?,
        NodeKind::Concat | NodeKind::CaseStmt | NodeKind::CaseItem => count(1, usize::MAX)?,
        NodeKind::Replication => count(2, usize::MAX)?,
        NodeKind::Instance => {
            need(attr::NAME)?;
            need(attr::MODULE)?;
        }
        NodeKind::PortConnection => count(0, 1)?,
        _ => {}
    }
    n.children.iter().try_for_each(validate)
}

// -------------------------------------------------------------------------
// Expressions
// -------------------------------------------------------------------------

/// Canonical text of an expression already known to be well formed.
pub fn expr_text(e: &AstNode) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn is_primary(e: &AstNode) -> bool {
    !matches!(e.kind, NodeKind::BinaryOp | NodeKind::UnaryOp | NodeKind::TernaryOp)
}

fn write_operand(s: &mut String, e: &AstNode) {
    if is_primary(e) {
        write_expr(s, e);
    } else {
        s.push('(');
        write_expr(s, e);
        s.push(')');
    }
}

fn write_branch(s: &mut String, e: &AstNode) {
    if e.kind == NodeKind::TernaryOp {
        write_operand(s, e);
    } else {
        write_expr(s, e);
    }
}

fn write_list(s: &mut String, items: &[AstNode]) {
    for (i, c) in items.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        write_expr(s, c);
    }
}

fn write_expr(s: &mut String, e: &AstNode) {
    match e.kind {
        NodeKind::Identifier => s.push_str(e.name().unwrap_or("")),
        NodeKind::IntLiteral => s.push_str(e.attr(attr::VALUE).unwrap_or("0")),
        NodeKind::BinaryOp => {
            write_operand(s, &e.children[0]);
            s.push(' ');
            s.push_str(e.attr(attr::OP).unwrap_or("+"));
            s.push(' ');
            write_operand(s, &e.children[1]);
        }
        NodeKind::UnaryOp => {
            s.push_str(e.attr(attr::OP).unwrap_or("-"));
            write_operand(s, &e.children[0]);
        }
        NodeKind::TernaryOp => {
            write_branch(s, &e.children[0]);
            s.push_str(" ? ");
            write_branch(s, &e.children[1]);
            s.push_str(" : ");
            write_branch(s, &e.children[2]);
        }
        NodeKind::Concat => {
            s.push('{');
            write_list(s, &e.children);
            s.push('}');
        }
        NodeKind::Replication => {
            s.push('{');
            write_expr(s, &e.children[0]);
            s.push('{');
            write_list(s, &e.children[1..]);
            s.push_str("}}");
        }
        NodeKind::IndexSelect => {
            write_expr(s, &e.children[0]);
            s.push('[');
            write_expr(s, &e.children[1]);
            s.push(']');
        }
        NodeKind::RangeSelect => {
            write_expr(s, &e.children[0]);
            s.push('[');
            write_expr(s, &e.children[1]);
            s.push_str(e.attr(attr::MODE).unwrap_or(":"));
            write_expr(s, &e.children[2]);
            s.push(']');
        }
        NodeKind::Call => {
            let name = e.name().unwrap_or("");
            s.push_str(name);
            if !(name.starts_with('$') && e.children.is_empty()) {
                s.push('(');
                write_list(s, &e.children);
                s.push(')');
            }
        }
        _ => {
            // Not an expression; emit something that will not re-parse silently.
            s.push_str("/*?*/");
        }
    }
}

// -------------------------------------------------------------------------
// Declarations and items
// -------------------------------------------------------------------------

fn range_text(n: &AstNode, msb: &str, lsb: &str) -> Option<String> {
    match (n.attr(msb), n.attr(lsb)) {
        (Some(m), Some(l)) => Some(format!("[{}:{}]", m, l)),
        _ => None,
    }
}

fn port_text(p: &AstNode) -> String {
    let mut parts = vec![p.attr(attr::DIR).unwrap_or("input").to_string()];
    if let Some(net) = p.attr(attr::NET) {
        parts.push(net.to_string());
    }
    if p.flag(attr::SIGNED) {
        parts.push("signed".into());
    }
    if let Some(r) = range_text(p, attr::MSB, attr::LSB) {
        parts.push(r);
    }
    parts.push(p.name().unwrap_or("").to_string());
    parts.join(" ")
}

fn param_text(p: &AstNode) -> String {
    let mut parts = vec![p.attr(attr::KIND).unwrap_or("parameter").to_string()];
    if let Some(t) = p.attr(attr::TYPE) {
        parts.push(t.to_string());
    }
    if p.flag(attr::SIGNED) {
        parts.push("signed".into());
    }
    if let Some(r) = range_text(p, attr::MSB, attr::LSB) {
        parts.push(r);
    }
    parts.push(format!("{} = {}", p.name().unwrap_or(""), expr_text(&p.children[0])));
    parts.join(" ")
}

fn decl_text(d: &AstNode) -> String {
    let key = if d.kind == NodeKind::NetDecl { attr::NET } else { attr::TYPE };
    let default = if d.kind == NodeKind::NetDecl { "wire" } else { "reg" };
    let mut parts = vec![d.attr(key).unwrap_or(default).to_string()];
    if d.flag(attr::SIGNED) {
        parts.push("signed".into());
    }
    if let Some(r) = range_text(d, attr::MSB, attr::LSB) {
        parts.push(r);
    }
    let mut name = d.name().unwrap_or("").to_string();
    if let Some(r) = range_text(d, attr::ARRAY_MSB, attr::ARRAY_LSB) {
        name.push(' ');
        name.push_str(&r);
    }
    if let Some(init) = d.children.first() {
        name.push_str(" = ");
        name.push_str(&expr_text(init));
    }
    parts.push(name);
    parts.join(" ")
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn line(out: &mut String, indent: usize, text: &str) {
    pad(out, indent);
    out.push_str(text);
    out.push('\n');
}

fn write_module(out: &mut String, m: &AstNode) {
    let name = m.name().unwrap_or("");
    let header_params: Vec<&AstNode> = m
        .children
        .iter()
        .filter(|c| c.kind == NodeKind::ParamDecl && c.flag(attr::HEADER))
        .collect();
    let ansi: Vec<&AstNode> = m
        .children
        .iter()
        .filter(|c| c.kind == NodeKind::PortDecl && c.attr(attr::STYLE) == Some("ansi"))
        .collect();
    let plain: Vec<&AstNode> = m.children.iter().filter(|c| c.kind == NodeKind::Identifier).collect();

    let mut head = format!("module {}", name);
    if !header_params.is_empty() {
        let ps: Vec<String> = header_params.iter().map(|p| param_text(p)).collect();
        head.push_str(&format!(" #({})", ps.join(", ")));
    }
    if !ansi.is_empty() {
        head.push_str(" (\n");
        for (i, p) in ansi.iter().enumerate() {
            head.push_str("  ");
            head.push_str(&port_text(p));
            if i + 1 < ansi.len() {
                head.push(',');
            }
            head.push('\n');
        }
        head.push_str(");");
    } else if !plain.is_empty() {
        let names: Vec<&str> = plain.iter().map(|p| p.name().unwrap_or("")).collect();
        head.push_str(&format!("({});", names.join(", ")));
    } else {
        head.push(';');
    }
    out.push_str(&head);
    out.push('\n');
    for c in &m.children {
        let in_header = match c.kind {
            NodeKind::ParamDecl => c.flag(attr::HEADER),
            NodeKind::PortDecl => c.attr(attr::STYLE) == Some("ansi"),
            NodeKind::Identifier => true,
            _ => false,
        };
        if !in_header {
            write_item(out, c, 1, "");
        }
    }
    out.push_str("endmodule\n");
}

fn write_item(out: &mut String, n: &AstNode, indent: usize, prefix: &str) {
    match n.kind {
        NodeKind::PortDecl => line(out, indent, &format!("{}{};", prefix, port_text(n))),
        NodeKind::NetDecl | NodeKind::RegDecl => line(out, indent, &format!("{}{};", prefix, decl_text(n))),
        NodeKind::ParamDecl => line(out, indent, &format!("{}{};", prefix, param_text(n))),
        NodeKind::ContinuousAssign => line(
            out,
            indent,
            &format!("{}assign {} = {};", prefix, expr_text(&n.children[0]), expr_text(&n.children[1])),
        ),
        NodeKind::AlwaysBlock => {
            let head = format!("{}always {} ", prefix, sensitivity_text(&n.children[0]));
            write_stmt(out, &n.children[1], indent, &head);
        }
        NodeKind::InitialBlock => write_stmt(out, &n.children[0], indent, &format!("{}initial ", prefix)),
        NodeKind::GenerateBlock => {
            if n.attr(attr::KIND) == Some("region") {
                line(out, indent, &format!("{}generate", prefix));
                for c in &n.children {
                    write_item(out, c, indent + 1, "");
                }
                line(out, indent, "endgenerate");
            } else {
                line(out, indent, &format!("{}begin{}", prefix, label_text(n)));
                for c in &n.children {
                    write_item(out, c, indent + 1, "");
                }
                line(out, indent, "end");
            }
        }
        NodeKind::IfStmt => {
            let head = format!("{}if ({}) ", prefix, expr_text(&n.children[0]));
            write_item(out, &n.children[1], indent, &head);
            if let Some(e) = n.children.get(2) {
                write_item(out, e, indent, "else ");
            }
        }
        NodeKind::ForLoop => {
            let head = format!("{}{} ", prefix, for_header(n));
            write_item(out, &n.children[3], indent, &head);
        }
        NodeKind::Instance => line(out, indent, &format!("{}{}", prefix, instance_text(n))),
        NodeKind::FunctionDecl => write_function(out, n, indent, prefix),
        _ => write_stmt(out, n, indent, prefix),
    }
}

fn label_text(n: &AstNode) -> String {
    n.attr(attr::LABEL).map(|l| format!(" : {}", l)).unwrap_or_default()
}

fn sensitivity_text(s: &AstNode) -> String {
    if s.flag(attr::STAR) {
        return "@(*)".into();
    }
    let events: Vec<String> = s
        .children
        .iter()
        .map(|ev| match ev.attr(attr::EDGE) {
            Some(edge) => format!("{} {}", edge, expr_text(&ev.children[0])),
            None => expr_text(&ev.children[0]),
        })
        .collect();
    format!("@({})", events.join(" or "))
}

fn assign_text(a: &AstNode) -> String {
    format!("{} = {}", expr_text(&a.children[0]), expr_text(&a.children[1]))
}

fn for_header(n: &AstNode) -> String {
    format!(
        "for ({}; {}; {})",
        assign_text(&n.children[0]),
        expr_text(&n.children[1]),
        assign_text(&n.children[2])
    )
}

fn connection_text(c: &AstNode) -> String {
    let value = c.children.first().map(expr_text).unwrap_or_default();
    match c.attr(attr::PORT) {
        Some(p) => format!(".{}({})", p, value),
        None => value,
    }
}

fn instance_text(n: &AstNode) -> String {
    let (params, ports): (Vec<&AstNode>, Vec<&AstNode>) = n.children.iter().partition(|c| c.flag(attr::PARAM));
    let mut s = n.attr(attr::MODULE).unwrap_or("").to_string();
    if !params.is_empty() {
        let ps: Vec<String> = params.iter().map(|c| connection_text(c)).collect();
        s.push_str(&format!(" #({})", ps.join(", ")));
    }
    let cs: Vec<String> = ports.iter().map(|c| connection_text(c)).collect();
    s.push_str(&format!(" {} ({});", n.name().unwrap_or(""), cs.join(", ")));
    s
}

fn write_function(out: &mut String, f: &AstNode, indent: usize, prefix: &str) {
    let mut head = format!("{}function", prefix);
    if f.flag(attr::AUTOMATIC) {
        head.push_str(" automatic");
    }
    if let Some(t) = f.attr(attr::TYPE) {
        head.push(' ');
        head.push_str(t);
    }
    if f.flag(attr::SIGNED) {
        head.push_str(" signed");
    }
    if let Some(r) = range_text(f, attr::MSB, attr::LSB) {
        head.push(' ');
        head.push_str(&r);
    }
    head.push(' ');
    head.push_str(f.name().unwrap_or(""));
    let ansi: Vec<String> = f
        .children
        .iter()
        .filter(|c| c.kind == NodeKind::PortDecl && c.attr(attr::STYLE) == Some("ansi"))
        .map(port_text)
        .collect();
    if !ansi.is_empty() {
        head.push_str(&format!("({})", ansi.join(", ")));
    }
    head.push(';');
    line(out, indent, &head);
    for c in &f.children {
        match c.kind {
            NodeKind::PortDecl if c.attr(attr::STYLE) == Some("ansi") => {}
            NodeKind::PortDecl | NodeKind::RegDecl | NodeKind::ParamDecl => write_item(out, c, indent + 1, ""),
            _ => write_stmt(out, c, indent + 1, ""),
        }
    }
    line(out, indent, "endfunction");
}

// -------------------------------------------------------------------------
// Statements
// -------------------------------------------------------------------------

fn write_stmt(out: &mut String, n: &AstNode, indent: usize, prefix: &str) {
    match n.kind {
        NodeKind::Block if n.flag(attr::NULL) => line(out, indent, &format!("{};", prefix)),
        NodeKind::Block => {
            line(out, indent, &format!("{}begin{}", prefix, label_text(n)));
            for c in &n.children {
                write_stmt(out, c, indent + 1, "");
            }
            line(out, indent, "end");
        }
        NodeKind::BlockingAssign => line(out, indent, &format!("{}{};", prefix, assign_text(n))),
        NodeKind::NonBlockingAssign => line(
            out,
            indent,
            &format!("{}{} <= {};", prefix, expr_text(&n.children[0]), expr_text(&n.children[1])),
        ),
        NodeKind::IfStmt => {
            let head = format!("{}if ({}) ", prefix, expr_text(&n.children[0]));
            write_stmt(out, &n.children[1], indent, &head);
            if let Some(e) = n.children.get(2) {
                write_stmt(out, e, indent, "else ");
            }
        }
        NodeKind::CaseStmt => {
            let kw = n.attr(attr::KIND).unwrap_or("case");
            line(out, indent, &format!("{}{} ({})", prefix, kw, expr_text(&n.children[0])));
            for item in &n.children[1..] {
                let (labels, body) = item.children.split_at(item.children.len() - 1);
                let head = if item.flag(attr::DEFAULT) {
                    "default: ".to_string()
                } else {
                    let ls: Vec<String> = labels.iter().map(expr_text).collect();
                    format!("{}: ", ls.join(", "))
                };
                write_stmt(out, &body[0], indent + 1, &head);
            }
            line(out, indent, "endcase");
        }
        NodeKind::ForLoop => {
            let head = format!("{}{} ", prefix, for_header(n));
            write_stmt(out, &n.children[3], indent, &head);
        }
        _ => line(out, indent, &format!("{}/* unsupported {} */", prefix, n.kind)),
    }
}
