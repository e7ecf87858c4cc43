// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the synthesizable Verilog-2001 subset.
//!
//! Errors are recorded as diagnostics and the parser resynchronizes at
//! statement boundaries (`;`, `end`, `endcase`, module-item keywords,
//! `endmodule`), so one pass can report several independent problems.
//!
//! A missing token is reported right after the previous token when the
//! next token sits on a later line; this keeps the reported line next to
//! the place where the token was dropped.

use super::ast::{attr, AstNode, NodeKind, Span};
use super::diag::{DiagnosticKind, SyntaxDiagnostic, SyntaxReport};
use super::lexer::{tokenize, Tok, Token, SYSTEMVERILOG_KEYWORDS};
use super::printer::expr_text;

/// Marker: the diagnostic has already been recorded.
#[derive(Debug)]
struct Bail;

type PResult<T> = Result<T, Bail>;

/// Keywords where module-item parsing can resume.
const ITEM_SYNC: &[&str] = &[
    "input", "output", "inout", "wire", "tri", "wand", "wor", "supply0", "supply1", "reg",
    "integer", "genvar", "parameter", "localparam", "assign", "always", "initial", "generate",
    "endgenerate", "function", "endfunction", "endmodule", "module",
];

const NET_TYPES: &[&str] = &["wire", "tri", "wand", "wor", "supply0", "supply1", "tri0", "tri1"];

const UNSUPPORTED_ITEMS: &[(&str, &str)] = &[
    ("task", "tasks"),
    ("specify", "specify blocks"),
    ("primitive", "user-defined primitives"),
    ("defparam", "defparam statements"),
    ("specparam", "specparam declarations"),
    ("event", "named events"),
    ("real", "real variables"),
    ("realtime", "realtime variables"),
    ("time", "time variables"),
    ("trireg", "trireg nets"),
    ("table", "UDP tables"),
    ("config", "configurations"),
];

const GATE_PRIMITIVES: &[&str] = &[
    "and", "nand", "or", "nor", "xor", "xnor", "buf", "not", "bufif0", "bufif1", "notif0",
    "notif1", "pullup", "pulldown", "nmos", "pmos", "cmos", "tran",
];

const UNSUPPORTED_STMTS: &[&str] = &[
    "while", "repeat", "forever", "wait", "fork", "disable", "force", "release", "deassign",
];

const UNARY_OPS: &[&str] = &["+", "-", "!", "~", "&", "~&", "|", "~|", "^", "~^", "^~"];

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "**" => 11,
        "*" | "/" | "%" => 10,
        "+" | "-" => 9,
        "<<" | ">>" | "<<<" | ">>>" => 8,
        "<" | "<=" | ">" | ">=" => 7,
        "==" | "!=" | "===" | "!==" => 6,
        "&" => 5,
        "^" | "~^" | "^~" => 4,
        "|" => 3,
        "&&" => 2,
        "||" => 1,
        _ => return None,
    })
}

/// Parse Verilog source into one `Module` node per `module` declaration.
pub fn parse(source: &str) -> Result<Vec<AstNode>, SyntaxReport> {
    let (forest, diags) = run(source);
    if diags.is_empty() {
        Ok(forest)
    } else {
        Err(SyntaxReport::new(source, diags))
    }
}

/// Syntax check only; the diagnostics are exactly those [`parse`] reports.
pub fn check_syntax(source: &str) -> SyntaxReport {
    match parse(source) {
        Ok(_) => SyntaxReport::new(source, Vec::new()),
        Err(report) => report,
    }
}

/// Parse a standalone expression (used to re-read width attributes).
pub fn parse_expression(text: &str) -> Result<AstNode, SyntaxReport> {
    let (tokens, mut diags) = tokenize(text);
    let mut p = Parser::new(text, tokens);
    let result = p.expr();
    if result.is_ok() && !p.at_eof() {
        let _ = p.error_here("trailing input after expression");
    }
    diags.append(&mut p.diags);
    match result {
        Ok(e) if diags.is_empty() => Ok(e),
        _ => Err(SyntaxReport::new(text, diags)),
    }
}

fn run(source: &str) -> (Vec<AstNode>, Vec<SyntaxDiagnostic>) {
    let (tokens, mut diags) = tokenize(source);
    let mut p = Parser::new(source, tokens);
    let forest = p.source_text();
    diags.append(&mut p.diags);
    (forest, diags)
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<SyntaxDiagnostic>,
    last_error_tok: Option<usize>,
}

impl<'s> Parser<'s> {
    fn new(src: &'s str, toks: Vec<Token>) -> Self {
        Parser {
            src,
            toks,
            pos: 0,
            diags: Vec::new(),
            last_error_tok: None,
        }
    }

    // ---------------------------------------------------------------------
    // Token cursor
    // ---------------------------------------------------------------------

    fn peek(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_n(&self, n: usize) -> &Token {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            self.peek().span
        } else {
            self.toks[self.pos - 1].span
        }
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == Tok::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if t.kind != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_kw(kw)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_punct(p)
    }

    fn at_any_kw(&self, kws: &[&str]) -> bool {
        self.peek().kind == Tok::Keyword && kws.contains(&self.peek().text.as_str())
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn span_from(&self, start: Span) -> Span {
        start.to(self.prev_span())
    }

    // ---------------------------------------------------------------------
    // Diagnostics
    // ---------------------------------------------------------------------

    fn record(&mut self, span: Span, kind: DiagnosticKind, msg: String) -> Bail {
        if self.last_error_tok != Some(self.pos) {
            self.last_error_tok = Some(self.pos);
            self.diags.push(SyntaxDiagnostic::new(self.src, span, kind, msg));
        }
        Bail
    }

    fn error_here(&mut self, msg: impl Into<String>) -> Bail {
        let t = self.peek();
        let kind = if t.kind == Tok::Eof {
            DiagnosticKind::UnterminatedConstruct
        } else {
            DiagnosticKind::UnexpectedToken
        };
        let span = t.span;
        self.record(span, kind, msg.into())
    }

    /// Position just after the previous token.
    fn after_prev(&self) -> Span {
        if self.pos == 0 {
            return self.peek().span;
        }
        let prev = &self.toks[self.pos - 1];
        let text = &self.src[prev.span.byte_offset..prev.end_offset()];
        let mut line = prev.span.line;
        let mut col = prev.span.column;
        for c in text.chars() {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        Span::new(line, col, prev.end_offset(), 0)
    }

    /// Something (`what`) is missing before the current token.
    fn error_missing(&mut self, what: &str, kind: DiagnosticKind) -> Bail {
        let cur = self.peek().clone();
        let prev_line = if self.pos == 0 { cur.span.line } else { self.toks[self.pos - 1].span.line };
        if cur.kind == Tok::Eof {
            let span = cur.span;
            return self.record(
                span,
                DiagnosticKind::UnterminatedConstruct,
                format!("expected {} before end of file", what),
            );
        }
        if cur.span.line > prev_line {
            let span = self.after_prev();
            self.record(span, kind, format!("expected {} after this point, found {}", what, cur.describe()))
        } else {
            self.record(cur.span, kind, format!("expected {}, found {}", what, cur.describe()))
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.at_punct(p) {
            return Ok(self.bump());
        }
        let cur = self.peek();
        let closers = [")", "]", "}"];
        let kind = if closers.contains(&p) && cur.kind == Tok::Punct && closers.contains(&cur.text.as_str()) {
            DiagnosticKind::MismatchedDelimiter
        } else {
            DiagnosticKind::UnexpectedToken
        };
        Err(self.error_missing(&format!("'{}'", p), kind))
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Span)> {
        let t = self.peek().clone();
        if t.kind == Tok::Ident {
            self.bump();
            return Ok((t.text, t.span));
        }
        if t.kind == Tok::Keyword {
            return Err(self.error_here(format!("expected {}, found keyword '{}'", what, t.text)));
        }
        Err(self.error_missing(what, DiagnosticKind::UnexpectedToken))
    }

    fn unsupported(&mut self, what: &str) -> Bail {
        let t = self.peek().clone();
        self.record(
            t.span,
            DiagnosticKind::UnexpectedToken,
            format!("{} ('{}') not supported in the synthesizable subset", what, t.text),
        )
    }

    // ---------------------------------------------------------------------
    // Recovery
    // ---------------------------------------------------------------------

    fn at_item_sync(&self) -> bool {
        self.at_any_kw(ITEM_SYNC) || self.at_eof()
    }

    fn recover_item(&mut self, start: usize) {
        if self.pos == start {
            self.bump();
        }
        while !self.at_item_sync() {
            if self.eat_punct(";") {
                return;
            }
            self.bump();
        }
    }

    fn recover_stmt(&mut self, start: usize) {
        if self.pos == start && !self.at_item_sync() {
            self.bump();
        }
        while !self.at_item_sync() && !self.at_any_kw(&["end", "endcase"]) {
            if self.eat_punct(";") {
                return;
            }
            self.bump();
        }
    }

    // ---------------------------------------------------------------------
    // Top level
    // ---------------------------------------------------------------------

    fn source_text(&mut self) -> Vec<AstNode> {
        let mut forest = Vec::new();
        while !self.at_eof() {
            if self.at_kw("module") || self.at_kw("macromodule") {
                match self.module() {
                    Ok(m) => forest.push(m),
                    Err(Bail) => {
                        while !self.at_eof() && !self.at_kw("module") && !self.at_kw("macromodule") {
                            if self.eat_kw("endmodule") {
                                break;
                            }
                            self.bump();
                        }
                    }
                }
            } else {
                let t = self.peek().clone();
                if t.kind == Tok::Keyword && UNSUPPORTED_ITEMS.iter().any(|(k, _)| *k == t.text) {
                    let _ = self.unsupported("top-level construct");
                } else {
                    let _ = self.error_here(format!("expected 'module', found {}", t.describe()));
                }
                self.bump();
                while !self.at_eof() && !self.at_kw("module") && !self.at_kw("macromodule") {
                    self.bump();
                }
            }
        }
        forest
    }

    fn module(&mut self) -> PResult<AstNode> {
        let start = self.bump().span;
        let (name, _) = self.expect_ident("module name")?;
        let mut children = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            self.header_params(&mut children)?;
            self.expect_punct(")")?;
        }
        if self.eat_punct("(") {
            if self.at_punct(")") {
                // no ports
            } else if self.at_any_kw(&["input", "output", "inout"]) {
                self.ansi_ports(&mut children)?;
            } else {
                loop {
                    let (n, sp) = self.expect_ident("port name")?;
                    children.push(AstNode::identifier(&n, sp));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
        }
        self.expect_punct(";")?;
        let mut failed = false;
        loop {
            if self.at_kw("endmodule") {
                break;
            }
            if self.at_eof() {
                let span = self.peek().span;
                self.record(
                    span,
                    DiagnosticKind::UnterminatedConstruct,
                    format!("missing 'endmodule' for module '{}'", name),
                );
                return Err(Bail);
            }
            if self.at_kw("module") || self.at_kw("macromodule") {
                return Err(self.error_missing("'endmodule'", DiagnosticKind::UnterminatedConstruct));
            }
            let item_start = self.pos;
            if self.module_item(&mut children).is_err() {
                failed = true;
                self.recover_item(item_start);
            }
        }
        self.bump();
        if failed {
            return Err(Bail);
        }
        Ok(AstNode::new(NodeKind::Module, self.span_from(start))
            .with_attr(attr::NAME, name)
            .with_children(children))
    }

    fn header_params(&mut self, out: &mut Vec<AstNode>) -> PResult<()> {
        if self.at_punct(")") {
            return Ok(());
        }
        if !self.at_kw("parameter") && !self.at_kw("localparam") {
            return Err(self.error_missing("'parameter'", DiagnosticKind::UnexpectedToken));
        }
        let mut kind = "parameter".to_string();
        loop {
            if self.at_kw("parameter") || self.at_kw("localparam") {
                kind = self.bump().text;
            }
            let (ty, signed, range) = self.param_type()?;
            let node = self.param_assignment(&kind, ty, signed, &range, true)?;
            out.push(node);
            if !self.eat_punct(",") {
                return Ok(());
            }
        }
    }

    fn ansi_ports(&mut self, out: &mut Vec<AstNode>) -> PResult<()> {
        loop {
            let dir_tok = self.peek().clone();
            if !self.at_any_kw(&["input", "output", "inout"]) {
                return Err(self.error_missing("port direction", DiagnosticKind::UnexpectedToken));
            }
            self.bump();
            let (net, signed, range) = self.port_type()?;
            loop {
                let (name, sp) = self.expect_ident("port name")?;
                out.push(port_node(&dir_tok.text, &net, signed, &range, "ansi", &name, dir_tok.span.to(sp)));
                if self.at_punct(",") && self.peek_n(1).kind == Tok::Ident {
                    self.bump();
                    continue;
                }
                break;
            }
            if !self.eat_punct(",") {
                return Ok(());
            }
        }
    }

    fn port_type(&mut self) -> PResult<(String, bool, Option<(String, String)>)> {
        let mut net = String::new();
        if self.at_any_kw(NET_TYPES) || self.at_kw("reg") || self.at_kw("integer") {
            net = self.bump().text;
        }
        if SYSTEMVERILOG_KEYWORDS.contains(&self.peek().text.as_str()) && self.peek().kind == Tok::Ident {
            return Err(self.unsupported("SystemVerilog type"));
        }
        let signed = self.eat_kw("signed");
        let range = self.opt_range()?;
        Ok((net, signed, range))
    }

    fn opt_range(&mut self) -> PResult<Option<(String, String)>> {
        if !self.at_punct("[") {
            return Ok(None);
        }
        self.bump();
        let msb = self.expr()?;
        self.expect_punct(":")?;
        let lsb = self.expr()?;
        self.expect_punct("]")?;
        Ok(Some((expr_text(&msb), expr_text(&lsb))))
    }

    // ---------------------------------------------------------------------
    // Module items
    // ---------------------------------------------------------------------

    fn module_item(&mut self, out: &mut Vec<AstNode>) -> PResult<()> {
        let t = self.peek().clone();
        match t.kind {
            Tok::Keyword => match t.text.as_str() {
                "input" | "output" | "inout" => self.body_port_decl(out),
                "reg" | "integer" | "genvar" => self.reg_decl(out),
                "parameter" | "localparam" => self.param_decl(out),
                "assign" => self.continuous_assign(out),
                "always" => {
                    out.push(self.always()?);
                    Ok(())
                }
                "initial" => {
                    let start = self.bump().span;
                    let body = self.stmt()?;
                    out.push(AstNode::new(NodeKind::InitialBlock, self.span_from(start)).with_child(body));
                    Ok(())
                }
                "generate" => {
                    let start = self.bump().span;
                    let mut items = Vec::new();
                    self.generate_items(&mut items, "endgenerate")?;
                    self.bump();
                    out.push(
                        AstNode::new(NodeKind::GenerateBlock, self.span_from(start))
                            .with_attr(attr::KIND, "region")
                            .with_children(items),
                    );
                    Ok(())
                }
                "function" => {
                    out.push(self.function()?);
                    Ok(())
                }
                "for" | "if" | "begin" => {
                    out.push(self.generate_construct()?);
                    Ok(())
                }
                k if NET_TYPES.contains(&k) => self.net_decl(out),
                k if GATE_PRIMITIVES.contains(&k) => Err(self.unsupported("gate primitive")),
                k => {
                    if let Some((_, what)) = UNSUPPORTED_ITEMS.iter().find(|(kw, _)| *kw == k) {
                        Err(self.unsupported(what))
                    } else if matches!(k, "end" | "else" | "endcase") {
                        let b = self.error_here(format!("unexpected '{}' in module body", k));
                        if let Some(span) = out.last().and_then(missing_begin_candidate) {
                            self.diags.push(SyntaxDiagnostic::new(
                                self.src,
                                span,
                                DiagnosticKind::UnterminatedConstruct,
                                format!("stray '{}' may close a block whose 'begin' is missing here", k),
                            ));
                        }
                        Err(b)
                    } else {
                        Err(self.error_here(format!("unexpected {} in module body", t.describe())))
                    }
                }
            },
            Tok::Ident => {
                if SYSTEMVERILOG_KEYWORDS.contains(&t.text.as_str()) {
                    return Err(self.unsupported("SystemVerilog construct"));
                }
                let next = self.peek_n(1);
                if next.kind == Tok::Ident || next.is_punct("#") {
                    out.push(self.instance()?);
                    Ok(())
                } else {
                    self.bump();
                    Err(self.error_missing("instance name", DiagnosticKind::UnexpectedToken))
                }
            }
            Tok::Eof => Err(self.error_here("unexpected end of file in module body")),
            _ => Err(self.error_here(format!("unexpected {} in module body", t.describe()))),
        }
    }

    fn body_port_decl(&mut self, out: &mut Vec<AstNode>) -> PResult<()> {
        let dir = self.bump();
        let (net, signed, range) = self.port_type()?;
        loop {
            let (name, sp) = self.expect_ident("port name")?;
            out.push(port_node(&dir.text, &net, signed, &range, "body", &name, dir.span.to(sp)));
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        Ok(())
    }

    fn net_decl(&mut self, out: &mut Vec<AstNode>) -> PResult<()> {
        let kw = self.bump();
        if self.at_punct("#") {
            return Err(self.unsupported("delay"));
        }
        let signed = self.eat_kw("signed");
        let range = self.opt_range()?;
        self.declarators(out, NodeKind::NetDecl, attr::NET, &kw.text, signed, &range, kw.span)?;
        self.expect_punct(";")?;
        Ok(())
    }

    fn reg_decl(&mut self, out: &mut Vec<AstNode>) -> PResult<()> {
        let kw = self.bump();
        let (signed, range) = if kw.text == "reg" {
            (self.eat_kw("signed"), self.opt_range()?)
        } else {
            (false, None)
        };
        self.declarators(out, NodeKind::RegDecl, attr::TYPE, &kw.text, signed, &range, kw.span)?;
        self.expect_punct(";")?;
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn declarators(
        &mut self,
        out: &mut Vec<AstNode>,
        kind: NodeKind,
        type_key: &str,
        type_name: &str,
        signed: bool,
        range: &Option<(String, String)>,
        start: Span,
    ) -> PResult<()> {
        loop {
            let (name, _) = self.expect_ident("declaration name")?;
            let mut node = AstNode::new(kind, start).with_attr(attr::NAME, name).with_attr(type_key, type_name);
            if signed {
                node = node.with_attr(attr::SIGNED, "1");
            }
            if let Some((m, l)) = range {
                node = node.with_attr(attr::MSB, m.clone()).with_attr(attr::LSB, l.clone());
            }
            if let Some((m, l)) = self.opt_range()? {
                node = node.with_attr(attr::ARRAY_MSB, m).with_attr(attr::ARRAY_LSB, l);
            }
            if self.eat_punct("=") {
                let init = self.expr()?;
                node = node.with_child(init);
            }
            node.span = self.span_from(start);
            out.push(node);
            if !self.eat_punct(",") {
                return Ok(());
            }
        }
    }

    fn param_type(&mut self) -> PResult<(Option<String>, bool, Option<(String, String)>)> {
        let ty = if self.at_kw("integer") {
            Some(self.bump().text)
        } else {
            None
        };
        let signed = self.eat_kw("signed");
        let range = self.opt_range()?;
        Ok((ty, signed, range))
    }

    fn param_assignment(
        &mut self,
        kind: &str,
        ty: Option<String>,
        signed: bool,
        range: &Option<(String, String)>,
        header: bool,
    ) -> PResult<AstNode> {
        let (name, sp) = self.expect_ident("parameter name")?;
        self.expect_punct("=")?;
        let value = self.expr()?;
        let mut node = AstNode::new(NodeKind::ParamDecl, sp)
            .with_attr(attr::NAME, name)
            .with_attr(attr::KIND, kind)
            .with_child(value);
        if header {
            node = node.with_attr(attr::HEADER, "1");
        }
        if let Some(t) = ty {
            node = node.with_attr(attr::TYPE, t);
        }
        if signed {
            node = node.with_attr(attr::SIGNED, "1");
        }
        if let Some((m, l)) = range {
            node = node.with_attr(attr::MSB, m.clone()).with_attr(attr::LSB, l.clone());
        }
        node.span = self.span_from(sp);
        Ok(node)
    }

    fn param_decl(&mut self, out: &mut Vec<AstNode>) -> PResult<()> {
        let kw = self.bump();
        let (ty, signed, range) = self.param_type()?;
        loop {
            out.push(self.param_assignment(&kw.text, ty.clone(), signed, &range, false)?);
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        Ok(())
    }

    fn continuous_assign(&mut self, out: &mut Vec<AstNode>) -> PResult<()> {
        let start = self.bump().span;
        if self.at_punct("#") {
            return Err(self.unsupported("delay"));
        }
        if self.at_punct("(") {
            return Err(self.unsupported("drive strength"));
        }
        loop {
            let lhs = self.lvalue()?;
            self.expect_punct("=")?;
            let rhs = self.expr()?;
            out.push(AstNode::new(NodeKind::ContinuousAssign, self.span_from(start)).with_children([lhs, rhs]));
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        Ok(())
    }

    fn always(&mut self) -> PResult<AstNode> {
        let start = self.bump().span;
        if self.at_punct("#") {
            return Err(self.unsupported("delay"));
        }
        if !self.at_punct("@") {
            return Err(self.error_missing("'@' event control after 'always'", DiagnosticKind::UnexpectedToken));
        }
        let sens = self.event_control()?;
        let body = self.stmt()?;
        Ok(AstNode::new(NodeKind::AlwaysBlock, self.span_from(start)).with_children([sens, body]))
    }

    fn event_control(&mut self) -> PResult<AstNode> {
        let start = self.bump().span; // @
        let star = |span| AstNode::new(NodeKind::SensitivityList, span).with_attr(attr::STAR, "1");
        if self.eat_punct("*") {
            return Ok(star(self.span_from(start)));
        }
        if self.at_punct("(") && self.peek_n(1).is_punct("*") && self.peek_n(2).is_punct(")") {
            self.bump();
            self.bump();
            self.bump();
            return Ok(star(self.span_from(start)));
        }
        if self.peek().kind == Tok::Ident {
            let ev = self.event_expr()?;
            return Ok(AstNode::new(NodeKind::SensitivityList, self.span_from(start)).with_child(ev));
        }
        self.expect_punct("(")?;
        let mut events = Vec::new();
        let mut edged: Option<bool> = None;
        loop {
            let ev_tok = self.pos;
            let ev = self.event_expr()?;
            let has_edge = ev.attr(attr::EDGE).is_some();
            if *edged.get_or_insert(has_edge) != has_edge {
                let here = self.pos;
                self.pos = ev_tok;
                let b = self.error_here("edge and level events cannot be mixed in one sensitivity list");
                self.pos = here;
                return Err(b);
            }
            events.push(ev);
            if self.eat_kw("or") || self.eat_punct(",") {
                continue;
            }
            break;
        }
        self.expect_punct(")")?;
        Ok(AstNode::new(NodeKind::SensitivityList, self.span_from(start)).with_children(events))
    }

    fn event_expr(&mut self) -> PResult<AstNode> {
        let start = self.peek().span;
        let edge = if self.at_kw("posedge") || self.at_kw("negedge") {
            self.bump().text
        } else {
            String::new()
        };
        let e = self.expr()?;
        let mut node = AstNode::new(NodeKind::EventControl, self.span_from(start)).with_child(e);
        if !edge.is_empty() {
            node = node.with_attr(attr::EDGE, edge);
        }
        Ok(node)
    }

    fn generate_items(&mut self, out: &mut Vec<AstNode>, terminator: &str) -> PResult<()> {
        let mut failed = false;
        loop {
            if self.at_kw(terminator) {
                break;
            }
            if self.at_eof() {
                let span = self.peek().span;
                self.record(span, DiagnosticKind::UnterminatedConstruct, format!("missing '{}'", terminator));
                return Err(Bail);
            }
            if self.at_kw("endmodule") || self.at_kw("module") || (terminator != "end" && self.at_kw("end")) {
                return Err(self.error_missing(&format!("'{}'", terminator), DiagnosticKind::UnterminatedConstruct));
            }
            let item_start = self.pos;
            if self.module_item(out).is_err() {
                failed = true;
                self.recover_item(item_start);
                if self.at_kw("endmodule") {
                    return Err(Bail);
                }
            }
        }
        if failed {
            return Err(Bail);
        }
        Ok(())
    }

    fn generate_construct(&mut self) -> PResult<AstNode> {
        let t = self.peek().clone();
        match t.text.as_str() {
            "begin" => {
                let start = self.bump().span;
                let label = self.opt_label()?;
                let mut items = Vec::new();
                self.generate_items(&mut items, "end")?;
                self.bump();
                let mut node = AstNode::new(NodeKind::GenerateBlock, self.span_from(start))
                    .with_attr(attr::KIND, "block")
                    .with_children(items);
                if let Some(l) = label {
                    node = node.with_attr(attr::LABEL, l);
                }
                Ok(node)
            }
            "if" => {
                let start = self.bump().span;
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then = self.generate_body()?;
                let mut node = AstNode::new(NodeKind::IfStmt, start).with_children([cond, then]);
                if self.eat_kw("else") {
                    node.children.push(self.generate_body()?);
                }
                node.span = self.span_from(start);
                Ok(node)
            }
            _ => {
                let start = self.bump().span;
                let [init, cond, step] = self.for_header()?;
                let body = self.generate_body()?;
                Ok(AstNode::new(NodeKind::ForLoop, self.span_from(start)).with_children([init, cond, step, body]))
            }
        }
    }

    fn generate_body(&mut self) -> PResult<AstNode> {
        if self.at_kw("begin") || self.at_kw("if") || self.at_kw("for") {
            return self.generate_construct();
        }
        let start = self.peek().span;
        let mut items = Vec::new();
        self.module_item(&mut items)?;
        if items.len() == 1 {
            Ok(items.pop().unwrap_or_else(|| AstNode::new(NodeKind::GenerateBlock, start)))
        } else {
            Ok(AstNode::new(NodeKind::GenerateBlock, self.span_from(start))
                .with_attr(attr::KIND, "block")
                .with_children(items))
        }
    }

    fn opt_label(&mut self) -> PResult<Option<String>> {
        if self.eat_punct(":") {
            let (l, _) = self.expect_ident("block label")?;
            Ok(Some(l))
        } else {
            Ok(None)
        }
    }

    fn instance(&mut self) -> PResult<AstNode> {
        let modtok = self.bump();
        let mut params = Vec::new();
        if self.eat_punct("#") {
            if !self.at_punct("(") {
                return Err(self.unsupported("delay"));
            }
            self.bump();
            self.connections(&mut params, true)?;
            self.expect_punct(")")?;
        }
        let mut nodes = Vec::new();
        loop {
            let (name, _) = self.expect_ident("instance name")?;
            if self.at_punct("[") {
                return Err(self.unsupported("instance array"));
            }
            self.expect_punct("(")?;
            let mut conns = params.clone();
            self.connections(&mut conns, false)?;
            self.expect_punct(")")?;
            nodes.push(
                AstNode::new(NodeKind::Instance, self.span_from(modtok.span))
                    .with_attr(attr::MODULE, modtok.text.clone())
                    .with_attr(attr::NAME, name)
                    .with_children(conns),
            );
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        if nodes.len() == 1 {
            return Ok(nodes.pop().expect("one instance"));
        }
        // `m a(...), b(...);` is rare; keep only one node per statement by
        // reporting it as unsupported rather than silently reshaping it.
        Err(self.record(
            modtok.span,
            DiagnosticKind::UnexpectedToken,
            "multiple instances in one statement are not supported".to_string(),
        ))
    }

    fn connections(&mut self, out: &mut Vec<AstNode>, param: bool) -> PResult<()> {
        if self.at_punct(")") {
            return Ok(());
        }
        let mut named: Option<bool> = None;
        loop {
            let start = self.peek().span;
            let mut node = AstNode::new(NodeKind::PortConnection, start);
            if param {
                node = node.with_attr(attr::PARAM, "1");
            }
            let is_named = self.at_punct(".");
            if *named.get_or_insert(is_named) != is_named {
                return Err(self.error_here("named and positional connections cannot be mixed"));
            }
            if self.eat_punct(".") {
                if self.at_punct("*") {
                    return Err(self.unsupported("wildcard port connection"));
                }
                let (port, _) = self.expect_ident("port name")?;
                node = node.with_attr(attr::PORT, port);
                self.expect_punct("(")?;
                if !self.at_punct(")") {
                    node.children.push(self.expr()?);
                }
                self.expect_punct(")")?;
            } else {
                node.children.push(self.expr()?);
            }
            node.span = self.span_from(start);
            out.push(node);
            if !self.eat_punct(",") {
                return Ok(());
            }
        }
    }

    fn function(&mut self) -> PResult<AstNode> {
        let start = self.bump().span;
        let mut node = AstNode::new(NodeKind::FunctionDecl, start);
        if self.eat_kw("automatic") {
            node = node.with_attr(attr::AUTOMATIC, "1");
        }
        if self.eat_kw("integer") {
            node = node.with_attr(attr::TYPE, "integer");
        } else {
            if self.eat_kw("signed") {
                node = node.with_attr(attr::SIGNED, "1");
            }
            if let Some((m, l)) = self.opt_range()? {
                node = node.with_attr(attr::MSB, m).with_attr(attr::LSB, l);
            }
        }
        let (name, _) = self.expect_ident("function name")?;
        node = node.with_attr(attr::NAME, name);
        if self.eat_punct("(") {
            self.ansi_ports(&mut node.children)?;
            self.expect_punct(")")?;
        }
        self.expect_punct(";")?;
        loop {
            let t = self.peek().text.clone();
            match t.as_str() {
                "input" | "output" | "inout" if self.peek().kind == Tok::Keyword => {
                    self.body_port_decl(&mut node.children)?
                }
                "reg" | "integer" if self.peek().kind == Tok::Keyword => self.reg_decl(&mut node.children)?,
                "parameter" | "localparam" if self.peek().kind == Tok::Keyword => {
                    self.param_decl(&mut node.children)?
                }
                _ => break,
            }
        }
        let mut stmts = 0;
        while !self.at_kw("endfunction") {
            if self.at_eof() {
                let span = self.peek().span;
                self.record(span, DiagnosticKind::UnterminatedConstruct, "missing 'endfunction'".into());
                return Err(Bail);
            }
            if self.at_item_sync() {
                return Err(self.error_missing("'endfunction'", DiagnosticKind::UnterminatedConstruct));
            }
            node.children.push(self.stmt()?);
            stmts += 1;
        }
        if stmts == 0 {
            return Err(self.error_here("function body has no statement"));
        }
        self.bump();
        node.span = self.span_from(start);
        Ok(node)
    }

    // ---------------------------------------------------------------------
    // Statements
    // ---------------------------------------------------------------------

    fn stmt(&mut self) -> PResult<AstNode> {
        let t = self.peek().clone();
        match t.kind {
            Tok::Keyword => match t.text.as_str() {
                "begin" => self.block(),
                "if" => {
                    let start = self.bump().span;
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    let then = self.stmt()?;
                    let mut node = AstNode::new(NodeKind::IfStmt, start).with_children([cond, then]);
                    if self.eat_kw("else") {
                        node.children.push(self.stmt()?);
                    }
                    node.span = self.span_from(start);
                    Ok(node)
                }
                "case" | "casez" | "casex" => self.case_stmt(),
                "for" => {
                    let start = self.bump().span;
                    let [init, cond, step] = self.for_header()?;
                    let body = self.stmt()?;
                    Ok(AstNode::new(NodeKind::ForLoop, self.span_from(start)).with_children([init, cond, step, body]))
                }
                k if UNSUPPORTED_STMTS.contains(&k) => Err(self.unsupported("statement")),
                _ => Err(self.error_here(format!("expected a statement, found {}", t.describe()))),
            },
            Tok::Punct if t.text == ";" => {
                self.bump();
                Ok(AstNode::new(NodeKind::Block, t.span).with_attr(attr::NULL, "1"))
            }
            Tok::Punct if t.text == "#" => Err(self.unsupported("delay")),
            Tok::Punct if t.text == "@" => Err(self.unsupported("procedural event control")),
            Tok::SysIdent => Err(self.unsupported("system task")),
            Tok::Ident | Tok::Punct if t.kind == Tok::Ident || t.text == "{" => {
                if SYSTEMVERILOG_KEYWORDS.contains(&t.text.as_str()) {
                    return Err(self.unsupported("SystemVerilog construct"));
                }
                let node = self.procedural_assign()?;
                self.expect_punct(";")?;
                Ok(node)
            }
            Tok::Eof => Err(self.error_here("expected a statement before end of file")),
            _ => Err(self.error_here(format!("expected a statement, found {}", t.describe()))),
        }
    }

    fn procedural_assign(&mut self) -> PResult<AstNode> {
        let start = self.peek().span;
        let lhs = self.lvalue()?;
        let kind = if self.eat_punct("=") {
            NodeKind::BlockingAssign
        } else if self.eat_punct("<=") {
            NodeKind::NonBlockingAssign
        } else {
            return Err(self.error_missing("'=' or '<='", DiagnosticKind::UnexpectedToken));
        };
        if self.at_punct("#") || self.at_punct("@") {
            return Err(self.unsupported("intra-assignment timing control"));
        }
        let rhs = self.expr()?;
        Ok(AstNode::new(kind, self.span_from(start)).with_children([lhs, rhs]))
    }

    fn block(&mut self) -> PResult<AstNode> {
        let start = self.bump().span;
        let label = self.opt_label()?;
        let mut node = AstNode::new(NodeKind::Block, start);
        if let Some(l) = label {
            node = node.with_attr(attr::LABEL, l);
        }
        let mut failed = false;
        loop {
            if self.at_kw("end") {
                break;
            }
            if self.at_eof() {
                let span = self.peek().span;
                self.record(span, DiagnosticKind::UnterminatedConstruct, "missing 'end' for 'begin'".into());
                return Err(Bail);
            }
            if self.at_item_sync() || self.at_kw("endcase") {
                return Err(self.error_missing("'end'", DiagnosticKind::UnterminatedConstruct));
            }
            let s = self.pos;
            match self.stmt() {
                Ok(st) => node.children.push(st),
                Err(Bail) => {
                    failed = true;
                    self.recover_stmt(s);
                }
            }
        }
        self.bump();
        if failed {
            return Err(Bail);
        }
        node.span = self.span_from(start);
        Ok(node)
    }

    fn case_stmt(&mut self) -> PResult<AstNode> {
        let kw = self.bump();
        self.expect_punct("(")?;
        let subject = self.expr()?;
        self.expect_punct(")")?;
        let mut node = AstNode::new(NodeKind::CaseStmt, kw.span)
            .with_attr(attr::KIND, kw.text.clone())
            .with_child(subject);
        let mut failed = false;
        loop {
            if self.at_kw("endcase") {
                break;
            }
            if self.at_eof() {
                let span = self.peek().span;
                self.record(span, DiagnosticKind::UnterminatedConstruct, format!("missing 'endcase' for '{}'", kw.text));
                return Err(Bail);
            }
            if self.at_item_sync() || self.at_kw("end") {
                return Err(self.error_missing("'endcase'", DiagnosticKind::UnterminatedConstruct));
            }
            let s = self.pos;
            match self.case_item() {
                Ok(item) => node.children.push(item),
                Err(Bail) => {
                    failed = true;
                    self.recover_stmt(s);
                }
            }
        }
        self.bump();
        if failed {
            return Err(Bail);
        }
        node.span = self.span_from(kw.span);
        Ok(node)
    }

    fn case_item(&mut self) -> PResult<AstNode> {
        let start = self.peek().span;
        let mut node = AstNode::new(NodeKind::CaseItem, start);
        if self.eat_kw("default") {
            self.eat_punct(":");
            node = node.with_attr(attr::DEFAULT, "1");
        } else {
            loop {
                node.children.push(self.expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(":")?;
        }
        node.children.push(self.stmt()?);
        node.span = self.span_from(start);
        Ok(node)
    }

    fn for_header(&mut self) -> PResult<[AstNode; 3]> {
        self.expect_punct("(")?;
        if self.at_kw("genvar") || self.at_kw("integer") {
            return Err(self.unsupported("declaration inside for-loop header"));
        }
        let init = self.blocking_assign()?;
        self.expect_punct(";")?;
        let cond = self.expr()?;
        self.expect_punct(";")?;
        let step = self.blocking_assign()?;
        self.expect_punct(")")?;
        Ok([init, cond, step])
    }

    fn blocking_assign(&mut self) -> PResult<AstNode> {
        let start = self.peek().span;
        let lhs = self.lvalue()?;
        self.expect_punct("=")?;
        let rhs = self.expr()?;
        Ok(AstNode::new(NodeKind::BlockingAssign, self.span_from(start)).with_children([lhs, rhs]))
    }

    fn lvalue(&mut self) -> PResult<AstNode> {
        let t = self.peek().clone();
        if t.kind != Tok::Ident && !t.is_punct("{") {
            return Err(self.error_missing("assignment target", DiagnosticKind::UnexpectedToken));
        }
        let start = self.pos;
        let node = self.primary()?;
        if is_lvalue(&node) {
            Ok(node)
        } else {
            self.pos = start;
            Err(self.error_here("invalid assignment target"))
        }
    }

    // ---------------------------------------------------------------------
    // Expressions
    // ---------------------------------------------------------------------

    fn expr(&mut self) -> PResult<AstNode> {
        let cond = self.binary(1)?;
        if !self.at_punct("?") {
            return Ok(cond);
        }
        self.bump();
        let a = self.expr()?;
        self.expect_punct(":")?;
        let b = self.expr()?;
        let span = cond.span.to(b.span);
        Ok(AstNode::new(NodeKind::TernaryOp, span).with_children([cond, a, b]))
    }

    fn binary(&mut self, min_prec: u8) -> PResult<AstNode> {
        let mut lhs = self.unary()?;
        loop {
            let t = self.peek();
            if t.kind != Tok::Punct {
                break;
            }
            let Some(prec) = binary_precedence(&t.text) else { break };
            if prec < min_prec {
                break;
            }
            let op = self.bump().text;
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = AstNode::new(NodeKind::BinaryOp, span)
                .with_attr(attr::OP, op)
                .with_children([lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<AstNode> {
        let t = self.peek().clone();
        if t.kind == Tok::Punct && UNARY_OPS.contains(&t.text.as_str()) {
            self.bump();
            let operand = self.unary()?;
            let span = t.span.to(operand.span);
            return Ok(AstNode::new(NodeKind::UnaryOp, span)
                .with_attr(attr::OP, t.text)
                .with_child(operand));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<AstNode> {
        let t = self.peek().clone();
        match t.kind {
            Tok::Number => {
                self.bump();
                let text: String = t.text.chars().filter(|c| !c.is_whitespace()).collect();
                Ok(AstNode::new(NodeKind::IntLiteral, t.span).with_attr(attr::VALUE, text))
            }
            Tok::Real => Err(self.error_here("real literals are not supported")),
            Tok::Str => Err(self.error_here("string literals are not supported in expressions")),
            Tok::Ident => {
                self.bump();
                if self.at_punct("(") {
                    return self.call(t.text, t.span);
                }
                let base = AstNode::identifier(&t.text, t.span);
                self.selects(base)
            }
            Tok::SysIdent => {
                self.bump();
                if self.at_punct("(") {
                    self.call(t.text, t.span)
                } else {
                    Ok(AstNode::new(NodeKind::Call, t.span).with_attr(attr::NAME, t.text))
                }
            }
            Tok::Punct if t.text == "(" => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct if t.text == "{" => self.concat(),
            _ => Err(self.error_missing("expression", DiagnosticKind::UnexpectedToken)),
        }
    }

    fn call(&mut self, name: String, start: Span) -> PResult<AstNode> {
        self.bump(); // (
        let mut node = AstNode::new(NodeKind::Call, start).with_attr(attr::NAME, name);
        if !self.at_punct(")") {
            loop {
                node.children.push(self.expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        node.span = self.span_from(start);
        Ok(node)
    }

    fn selects(&mut self, mut base: AstNode) -> PResult<AstNode> {
        while self.at_punct("[") {
            self.bump();
            let first = self.expr()?;
            let mode = if self.at_punct(":") || self.at_punct("+:") || self.at_punct("-:") {
                Some(self.bump().text)
            } else {
                None
            };
            let node = match mode {
                Some(m) => {
                    let second = self.expr()?;
                    AstNode::new(NodeKind::RangeSelect, base.span)
                        .with_attr(attr::MODE, m)
                        .with_children([base, first, second])
                }
                None => AstNode::new(NodeKind::IndexSelect, base.span).with_children([base, first]),
            };
            self.expect_punct("]")?;
            base = node;
            base.span = base.span.to(self.prev_span());
        }
        Ok(base)
    }

    fn concat(&mut self) -> PResult<AstNode> {
        let start = self.bump().span;
        if self.at_punct("}") {
            return Err(self.error_here("empty concatenation"));
        }
        let first = self.expr()?;
        if self.at_punct("{") {
            self.bump();
            let mut node = AstNode::new(NodeKind::Replication, start).with_child(first);
            loop {
                node.children.push(self.expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct("}")?;
            self.expect_punct("}")?;
            node.span = self.span_from(start);
            return Ok(node);
        }
        let mut node = AstNode::new(NodeKind::Concat, start).with_child(first);
        while self.eat_punct(",") {
            node.children.push(self.expr()?);
        }
        self.expect_punct("}")?;
        node.span = self.span_from(start);
        Ok(node)
    }
}

/// First header in a procedural item whose body is a bare statement rather
/// than a `begin`/`end` block (an `else if` chain is not counted).
fn missing_begin_candidate(item: &AstNode) -> Option<Span> {
    let bare = |n: &AstNode| n.kind != NodeKind::Block;
    match item.kind {
        NodeKind::AlwaysBlock | NodeKind::InitialBlock => {
            let body = item.children.last()?;
            if bare(body) {
                Some(item.span)
            } else {
                first_bare_body(body)
            }
        }
        _ => None,
    }
}

fn first_bare_body(n: &AstNode) -> Option<Span> {
    let found = match n.kind {
        NodeKind::IfStmt => bare_stmt(&n.children[1]) || n.children.get(2).is_some_and(|e| e.kind != NodeKind::IfStmt && bare_stmt(e)),
        NodeKind::ForLoop => bare_stmt(&n.children[3]),
        NodeKind::CaseItem => n.children.last().is_some_and(bare_stmt),
        _ => false,
    };
    if found {
        return Some(n.span);
    }
    n.children.iter().find_map(first_bare_body)
}

fn bare_stmt(n: &AstNode) -> bool {
    n.kind != NodeKind::Block
}

fn is_lvalue(n: &AstNode) -> bool {
    match n.kind {
        NodeKind::Identifier => true,
        NodeKind::IndexSelect | NodeKind::RangeSelect => is_lvalue(&n.children[0]),
        NodeKind::Concat => n.children.iter().all(is_lvalue),
        _ => false,
    }
}

fn port_node(
    dir: &str,
    net: &str,
    signed: bool,
    range: &Option<(String, String)>,
    style: &str,
    name: &str,
    span: Span,
) -> AstNode {
    let mut node = AstNode::new(NodeKind::PortDecl, span)
        .with_attr(attr::NAME, name)
        .with_attr(attr::DIR, dir)
        .with_attr(attr::STYLE, style);
    if !net.is_empty() {
        node = node.with_attr(attr::NET, net);
    }
    if signed {
        node = node.with_attr(attr::SIGNED, "1");
    }
    if let Some((m, l)) = range {
        node = node.with_attr(attr::MSB, m.clone()).with_attr(attr::LSB, l.clone());
    }
    node
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(src: &str) -> Vec<AstNode> {
        match parse(src) {
            Ok(f) => f,
            Err(r) => panic!("unexpected diagnostics:\n{}", r.render("t.v")),
        }
    }

    fn err(src: &str) -> SyntaxReport {
        parse(src).expect_err("expected a syntax error")
    }

    fn kinds(n: &AstNode) -> Vec<NodeKind> {
        n.children.iter().map(|c| c.kind).collect()
    }

    #[test]
    fn minimal_module() {
        let f = ok("module m(input a, output b); assign b = a; endmodule");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].kind, NodeKind::Module);
        assert_eq!(f[0].name(), Some("m"));
        assert_eq!(kinds(&f[0]), vec![NodeKind::PortDecl, NodeKind::PortDecl, NodeKind::ContinuousAssign]);
    }

    #[test]
    fn missing_semicolon_single_diagnostic_on_line_one() {
        let r = err("module m(input a, output b); assign b = a endmodule");
        assert_eq!(r.diagnostics.len(), 1);
        let d = &r.diagnostics[0];
        assert_eq!(d.kind, DiagnosticKind::UnexpectedToken);
        assert_eq!(d.span.line, 1);
        assert_eq!(d.span.column, 43);
    }

    #[test]
    fn empty_source_is_empty_forest() {
        assert!(ok("").is_empty());
        assert!(ok("  // nothing\n").is_empty());
    }

    #[test]
    fn missing_endmodule_is_unterminated_at_final_line() {
        let src = "module m(input a, output b);\n  assign b = a;\n";
        let r = err(src);
        assert_eq!(r.diagnostics.len(), 1);
        assert_eq!(r.diagnostics[0].kind, DiagnosticKind::UnterminatedConstruct);
        assert_eq!(r.diagnostics[0].span.line, 2);
        assert_eq!(r.diagnostics[0].offending_line_text, "  assign b = a;");
    }

    #[test]
    fn stray_at_sign() {
        let r = err("module m;\n  wire a;\n  @ assign a = 1'b0;\nendmodule\n");
        let d = &r.diagnostics[0];
        assert!(matches!(d.kind, DiagnosticKind::UnexpectedToken | DiagnosticKind::IllegalCharacter));
        assert_eq!(d.span.line, 3);
    }

    #[test]
    fn multiple_errors_are_reported() {
        let src = "module m(input a, output reg b, output c);\n  assign c = a\n  always @(*) begin\n    b = a +;\n  end\nendmodule\n";
        let r = err(src);
        assert_eq!(r.diagnostics.len(), 2, "{}", r.render("t.v"));
        assert_eq!(r.diagnostics[0].span.line, 2);
        assert_eq!(r.diagnostics[1].span.line, 4);
    }

    #[test]
    fn mismatched_delimiter() {
        let r = err("module m(input [7:0] a, output b);\n  assign b = (a[0] & a[1]];\nendmodule\n");
        assert_eq!(r.diagnostics[0].kind, DiagnosticKind::MismatchedDelimiter);
    }

    #[test]
    fn unsupported_construct_is_named() {
        let r = err("module m; always #5 x = 1; endmodule");
        assert!(r.diagnostics[0].message.contains("delay"));
        let r = err("module m; logic [3:0] x; endmodule");
        assert!(r.diagnostics[0].message.contains("logic"));
        let r = err("module m; task t; endtask endmodule");
        assert!(r.diagnostics[0].message.contains("task"));
    }

    #[test]
    fn sequential_block_shapes() {
        let src = r#"
module counter #(parameter W = 8) (
  input clk, input rst_n,
  output reg [W-1:0] q
);
  always @(posedge clk or negedge rst_n) begin
    if (!rst_n) q <= {W{1'b0}};
    else q <= q + 1'b1;
  end
endmodule
"#;
        let f = ok(src);
        let m = &f[0];
        assert_eq!(m.children[0].kind, NodeKind::ParamDecl);
        assert_eq!(m.children[3].attr(attr::MSB), Some("W - 1"));
        let always = &m.children[4];
        let sens = &always.children[0];
        assert_eq!(sens.children.len(), 2);
        assert_eq!(sens.children[1].attr(attr::EDGE), Some("negedge"));
        let iff = &always.children[1].children[0];
        assert_eq!(iff.kind, NodeKind::IfStmt);
        assert_eq!(iff.children[1].children[1].kind, NodeKind::Replication);
    }

    #[test]
    fn precedence() {
        let e = parse_expression("a + b * c << 1 == d & e | f && g || h ? x : y").unwrap();
        assert_eq!(e.kind, NodeKind::TernaryOp);
        assert_eq!(expr_text(&e), "((((((a + (b * c)) << 1) == d) & e) | f) && g) || h ? x : y");
    }

    #[test]
    fn selects_and_calls() {
        let e = parse_expression("mem[i][3:0] + v[base +: 4] + $clog2(DEPTH) + f(a, b)").unwrap();
        let mut kinds = Vec::new();
        e.walk(&mut |n| kinds.push(n.kind));
        assert!(kinds.contains(&NodeKind::RangeSelect));
        assert!(kinds.contains(&NodeKind::IndexSelect));
        assert_eq!(kinds.iter().filter(|k| **k == NodeKind::Call).count(), 2);
    }

    #[test]
    fn operator_arity_holds() {
        let e = parse_expression("-a + ~(b ^ c) ? &d : e").unwrap();
        e.walk(&mut |n| {
            if let Some(a) = n.kind.operator_arity() {
                assert_eq!(n.children.len(), a, "{:?}", n.kind);
            }
        });
    }

    #[test]
    fn generate_and_instances() {
        let src = r#"
module top(input [3:0] a, output [3:0] y);
  genvar i;
  generate
    for (i = 0; i < 4; i = i + 1) begin : g
      inv u (.a(a[i]), .y(y[i]));
    end
  endgenerate
endmodule
module inv(input a, output y);
  assign y = ~a;
endmodule
"#;
        let f = ok(src);
        assert_eq!(f.len(), 2);
        let gen = &f[0].children[3];
        assert_eq!(gen.kind, NodeKind::GenerateBlock);
        assert_eq!(gen.children[0].kind, NodeKind::ForLoop);
        assert_eq!(gen.children[0].children[3].children[0].kind, NodeKind::Instance);
    }

    #[test]
    fn function_declaration() {
        let src = "module m(input [7:0] a, output [7:0] y);\n  function [7:0] rev;\n    input [7:0] x;\n    integer k;\n    begin\n      for (k = 0; k < 8; k = k + 1) rev[k] = x[7 - k];\n    end\n  endfunction\n  assign y = rev(a);\nendmodule\n";
        let f = ok(src);
        let func = &f[0].children[2];
        assert_eq!(func.kind, NodeKind::FunctionDecl);
        assert_eq!(kinds(func), vec![NodeKind::PortDecl, NodeKind::RegDecl, NodeKind::Block]);
    }

    #[test]
    fn subset_rules() {
        let r = err("module m(input clk, input rst, output reg q);\n  always @(clk or negedge rst) q <= 1'b0;\nendmodule\n");
        assert!(r.diagnostics[0].message.contains("mixed"));
        let r = err("module m #(W = 4) (input a); endmodule");
        assert!(r.diagnostics[0].message.contains("'parameter'"));
        let r = err("module m(input a, output b); inv u (.a(a), b); endmodule");
        assert!(r.diagnostics[0].message.contains("mixed"));
    }

    #[test]
    fn stray_end_points_at_bare_body() {
        let src = "module m(input clk, output reg q);\n  always @(posedge clk)\n    q <= ~q;\n  end\nendmodule\n";
        let r = err(src);
        let lines: Vec<u32> = r.diagnostics.iter().map(|d| d.span.line).collect();
        assert_eq!(lines, vec![2, 4]);
    }

    #[test]
    fn deterministic() {
        let src = "module m(input a, output b); assign b = a endmodule";
        assert_eq!(check_syntax(src), check_syntax(src));
    }

    #[test]
    fn check_syntax_agrees_with_parse() {
        for src in ["", "module m; endmodule", "module m; wire endmodule", "garbage"] {
            assert_eq!(check_syntax(src).ok(), parse(src).is_ok());
        }
    }
}
