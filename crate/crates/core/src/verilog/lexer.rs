// SPDX-License-Identifier: Apache-2.0

//! Tokenizer. Lexical problems are collected as diagnostics; the token
//! stream always ends with a single `Eof` token.

use super::ast::Span;
use super::diag::{DiagnosticKind, SyntaxDiagnostic};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tok {
    Ident,
    Keyword,
    SysIdent,
    Number,
    Real,
    Str,
    Punct,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: Tok,
    pub text: String,
    pub span: Span,
}

impl Token {
    pub fn is(&self, kind: Tok, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_kw(&self, text: &str) -> bool {
        self.is(Tok::Keyword, text)
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.is(Tok::Punct, text)
    }

    pub fn end_offset(&self) -> usize {
        self.span.byte_offset + self.span.length
    }

    /// Human-facing description used in messages.
    pub fn describe(&self) -> String {
        match self.kind {
            Tok::Eof => "end of file".to_string(),
            _ => format!("'{}'", self.text),
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1", "case", "casex",
    "casez", "cell", "cmos", "config", "deassign", "default", "defparam", "design", "disable",
    "edge", "else", "end", "endcase", "endconfig", "endfunction", "endgenerate", "endmodule",
    "endprimitive", "endspecify", "endtable", "endtask", "event", "for", "force", "forever",
    "fork", "function", "generate", "genvar", "highz0", "highz1", "if", "ifnone", "incdir",
    "include", "initial", "inout", "input", "instance", "integer", "join", "large", "liblist",
    "library", "localparam", "macromodule", "medium", "module", "nand", "negedge", "nmos", "nor",
    "noshowcancelled", "not", "notif0", "notif1", "or", "output", "parameter", "pmos", "posedge",
    "primitive", "pull0", "pull1", "pulldown", "pullup", "pulsestyle_onevent",
    "pulsestyle_ondetect", "rcmos", "real", "realtime", "reg", "release", "repeat", "rnmos",
    "rpmos", "rtran", "rtranif0", "rtranif1", "scalared", "showcancelled", "signed", "small",
    "specify", "specparam", "strong0", "strong1", "supply0", "supply1", "table", "task", "time",
    "tran", "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg", "unsigned",
    "use", "vectored", "wait", "wand", "weak0", "weak1", "while", "wire", "wor", "xnor", "xor",
];

/// SystemVerilog keywords that show up in LLM output; reported by name.
pub const SYSTEMVERILOG_KEYWORDS: &[&str] = &[
    "logic", "bit", "byte", "int", "shortint", "longint", "always_ff", "always_comb",
    "always_latch", "typedef", "enum", "struct", "union", "packed", "interface", "endinterface",
    "modport", "unique", "priority", "import", "package", "endpackage", "class", "endclass",
    "assert", "property", "sequence", "var", "void", "return", "break", "continue",
];

// Longest first.
const PUNCTS: &[&str] = &[
    "<<<", ">>>", "===", "!==", "**", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|",
    "~^", "^~", "+:", "-:", "+", "-", "*", "/", "%", "<", ">", "!", "~", "&", "|", "^", "=", "?",
    ":", ";", ",", ".", "(", ")", "[", "]", "{", "}", "@", "#",
];

const IGNORED_DIRECTIVES: &[&str] = &["timescale"];

const LINE_DIRECTIVES: &[&str] = &[
    "define", "undef", "ifdef", "ifndef", "elsif", "else", "endif", "include", "default_nettype",
    "resetall", "celldefine", "endcelldefine", "unconnected_drive", "nounconnected_drive",
    "line", "pragma", "begin_keywords", "end_keywords",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$') && !is_keyword(s)
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    tokens: Vec<Token>,
    diags: Vec<SyntaxDiagnostic>,
}

pub fn tokenize(src: &str) -> (Vec<Token>, Vec<SyntaxDiagnostic>) {
    let mut lx = Lexer {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
        tokens: Vec::new(),
        diags: Vec::new(),
    };
    lx.run();
    let eof = lx.eof_span();
    lx.tokens.push(Token {
        kind: Tok::Eof,
        text: String::new(),
        span: eof,
    });
    (lx.tokens, lx.diags)
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.bytes.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.src[self.pos..].chars().next()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, u32, u32) {
        (self.pos, self.line, self.col)
    }

    fn span_from(&self, m: (usize, u32, u32)) -> Span {
        Span::new(m.1, m.2, m.0, self.pos - m.0)
    }

    /// Zero-width span just after the last non-whitespace character.
    fn eof_span(&self) -> Span {
        if let Some(t) = self.tokens.last() {
            let line_text_end = t.end_offset();
            let text = &self.src[t.span.byte_offset..line_text_end];
            let mut line = t.span.line;
            let mut col = t.span.column;
            for c in text.chars() {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            return Span::new(line, col, line_text_end, 0);
        }
        Span::new(1, 1, 0, 0)
    }

    fn diag(&mut self, span: Span, kind: DiagnosticKind, msg: impl Into<String>) {
        let d = SyntaxDiagnostic::new(self.src, span, kind, msg);
        self.diags.push(d);
    }

    fn push(&mut self, kind: Tok, m: (usize, u32, u32)) {
        let span = self.span_from(m);
        let text = self.src[m.0..self.pos].to_string();
        self.tokens.push(Token { kind, text, span });
    }

    fn run(&mut self) {
        while let Some(b) = self.peek() {
            let m = self.mark();
            match b {
                b' ' | b'\t' | b'\r' | b'\n' | 0x0c => {
                    self.bump();
                }
                b'/' if self.peek_at(1) == Some(b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                b'/' if self.peek_at(1) == Some(b'*') => self.block_comment(m),
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    self.eat_while(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'$');
                    let kind = if is_keyword(&self.src[m.0..self.pos]) {
                        Tok::Keyword
                    } else {
                        Tok::Ident
                    };
                    self.push(kind, m);
                }
                b'$' => {
                    self.bump();
                    self.eat_while(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'$');
                    if self.pos - m.0 == 1 {
                        let span = self.span_from(m);
                        self.diag(span, DiagnosticKind::IllegalCharacter, "stray '$'");
                    } else {
                        self.push(Tok::SysIdent, m);
                    }
                }
                b'0'..=b'9' => self.number(m),
                b'\'' => self.based_literal(m, true),
                b'"' => self.string(m),
                b'`' => self.directive(m),
                b'\\' => {
                    self.eat_while(|c| !c.is_ascii_whitespace());
                    let span = self.span_from(m);
                    self.diag(
                        span,
                        DiagnosticKind::UnexpectedToken,
                        "escaped identifiers are not supported",
                    );
                }
                _ => {
                    let rest = &self.src[self.pos..];
                    if let Some(p) = PUNCTS.iter().find(|p| rest.starts_with(**p)) {
                        for _ in 0..p.len() {
                            self.bump();
                        }
                        self.push(Tok::Punct, m);
                    } else {
                        let c = self.bump().unwrap_or('?');
                        let span = self.span_from(m);
                        self.diag(
                            span,
                            DiagnosticKind::IllegalCharacter,
                            format!("illegal character '{}'", c.escape_default()),
                        );
                    }
                }
            }
        }
    }

    fn eat_while(&mut self, f: impl Fn(u8) -> bool) {
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.bump();
        }
    }

    fn block_comment(&mut self, m: (usize, u32, u32)) {
        self.bump();
        self.bump();
        loop {
            match self.peek() {
                None => {
                    let span = Span::new(m.1, m.2, m.0, 2);
                    self.diag(span, DiagnosticKind::UnterminatedConstruct, "unterminated block comment");
                    return;
                }
                Some(b'*') if self.peek_at(1) == Some(b'/') => {
                    self.bump();
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn skip_inline_ws(&mut self) {
        self.eat_while(|c| c == b' ' || c == b'\t');
    }

    fn number(&mut self, m: (usize, u32, u32)) {
        self.eat_while(|c| c.is_ascii_digit() || c == b'_');
        // Size followed by a base: `8'hFF`, `4 'b1010`.
        let save = (self.pos, self.line, self.col);
        self.skip_inline_ws();
        if self.peek() == Some(b'\'') && self.base_follows(1) {
            self.based_literal(m, false);
            return;
        }
        (self.pos, self.line, self.col) = save;
        if self.peek() == Some(b'.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            self.eat_while(|c| c.is_ascii_digit() || c == b'_');
            if matches!(self.peek(), Some(b'e' | b'E')) {
                self.bump();
                if matches!(self.peek(), Some(b'+' | b'-')) {
                    self.bump();
                }
                self.eat_while(|c| c.is_ascii_digit());
            }
            self.push(Tok::Real, m);
            return;
        }
        self.push(Tok::Number, m);
    }

    fn base_follows(&self, at: usize) -> bool {
        let mut i = at;
        if matches!(self.peek_at(i), Some(b's' | b'S')) {
            i += 1;
        }
        matches!(self.peek_at(i), Some(b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H'))
    }

    /// Lexes `'[s]<base><digits>`; `m` marks the start of the optional size.
    fn based_literal(&mut self, m: (usize, u32, u32), no_size: bool) {
        if no_size && !self.base_follows(1) {
            self.bump();
            let span = self.span_from(m);
            self.diag(span, DiagnosticKind::IllegalCharacter, "stray apostrophe");
            return;
        }
        self.bump(); // '
        if matches!(self.peek(), Some(b's' | b'S')) {
            self.bump();
        }
        let base = self.bump().unwrap_or('d').to_ascii_lowercase();
        self.skip_inline_ws();
        let digits_start = self.pos;
        self.eat_while(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'?');
        let digits = &self.src[digits_start..self.pos];
        let valid = |c: char| -> bool {
            if c == '_' {
                return true;
            }
            let xz = matches!(c, 'x' | 'X' | 'z' | 'Z' | '?');
            match base {
                'b' => matches!(c, '0' | '1') || xz,
                'o' => c.is_digit(8) || xz,
                'd' => c.is_ascii_digit() || xz,
                _ => c.is_ascii_hexdigit() || xz,
            }
        };
        let span = self.span_from(m);
        if digits.is_empty() {
            self.diag(span, DiagnosticKind::UnexpectedToken, "based literal has no digits");
            return;
        }
        if let Some(bad) = digits.chars().find(|c| !valid(*c)) {
            self.diag(
                span,
                DiagnosticKind::UnexpectedToken,
                format!("invalid digit '{}' in base-{} literal", bad, base),
            );
            return;
        }
        self.push(Tok::Number, m);
    }

    fn string(&mut self, m: (usize, u32, u32)) {
        self.bump();
        loop {
            match self.peek() {
                None | Some(b'\n') => {
                    let span = self.span_from(m);
                    self.diag(span, DiagnosticKind::UnterminatedConstruct, "unterminated string literal");
                    return;
                }
                Some(b'\\') => {
                    self.bump();
                    self.bump();
                }
                Some(b'"') => {
                    self.bump();
                    self.push(Tok::Str, m);
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn directive(&mut self, m: (usize, u32, u32)) {
        self.bump();
        self.eat_while(|c| c.is_ascii_alphanumeric() || c == b'_');
        let name = self.src[m.0 + 1..self.pos].to_string();
        let span = self.span_from(m);
        if IGNORED_DIRECTIVES.contains(&name.as_str()) {
            self.eat_while(|c| c != b'\n');
            return;
        }
        if name.is_empty() {
            self.diag(span, DiagnosticKind::IllegalCharacter, "stray '`'");
            return;
        }
        self.diag(
            span,
            DiagnosticKind::UnknownDirective,
            format!("compiler directive '`{}' is not supported", name),
        );
        if LINE_DIRECTIVES.contains(&name.as_str()) {
            self.eat_while(|c| c != b'\n');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(Tok, String)> {
        tokenize(src).0.into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn based_literals_are_single_tokens() {
        let t = kinds("8'hFF 4 'b10_1x 'd3 3'sd2 12");
        let nums: Vec<_> = t.iter().filter(|(k, _)| *k == Tok::Number).map(|(_, s)| s.as_str()).collect();
        assert_eq!(nums, vec!["8'hFF", "4 'b10_1x", "'d3", "3'sd2", "12"]);
    }

    #[test]
    fn longest_operator_wins() {
        let t = kinds("a <<< b !== c ~^ d");
        let ops: Vec<_> = t.iter().filter(|(k, _)| *k == Tok::Punct).map(|(_, s)| s.as_str()).collect();
        assert_eq!(ops, vec!["<<<", "!==", "~^"]);
    }

    #[test]
    fn timescale_is_ignored_define_is_reported() {
        let (toks, diags) = tokenize("`timescale 1ns/1ps\n`define W 8\nmodule m; endmodule");
        assert!(toks[0].is_kw("module"));
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::UnknownDirective);
        assert_eq!(diags[0].span.line, 2);
    }

    #[test]
    fn illegal_character_position() {
        let (_, diags) = tokenize("module m;\n  wire \u{00e9};\nendmodule");
        assert_eq!(diags[0].kind, DiagnosticKind::IllegalCharacter);
        assert_eq!((diags[0].span.line, diags[0].span.column), (2, 8));
    }

    #[test]
    fn unterminated_comment() {
        let (_, diags) = tokenize("module m; /* open");
        assert_eq!(diags[0].kind, DiagnosticKind::UnterminatedConstruct);
    }

    #[test]
    fn eof_span_sits_after_last_token() {
        let (toks, _) = tokenize("module m;\nendmodule\n\n\n");
        let eof = toks.last().unwrap();
        assert_eq!((eof.span.line, eof.span.column), (2, 10));
    }

    #[test]
    fn bad_binary_digit() {
        let (_, diags) = tokenize("4'b1021");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("'2'"));
    }
}
