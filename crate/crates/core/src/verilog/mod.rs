// SPDX-License-Identifier: Apache-2.0

//! Verilog front end: lexer, parser, canonical printer.

pub mod ast;
pub mod diag;
pub mod fold;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use ast::{attr, forests_isomorphic, AstNode, NodeKind, Span};
pub use diag::{DiagnosticKind, SyntaxDiagnostic, SyntaxReport};
pub use parser::{check_syntax, parse, parse_expression};
pub use printer::{expr_text, pretty_print, StructuralError};
