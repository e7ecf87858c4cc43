// SPDX-License-Identifier: Apache-2.0

//! Generic syntax tree for the supported Verilog-2001 subset.
//!
//! Every construct is an [`AstNode`] with a [`NodeKind`], a map of semantic
//! attributes (identifier text, operator symbol, literal text, width
//! expressions) and ordered children. Spans are carried for diagnostics but
//! never take part in structural comparison.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Source location of a token or node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    /// 1-based line.
    pub line: u32,
    /// 1-based column, counted in characters.
    pub column: u32,
    pub byte_offset: usize,
    pub length: usize,
}

impl Span {
    pub fn new(line: u32, column: u32, byte_offset: usize, length: usize) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        Span {
            line,
            column,
            byte_offset,
            length,
        }
    }

    /// Placeholder span for synthesized nodes.
    pub fn synthetic() -> Self {
        Span::new(1, 1, 0, 0)
    }

    /// Smallest span covering `self` and `other` (line/column taken from the earlier one).
    pub fn to(self, other: Span) -> Span {
        let (first, _) = if self.byte_offset <= other.byte_offset {
            (self, other)
        } else {
            (other, self)
        };
        let end = (self.byte_offset + self.length).max(other.byte_offset + other.length);
        Span {
            length: end - first.byte_offset,
            ..first
        }
    }
}

impl Default for Span {
    fn default() -> Self {
        Span::synthetic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Module,
    PortDecl,
    ParamDecl,
    NetDecl,
    RegDecl,
    ContinuousAssign,
    AlwaysBlock,
    InitialBlock,
    IfStmt,
    CaseStmt,
    CaseItem,
    ForLoop,
    BlockingAssign,
    NonBlockingAssign,
    BinaryOp,
    UnaryOp,
    TernaryOp,
    Concat,
    Replication,
    IndexSelect,
    RangeSelect,
    Identifier,
    IntLiteral,
    Instance,
    PortConnection,
    GenerateBlock,
    EventControl,
    FunctionDecl,
    SensitivityList,
    /// `begin ... end` sequential block, or the null statement `;`.
    Block,
    /// Function or system function call inside an expression.
    Call,
}

impl NodeKind {
    /// Exact child count demanded by operator kinds.
    pub fn operator_arity(self) -> Option<usize> {
        match self {
            NodeKind::BinaryOp => Some(2),
            NodeKind::UnaryOp => Some(1),
            NodeKind::TernaryOp => Some(3),
            _ => None,
        }
    }

    pub fn is_expression(self) -> bool {
        matches!(
            self,
            NodeKind::BinaryOp
                | NodeKind::UnaryOp
                | NodeKind::TernaryOp
                | NodeKind::Concat
                | NodeKind::Replication
                | NodeKind::IndexSelect
                | NodeKind::RangeSelect
                | NodeKind::Identifier
                | NodeKind::IntLiteral
                | NodeKind::Call
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Attribute keys used by the parser.
pub mod attr {
    pub const NAME: &str = "name";
    pub const OP: &str = "op";
    pub const VALUE: &str = "value";
    pub const DIR: &str = "dir";
    pub const NET: &str = "net";
    pub const TYPE: &str = "type";
    pub const SIGNED: &str = "signed";
    pub const MSB: &str = "msb";
    pub const LSB: &str = "lsb";
    pub const ARRAY_MSB: &str = "array_msb";
    pub const ARRAY_LSB: &str = "array_lsb";
    pub const STYLE: &str = "style";
    pub const KIND: &str = "kind";
    pub const EDGE: &str = "edge";
    pub const STAR: &str = "star";
    pub const LABEL: &str = "label";
    pub const MODULE: &str = "module";
    pub const PORT: &str = "port";
    pub const PARAM: &str = "param";
    pub const DEFAULT: &str = "default";
    pub const NULL: &str = "null";
    pub const MODE: &str = "mode";
    pub const HEADER: &str = "header";
    pub const AUTOMATIC: &str = "automatic";
    pub const INIT: &str = "init";
}

/// Attribute keys whose values are canonical expression text.
pub const EXPRESSION_ATTRS: [&str; 4] = [attr::MSB, attr::LSB, attr::ARRAY_MSB, attr::ARRAY_LSB];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AstNode {
    pub kind: NodeKind,
    pub attrs: BTreeMap<String, String>,
    pub children: Vec<AstNode>,
    pub span: Span,
}

impl AstNode {
    pub fn new(kind: NodeKind, span: Span) -> Self {
        AstNode {
            kind,
            attrs: BTreeMap::new(),
            children: Vec::new(),
            span,
        }
    }

    pub fn with_attr(mut self, key: &str, value: impl Into<String>) -> Self {
        self.attrs.insert(key.to_string(), value.into());
        self
    }

    pub fn with_child(mut self, child: AstNode) -> Self {
        self.children.push(child);
        self
    }

    pub fn with_children(mut self, children: impl IntoIterator<Item = AstNode>) -> Self {
        self.children.extend(children);
        self
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).map(String::as_str)
    }

    pub fn flag(&self, key: &str) -> bool {
        self.attr(key) == Some("1")
    }

    pub fn name(&self) -> Option<&str> {
        self.attr(attr::NAME)
    }

    pub fn identifier(name: &str, span: Span) -> Self {
        AstNode::new(NodeKind::Identifier, span).with_attr(attr::NAME, name)
    }

    /// Number of nodes in this subtree, including `self`.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a AstNode)) {
        visit(self);
        for c in &self.children {
            c.walk(visit);
        }
    }

    pub fn walk_mut(&mut self, visit: &mut impl FnMut(&mut AstNode)) {
        visit(self);
        for c in &mut self.children {
            c.walk_mut(visit);
        }
    }

    /// Equal kinds, attributes and child order, ignoring spans.
    pub fn structurally_eq(&self, other: &AstNode) -> bool {
        self.kind == other.kind
            && self.attrs == other.attrs
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.structurally_eq(b))
    }
}

/// Compare two forests ignoring spans.
pub fn forests_isomorphic(a: &[AstNode], b: &[AstNode]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.structurally_eq(y))
}
