// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use crate::verilog::ast::{attr, AstNode, NodeKind, EXPRESSION_ATTRS};
use crate::verilog::{expr_text, parse_expression};

#[derive(Default)]
struct Renamer {
    values: HashMap<String, String>,
    modules: HashMap<String, String>,
}

impl Renamer {
    fn value(&mut self, name: &str) -> String {
        let next = self.values.len();
        self.values.entry(name.to_string()).or_insert_with(|| format!("v{}", next)).clone()
    }

    fn module(&mut self, name: &str) -> String {
        let next = self.modules.len();
        self.modules.entry(name.to_string()).or_insert_with(|| format!("m{}", next)).clone()
    }

    fn rename_attr(&mut self, n: &mut AstNode, key: &str, module_space: bool) {
        if let Some(old) = n.attrs.get(key).cloned() {
            if old.is_empty() {
                return;
            }
            let new = if module_space { self.module(&old) } else { self.value(&old) };
            n.attrs.insert(key.to_string(), new);
        }
    }

    fn rename_expr_text(&mut self, text: &str) -> String {
        match parse_expression(text) {
            Ok(mut e) => {
                self.rename_tree(&mut e);
                expr_text(&e)
            }
            Err(_) => text.to_string(),
        }
    }

    fn rename_node(&mut self, n: &mut AstNode) {
        for key in EXPRESSION_ATTRS {
            if let Some(text) = n.attrs.get(key).cloned() {
                let new = self.rename_expr_text(&text);
                n.attrs.insert(key.to_string(), new);
            }
        }
        match n.kind {
            NodeKind::Module => self.rename_attr(n, attr::NAME, true),
            NodeKind::Instance => {
                self.rename_attr(n, attr::MODULE, true);
                self.rename_attr(n, attr::NAME, false);
            }
            NodeKind::PortConnection => self.rename_attr(n, attr::PORT, false),
            NodeKind::Call => {
                if !n.name().is_some_and(|s| s.starts_with('$')) {
                    self.rename_attr(n, attr::NAME, false);
                }
            }
            NodeKind::Identifier
            | NodeKind::PortDecl
            | NodeKind::NetDecl
            | NodeKind::RegDecl
            | NodeKind::ParamDecl
            | NodeKind::FunctionDecl => self.rename_attr(n, attr::NAME, false),
            _ => {}
        }
        self.rename_attr(n, attr::LABEL, false);
    }

    fn rename_tree(&mut self, n: &mut AstNode) {
        self.rename_node(n);
        for c in &mut n.children {
            self.rename_tree(c);
        }
    }
}

/// Alpha-rename identifiers to `v0, v1, …` (modules to `m0, m1, …`) in
/// first-occurrence pre-order across the whole forest.
pub fn normalize_identifiers(forest: &[AstNode]) -> Vec<AstNode> {
    let mut r = Renamer::default();
    let mut out = forest.to_vec();
    for m in &mut out {
        r.rename_tree(m);
    }
    out
}
