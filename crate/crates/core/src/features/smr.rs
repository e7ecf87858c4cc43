// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::normalize_identifiers;
use crate::verilog::ast::AstNode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreeMatchConfig {
    pub min_subtree_nodes: usize,
    pub normalize_identifiers: bool,
}

impl Default for SubtreeMatchConfig {
    fn default() -> Self {
        SubtreeMatchConfig {
            min_subtree_nodes: 2,
            normalize_identifiers: true,
        }
    }
}

pub type SubtreeDigest = [u8; 32];

/// Structural digest and size of every subtree, in post-order.
pub fn subtree_digests(forest: &[AstNode]) -> Vec<(SubtreeDigest, usize)> {
    let mut out = Vec::new();
    for root in forest {
        digest_into(root, &mut out);
    }
    out
}

fn digest_into(n: &AstNode, out: &mut Vec<(SubtreeDigest, usize)>) -> (SubtreeDigest, usize) {
    let mut h = Sha256::new();
    h.update(n.kind.to_string());
    h.update([0u8]);
    for (k, v) in &n.attrs {
        h.update((k.len() as u64).to_le_bytes());
        h.update(k);
        h.update((v.len() as u64).to_le_bytes());
        h.update(v);
    }
    h.update((n.children.len() as u64).to_le_bytes());
    let mut size = 1;
    for c in &n.children {
        let (d, s) = digest_into(c, out);
        h.update(d);
        size += s;
    }
    let d: SubtreeDigest = h.finalize().into();
    out.push((d, size));
    (d, size)
}

fn qualifying(forest: &[AstNode], min: usize) -> HashMap<SubtreeDigest, usize> {
    let mut m = HashMap::new();
    for (d, size) in subtree_digests(forest) {
        if size >= min {
            *m.entry(d).or_insert(0) += 1;
        }
    }
    m
}

/// Percentage of the reference's qualifying subtrees that also occur in
/// the candidate, matched with multiplicity.
pub fn subtree_match_rate(reference: &[AstNode], candidate: &[AstNode], cfg: &SubtreeMatchConfig) -> f64 {
    let min = cfg.min_subtree_nodes.max(1);
    let (r, c) = if cfg.normalize_identifiers {
        (
            qualifying(&normalize_identifiers(reference), min),
            qualifying(&normalize_identifiers(candidate), min),
        )
    } else {
        (qualifying(reference, min), qualifying(candidate, min))
    };
    let total: usize = r.values().sum();
    if total == 0 {
        return if c.is_empty() { 100.0 } else { 0.0 };
    }
    let matched: usize = r.iter().map(|(d, n)| (*n).min(c.get(d).copied().unwrap_or(0))).sum();
    100.0 * matched as f64 / total as f64
}
