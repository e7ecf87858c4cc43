// SPDX-License-Identifier: Apache-2.0

//! Oracles shared by the property suites and the acceptance run.

#![allow(dead_code)]

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rtlcast::features::{normalize_identifiers, SubtreeMatchConfig};
use rtlcast::predictor::synth::random_design;
use rtlcast::verilog::lexer::{tokenize, Tok};
use rtlcast::verilog::{check_syntax, parse, AstNode};

// Resolves from both the core and the cli manifest directories.
pub const CORPUS_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/corpus");

pub fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<_> = fs::read_dir(PathBuf::from(CORPUS_DIR))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "v"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

pub struct MutationScan {
    pub total: usize,
    pub flagged: usize,
    pub missed: Vec<String>,
}

impl MutationScan {
    pub fn rate(&self) -> f64 {
        self.flagged as f64 / self.total as f64
    }
}

/// Delete each token in turn (replacing it by a space); a mutant counts as
/// flagged when it is rejected with a diagnostic within one line of the
/// deletion.
pub fn mutation_scan(files: &[(String, String)]) -> MutationScan {
    let mut scan = MutationScan {
        total: 0,
        flagged: 0,
        missed: Vec::new(),
    };
    for (name, src) in files {
        let (tokens, diags) = tokenize(src);
        assert!(diags.is_empty(), "{}", name);
        for t in tokens.iter().filter(|t| t.kind != Tok::Eof) {
            let start = t.span.byte_offset;
            let end = start + t.span.length;
            let mutant = format!("{} {}", &src[..start], &src[end..]);
            let report = check_syntax(&mutant);
            scan.total += 1;
            let line = t.span.line as i64;
            let near = report.diagnostics.iter().any(|d| (d.span.line as i64 - line).abs() <= 1);
            if !report.ok() && near {
                scan.flagged += 1;
            } else {
                scan.missed.push(format!("{}:{}:{} '{}' ok={}", name, t.span.line, t.span.column, t.text, report.ok()));
            }
        }
    }
    scan
}

fn all_subtrees<'a>(forest: &'a [AstNode], out: &mut Vec<&'a AstNode>) {
    for n in forest {
        n.walk(&mut |s| out.push(s));
    }
}

/// Reference SMR: enumerate subtrees and match by direct structural
/// comparison, each candidate subtree used at most once.
pub fn brute_force_smr(reference: &[AstNode], candidate: &[AstNode], cfg: &SubtreeMatchConfig) -> f64 {
    let (r, c) = if cfg.normalize_identifiers {
        (normalize_identifiers(reference), normalize_identifiers(candidate))
    } else {
        (reference.to_vec(), candidate.to_vec())
    };
    let mut rs = Vec::new();
    let mut cs = Vec::new();
    all_subtrees(&r, &mut rs);
    all_subtrees(&c, &mut cs);
    rs.retain(|n| n.node_count() >= cfg.min_subtree_nodes);
    cs.retain(|n| n.node_count() >= cfg.min_subtree_nodes);
    if rs.is_empty() {
        return if cs.is_empty() { 100.0 } else { 0.0 };
    }
    let mut used = vec![false; cs.len()];
    let mut matched = 0usize;
    for x in &rs {
        if let Some(j) = (0..cs.len()).find(|j| !used[*j] && cs[*j].structurally_eq(x)) {
            used[j] = true;
            matched += 1;
        }
    }
    100.0 * matched as f64 / rs.len() as f64
}

pub fn node_total(f: &[AstNode]) -> usize {
    f.iter().map(AstNode::node_count).sum()
}

/// Small fixtures: corpus files and generated designs of at most 200 nodes.
pub fn small_fixtures() -> Vec<(String, Vec<AstNode>)> {
    let mut out: Vec<(String, Vec<AstNode>)> = corpus()
        .into_iter()
        .map(|(n, s)| (n, parse(&s).unwrap()))
        .filter(|(_, f)| node_total(f) <= 200)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    while out.len() < 30 {
        let f = parse(&random_design(&mut rng, "g")).unwrap();
        if node_total(&f) <= 200 {
            out.push((format!("generated_{}", out.len()), f));
        }
    }
    out
}

pub fn smr_configs() -> [SubtreeMatchConfig; 3] {
    [
        SubtreeMatchConfig::default(),
        SubtreeMatchConfig {
            min_subtree_nodes: 1,
            normalize_identifiers: false,
        },
        SubtreeMatchConfig {
            min_subtree_nodes: 4,
            normalize_identifiers: true,
        },
    ]
}

/// Consistently rename every user identifier, including module names.
pub fn alpha_rename(src: &str, seed: u64) -> String {
    let (tokens, _) = tokenize(src);
    let mut names: Vec<&str> = tokens.iter().filter(|t| t.kind == Tok::Ident).map(|t| t.text.as_str()).collect();
    names.sort();
    names.dedup();
    let mut fresh: Vec<String> = (0..names.len()).map(|i| format!("id_{}_x", i)).collect();
    fresh.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let map: HashMap<&str, &str> = names.iter().copied().zip(fresh.iter().map(String::as_str)).collect();
    let mut out = String::new();
    let mut last = 0;
    for t in tokens.iter().filter(|t| t.kind == Tok::Ident) {
        out.push_str(&src[last..t.span.byte_offset]);
        out.push_str(map[t.text.as_str()]);
        last = t.span.byte_offset + t.span.length;
    }
    out.push_str(&src[last..]);
    out
}

pub const COMBINATIONAL: &str = "module sel (
    input [7:0] a,
    input [7:0] b,
    input s,
    output [7:0] y,
    output p
);
    assign y = s ? a : b;
    assign p = ^y;
endmodule
";

pub const SEQUENTIAL: &str = "module cnt (
    input clk,
    input rst,
    output reg [3:0] q
);
    always @(posedge clk) begin
        if (rst)
            q <= 4'd0;
        else
            q <= q + 4'd1;
    end
endmodule
";
