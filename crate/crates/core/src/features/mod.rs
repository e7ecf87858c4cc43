// SPDX-License-Identifier: Apache-2.0

//! Fixed-schema numeric features extracted from a parsed design.

mod normalize;
mod smr;

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::verilog::ast::{attr, AstNode, NodeKind};
use crate::verilog::fold::{module_params, range_width, ParamEnv};

pub use normalize::normalize_identifiers;
pub use smr::{subtree_digests, subtree_match_rate, SubtreeDigest, SubtreeMatchConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Construct counters, in schema order.
pub const CONSTRUCT_FEATURES: [&str; 27] = [
    "module_count",
    "port_bit_total",
    "reg_bit_total",
    "wire_bit_total",
    "always_block_count",
    "seq_always_count",
    "comb_always_count",
    "continuous_assign_count",
    "blocking_assign_count",
    "nonblocking_assign_count",
    "if_count",
    "case_count",
    "case_item_total",
    "for_loop_count",
    "instance_count",
    "mux_ternary_count",
    "op_add_sub_count",
    "op_mul_count",
    "op_div_mod_count",
    "op_shift_count",
    "op_compare_count",
    "op_bitwise_count",
    "op_reduction_count",
    "op_logical_count",
    "concat_count",
    "max_expr_depth",
    "total_node_count",
];

/// EDA knobs appended after the construct counters.
pub const EDA_FEATURES: [&str; 5] = [
    "clock_period_ns",
    "target_utilization",
    "effort_low",
    "effort_medium",
    "effort_high",
];

pub const FEATURE_COUNT: usize = CONSTRUCT_FEATURES.len() + EDA_FEATURES.len();

pub fn feature_names() -> Vec<&'static str> {
    CONSTRUCT_FEATURES.iter().chain(EDA_FEATURES.iter()).copied().collect()
}

/// Digest of the schema version and the ordered feature names.
pub fn schema_hash() -> String {
    let mut h = Sha256::new();
    h.update(format!("v{}\n", SCHEMA_VERSION));
    for n in feature_names() {
        h.update(n);
        h.update("\n");
    }
    hex::encode(h.finalize())
}

pub fn feature_index(name: &str) -> Option<usize> {
    feature_names().iter().position(|n| *n == name)
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FeatureError {
    #[error("clock_period_ns must be a positive finite number, got {0}")]
    InvalidClock(f64),
    #[error("target_utilization must be in (0, 1], got {0}")]
    InvalidUtilization(f64),
    #[error("unknown effort level '{0}' (expected low, medium or high)")]
    InvalidEffort(String),
    #[error("feature schema version {found} does not match {expected}")]
    SchemaMismatch { expected: u32, found: u32 },
    #[error("feature '{0}' is missing")]
    MissingFeature(String),
    #[error("feature '{name}' has invalid value {value}")]
    InvalidValue { name: String, value: f64 },
    #[error("feature vector has {found} values, expected {expected}")]
    WrongLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effort {
    Low,
    #[default]
    Medium,
    High,
}

impl std::str::FromStr for Effort {
    type Err = FeatureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Effort::Low),
            "medium" => Ok(Effort::Medium),
            "high" => Ok(Effort::High),
            _ => Err(FeatureError::InvalidEffort(s.to_string())),
        }
    }
}

impl fmt::Display for Effort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Effort::Low => "low",
            Effort::Medium => "medium",
            Effort::High => "high",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdaParams {
    pub clock_period_ns: f64,
    pub target_utilization: f64,
    pub effort_level: Effort,
}

pub const DEFAULT_TARGET_UTILIZATION: f64 = 0.7;

impl EdaParams {
    pub fn new(clock_period_ns: f64, target_utilization: f64, effort_level: Effort) -> Result<Self, FeatureError> {
        let p = EdaParams {
            clock_period_ns,
            target_utilization,
            effort_level,
        };
        p.validate()?;
        Ok(p)
    }

    /// Clock only; other knobs take their defaults.
    pub fn with_clock(clock_period_ns: f64) -> Result<Self, FeatureError> {
        Self::new(clock_period_ns, DEFAULT_TARGET_UTILIZATION, Effort::Medium)
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(self.clock_period_ns.is_finite() && self.clock_period_ns > 0.0) {
            return Err(FeatureError::InvalidClock(self.clock_period_ns));
        }
        if !(self.target_utilization > 0.0 && self.target_utilization <= 1.0) {
            return Err(FeatureError::InvalidUtilization(self.target_utilization));
        }
        Ok(())
    }

    fn encode(&self) -> [f64; 5] {
        [
            self.clock_period_ns,
            self.target_utilization,
            (self.effort_level == Effort::Low) as u8 as f64,
            (self.effort_level == Effort::Medium) as u8 as f64,
            (self.effort_level == Effort::High) as u8 as f64,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub schema_version: u32,
    /// One value per [`feature_names`] entry.
    pub values: Vec<f64>,
    /// Declaration ranges that could not be constant-folded (counted as width 1).
    pub unfolded_widths: u32,
}

impl FeatureVector {
    pub fn from_values(values: Vec<f64>) -> Result<Self, FeatureError> {
        if values.len() != FEATURE_COUNT {
            return Err(FeatureError::WrongLength {
                expected: FEATURE_COUNT,
                found: values.len(),
            });
        }
        for (name, v) in feature_names().iter().zip(&values) {
            if !v.is_finite() || *v < 0.0 {
                return Err(FeatureError::InvalidValue {
                    name: name.to_string(),
                    value: *v,
                });
            }
        }
        Ok(FeatureVector {
            schema_version: SCHEMA_VERSION,
            values,
            unfolded_widths: 0,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).and_then(|i| self.values.get(i).copied())
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        feature_names().into_iter().zip(self.values.iter().copied())
    }

    /// Header line plus one data row; the first column is `schema_version`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["schema_version"];
        header.extend(feature_names());
        // Writing into a Vec cannot fail.
        w.write_record(&header).expect("in-memory csv");
        let mut row = vec![self.schema_version.to_string()];
        row.extend(self.values.iter().map(|v| format_value(*v)));
        w.write_record(&row).expect("in-memory csv");
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("feature vector serializes")
    }
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{}", v)
    }
}

impl Serialize for FeatureVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.values.len() + 1))?;
        m.serialize_entry("schema_version", &self.schema_version)?;
        for (name, v) in self.named() {
            m.serialize_entry(name, &v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for FeatureVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(d)?;
        let version = map
            .get("schema_version")
            .copied()
            .ok_or_else(|| D::Error::missing_field("schema_version"))?;
        if version != SCHEMA_VERSION as f64 {
            return Err(D::Error::custom(FeatureError::SchemaMismatch {
                expected: SCHEMA_VERSION,
                found: version as u32,
            }));
        }
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for name in feature_names() {
            match map.get(name) {
                Some(v) => values.push(*v),
                None => return Err(D::Error::custom(FeatureError::MissingFeature(name.to_string()))),
            }
        }
        FeatureVector::from_values(values).map_err(D::Error::custom)
    }
}

#[derive(Default)]
struct Counts {
    c: [f64; 27],
    unfolded: u32,
}

impl Counts {
    fn bump(&mut self, name: &str, by: f64) {
        let i = CONSTRUCT_FEATURES
            .iter()
            .position(|n| *n == name)
            .expect("known counter");
        self.c[i] += by;
    }
}

/// Count constructs of a parsed forest and append the EDA knobs.
pub fn extract_features(forest: &[AstNode], eda: &EdaParams) -> FeatureVector {
    let mut k = Counts::default();
    for m in forest {
        k.bump("module_count", 1.0);
        let env = module_params(m);
        for c in &m.children {
            visit(c, &env, &mut k, false);
        }
        k.bump("total_node_count", m.node_count() as f64);
        let depth = forest_expr_depth(m);
        let i = CONSTRUCT_FEATURES.iter().position(|n| *n == "max_expr_depth").expect("known");
        k.c[i] = k.c[i].max(depth as f64);
    }
    let mut values: Vec<f64> = k.c.to_vec();
    values.extend(eda.encode());
    debug_assert!(values.iter().all(|v| v.is_finite() && *v >= 0.0));
    FeatureVector {
        schema_version: SCHEMA_VERSION,
        values,
        unfolded_widths: k.unfolded,
    }
}

fn bits(n: &AstNode, env: &ParamEnv, k: &mut Counts) -> f64 {
    let (w, ok) = range_width(n.attr(attr::MSB), n.attr(attr::LSB), env);
    let (depth, ok2) = if n.attr(attr::ARRAY_MSB).is_some() {
        range_width(n.attr(attr::ARRAY_MSB), n.attr(attr::ARRAY_LSB), env)
    } else {
        (1, true)
    };
    k.unfolded += (!ok) as u32 + (!ok2) as u32;
    (w * depth) as f64
}

fn visit(n: &AstNode, env: &ParamEnv, k: &mut Counts, in_function: bool) {
    match n.kind {
        NodeKind::PortDecl if !in_function => {
            let b = bits(n, env, k);
            k.bump("port_bit_total", b);
            if n.attr(attr::NET) == Some("reg") {
                k.bump("reg_bit_total", b);
            }
        }
        NodeKind::RegDecl if !in_function && n.attr(attr::TYPE) == Some("reg") => {
            let b = bits(n, env, k);
            k.bump("reg_bit_total", b);
        }
        NodeKind::NetDecl if !in_function => {
            let b = bits(n, env, k);
            k.bump("wire_bit_total", b);
        }
        NodeKind::AlwaysBlock => {
            k.bump("always_block_count", 1.0);
            let sequential = n.children[0].children.iter().any(|ev| ev.attr(attr::EDGE).is_some());
            k.bump(if sequential { "seq_always_count" } else { "comb_always_count" }, 1.0);
        }
        NodeKind::ContinuousAssign => k.bump("continuous_assign_count", 1.0),
        NodeKind::BlockingAssign => k.bump("blocking_assign_count", 1.0),
        NodeKind::NonBlockingAssign => k.bump("nonblocking_assign_count", 1.0),
        NodeKind::IfStmt => k.bump("if_count", 1.0),
        NodeKind::CaseStmt => k.bump("case_count", 1.0),
        NodeKind::CaseItem => k.bump("case_item_total", 1.0),
        NodeKind::ForLoop => k.bump("for_loop_count", 1.0),
        NodeKind::Instance => k.bump("instance_count", 1.0),
        NodeKind::TernaryOp => k.bump("mux_ternary_count", 1.0),
        NodeKind::Concat | NodeKind::Replication => k.bump("concat_count", 1.0),
        NodeKind::BinaryOp | NodeKind::UnaryOp => {
            if let Some(class) = operator_class(n) {
                k.bump(class, 1.0);
            }
        }
        _ => {}
    }
    let inner = in_function || n.kind == NodeKind::FunctionDecl;
    for c in &n.children {
        visit(c, env, k, inner);
    }
}

/// Cost class counter fed by an operator node.
pub fn operator_class(n: &AstNode) -> Option<&'static str> {
    let op = n.attr(attr::OP)?;
    let unary = n.kind == NodeKind::UnaryOp;
    Some(match op {
        "+" | "-" => "op_add_sub_count",
        "*" | "**" => "op_mul_count",
        "/" | "%" => "op_div_mod_count",
        "<<" | ">>" | "<<<" | ">>>" => "op_shift_count",
        "<" | "<=" | ">" | ">=" | "==" | "!=" | "===" | "!==" => "op_compare_count",
        "~" => "op_bitwise_count",
        "&" | "|" | "^" | "~^" | "^~" if !unary => "op_bitwise_count",
        "&" | "|" | "^" | "~^" | "^~" | "~&" | "~|" => "op_reduction_count",
        "&&" | "||" | "!" => "op_logical_count",
        _ => return None,
    })
}

/// Deepest expression tree; a lone identifier or literal has depth 1.
fn forest_expr_depth(n: &AstNode) -> usize {
    if n.kind.is_expression() {
        expr_depth(n)
    } else {
        n.children.iter().map(forest_expr_depth).max().unwrap_or(0)
    }
}

fn expr_depth(n: &AstNode) -> usize {
    1 + n.children.iter().map(expr_depth).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verilog::parse;

    fn fv(src: &str) -> FeatureVector {
        extract_features(&parse(src).unwrap(), &EdaParams::with_clock(1.0).unwrap())
    }

    #[test]
    fn empty_module() {
        let v = fv("module m; endmodule");
        assert_eq!(v.get("module_count"), Some(1.0));
        assert_eq!(v.get("total_node_count"), Some(1.0));
        for name in CONSTRUCT_FEATURES {
            if name != "module_count" && name != "total_node_count" {
                assert_eq!(v.get(name), Some(0.0), "{}", name);
            }
        }
        assert_eq!(v.get("clock_period_ns"), Some(1.0));
        assert_eq!(v.get("target_utilization"), Some(0.7));
        assert_eq!(v.get("effort_medium"), Some(1.0));
        assert_eq!(v.values.len(), FEATURE_COUNT);
    }

    #[test]
    fn always_blocks_split_by_edge() {
        let src = "module m(input clk, input [1:0] d, output reg [1:0] q, output reg [1:0] r, output reg s);\n\
                   always @(posedge clk) begin q <= d; r <= q; s <= ^d; end\n\
                   always @(*) begin end\nendmodule";
        let v = fv(src);
        assert_eq!(v.get("always_block_count"), Some(2.0));
        assert_eq!(v.get("seq_always_count"), Some(1.0));
        assert_eq!(v.get("comb_always_count"), Some(1.0));
        assert_eq!(v.get("nonblocking_assign_count"), Some(3.0));
        assert_eq!(v.get("op_reduction_count"), Some(1.0));
    }

    #[test]
    fn reg_array_bits() {
        let v = fv("module m; reg [7:0] r [0:3]; endmodule");
        assert_eq!(v.get("reg_bit_total"), Some(32.0));
        let v = fv("module m #(parameter W = 8, D = 4) (); reg [W-1:0] r [0:D-1]; wire [2*W-1:0] w; endmodule");
        assert_eq!(v.get("reg_bit_total"), Some(32.0));
        assert_eq!(v.get("wire_bit_total"), Some(16.0));
        assert_eq!(v.unfolded_widths, 0);
        let v = fv("module m; wire [N:0] w; endmodule");
        assert_eq!(v.get("wire_bit_total"), Some(1.0));
        assert_eq!(v.unfolded_widths, 1);
    }

    #[test]
    fn operator_classes_and_depth() {
        let v = fv("module m(input [7:0] a, b, output [7:0] y); assign y = (a * b) + (a >> 1) - (a & ~b); endmodule");
        assert_eq!(v.get("op_mul_count"), Some(1.0));
        assert_eq!(v.get("op_add_sub_count"), Some(2.0));
        assert_eq!(v.get("op_shift_count"), Some(1.0));
        assert_eq!(v.get("op_bitwise_count"), Some(2.0));
        // `-` -> `&` -> `~` -> b
        assert_eq!(v.get("max_expr_depth"), Some(4.0));
        assert_eq!(v.get("port_bit_total"), Some(24.0));
    }

    #[test]
    fn serialization_round_trips() {
        let v = fv("module m(input a, output b); assign b = a ? 1'b0 : 1'b1; endmodule");
        let json = serde_json::to_string(&v).unwrap();
        let back: FeatureVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back.values, v.values);
        let csv = v.to_csv();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("schema_version,module_count,"));
        assert!(lines.next().unwrap().starts_with("1,1,"));
    }

    #[test]
    fn eda_validation() {
        assert!(EdaParams::with_clock(0.0).is_err());
        assert!(EdaParams::new(1.0, 1.5, Effort::Low).is_err());
        assert!(EdaParams::new(1.0, 1.0, Effort::High).is_ok());
        assert_eq!("HIGH".parse::<Effort>(), Ok(Effort::High));
    }
}
