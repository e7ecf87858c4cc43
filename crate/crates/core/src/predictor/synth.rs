// SPDX-License-Identifier: Apache-2.0

//! Synthetic training data: random synthesizable modules whose features are
//! extracted through the real parser, with targets linear in a few features.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Row};
use crate::features::{extract_features, EdaParams, Effort, FeatureVector, SCHEMA_VERSION};
use crate::verilog::parse;

const WIDTHS: [u32; 4] = [4, 8, 16, 32];
const BINOPS: [&str; 8] = ["+", "-", "*", "&", "|", "^", "<<", ">>"];

/// Linear target `intercept + Σ weight · feature`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTarget {
    pub intercept: f64,
    pub terms: Vec<(String, f64)>,
}

impl LinearTarget {
    pub fn eval(&self, fv: &FeatureVector) -> f64 {
        self.intercept
            + self
                .terms
                .iter()
                .map(|(name, w)| w * fv.get(name).unwrap_or_else(|| panic!("unknown feature '{}'", name)))
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub rows: usize,
    pub seed: u64,
    /// Standard deviation of the multiplicative noise, as a fraction.
    pub noise: f64,
    pub power: LinearTarget,
    pub tns: LinearTarget,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            rows: 500,
            seed: 0,
            noise: 0.01,
            power: LinearTarget {
                intercept: 50.0,
                terms: vec![
                    ("reg_bit_total".into(), 5.0),
                    ("op_mul_count".into(), 300.0),
                    ("op_add_sub_count".into(), 20.0),
                ],
            },
            tns: LinearTarget {
                intercept: 0.0,
                terms: vec![
                    ("max_expr_depth".into(), 0.04),
                    ("op_mul_count".into(), 0.15),
                    ("reg_bit_total".into(), 0.001),
                ],
            },
        }
    }
}

/// One random module. Every output parses under the supported subset.
pub fn random_design(rng: &mut impl Rng, name: &str) -> String {
    let n_in = rng.gen_range(1..=4);
    let n_reg = rng.gen_range(1..=5);
    let n_wire = rng.gen_range(0..=3);
    let mut src = String::new();
    let mut ports = vec!["    input clk".to_string(), "    input rst".to_string()];
    let mut operands: Vec<String> = Vec::new();
    for i in 0..n_in {
        let w = *WIDTHS.choose(rng).unwrap();
        ports.push(format!("    input [{}:0] in{}", w - 1, i));
        operands.push(format!("in{}", i));
    }
    let out_w = *WIDTHS.choose(rng).unwrap();
    ports.push(format!("    output [{}:0] out", out_w - 1));
    src.push_str(&format!("module {} (\n{}\n);\n", name, ports.join(",\n")));
    let mut regs = Vec::new();
    for i in 0..n_reg {
        let w = *WIDTHS.choose(rng).unwrap();
        src.push_str(&format!("    reg [{}:0] r{};\n", w - 1, i));
        regs.push(format!("r{}", i));
    }
    operands.extend(regs.iter().cloned());
    for i in 0..n_wire {
        let w = *WIDTHS.choose(rng).unwrap();
        src.push_str(&format!("    wire [{}:0] w{};\n", w - 1, i));
        let depth = rng.gen_range(1..=3);
        let e = random_expr(rng, &operands, depth);
        src.push_str(&format!("    assign w{} = {};\n", i, e));
        operands.push(format!("w{}", i));
    }
    src.push_str("    always @(posedge clk) begin\n");
    src.push_str("        if (rst) begin\n");
    for r in &regs {
        src.push_str(&format!("            {} <= 0;\n", r));
    }
    src.push_str("        end else begin\n");
    for r in &regs {
        let depth = rng.gen_range(1..=4);
        src.push_str(&format!("            {} <= {};\n", r, random_expr(rng, &operands, depth)));
    }
    src.push_str("        end\n    end\n");
    if rng.gen_bool(0.3) {
        let sel = regs.choose(rng).unwrap();
        src.push_str("    reg [7:0] dec;\n    always @(*) begin\n");
        src.push_str(&format!("        case ({}[1:0])\n", sel));
        for k in 0..4 {
            src.push_str(&format!("            2'd{}: dec = 8'd{};\n", k, rng.gen_range(0..256)));
        }
        src.push_str("            default: dec = 8'd0;\n        endcase\n    end\n");
        operands.push("dec".into());
    }
    src.push_str(&format!("    assign out = {};\n", random_expr(rng, &operands, 2)));
    src.push_str("endmodule\n");
    src
}

fn random_expr(rng: &mut impl Rng, operands: &[String], depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return operands.choose(rng).unwrap().clone();
    }
    if rng.gen_bool(0.1) {
        let c = random_expr(rng, operands, depth - 1);
        let a = random_expr(rng, operands, depth - 1);
        let b = random_expr(rng, operands, depth - 1);
        return format!("({} ? {} : {})", c, a, b);
    }
    let op = *BINOPS.choose(rng).unwrap();
    let l = random_expr(rng, operands, depth - 1);
    let r = if op == "<<" || op == ">>" {
        rng.gen_range(1..8).to_string()
    } else {
        random_expr(rng, operands, depth - 1)
    };
    format!("({} {} {})", l, op, r)
}

/// Deterministic synthetic dataset from `cfg`.
pub fn synthetic_dataset(cfg: &SynthConfig) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise).expect("noise must be finite and non-negative");
    let efforts = [Effort::Low, Effort::Medium, Effort::High];
    let mut rows = Vec::with_capacity(cfg.rows);
    for i in 0..cfg.rows {
        let name = format!("synth_{}", i);
        let src = random_design(&mut rng, &name);
        let forest = parse(&src).unwrap_or_else(|r| panic!("generated design does not parse:\n{}\n{}", r.render(&name), src));
        let eda = EdaParams::new(
            rng.gen_range(1..=20) as f64 * 0.5,
            rng.gen_range(5..=9) as f64 / 10.0,
            *efforts.choose(&mut rng).unwrap(),
        )
        .expect("generated EDA params are valid");
        let features = extract_features(&forest, &eda);
        let power = cfg.power.eval(&features) * (1.0 + noise.sample(&mut rng));
        let tns = cfg.tns.eval(&features) * (1.0 + noise.sample(&mut rng));
        rows.push(Row {
            design: Some(name),
            features,
            power_uw: power.max(0.0),
            tns_ns: tns.abs(),
        });
    }
    Dataset {
        schema_version: SCHEMA_VERSION,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn designs_parse_and_vary() {
        let d = synthetic_dataset(&SynthConfig {
            rows: 40,
            ..SynthConfig::default()
        });
        assert_eq!(d.rows.len(), 40);
        let muls: Vec<f64> = d.rows.iter().map(|r| r.features.get("op_mul_count").unwrap()).collect();
        assert!(muls.contains(&0.0) && muls.iter().any(|m| *m > 0.0));
        assert!(d.rows.iter().all(|r| r.power_uw > 0.0 && r.tns_ns >= 0.0));
    }

    #[test]
    fn same_seed_same_data() {
        let cfg = SynthConfig {
            rows: 10,
            ..SynthConfig::default()
        };
        assert_eq!(synthetic_dataset(&cfg), synthetic_dataset(&cfg));
    }
}
