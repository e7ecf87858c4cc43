// SPDX-License-Identifier: Apache-2.0

//! Integer constant folding for declaration widths.

use std::collections::HashMap;

use super::ast::{attr, AstNode, NodeKind};
use super::parser::parse_expression;

pub type ParamEnv = HashMap<String, i64>;

/// Value of an integer literal; `None` for x/z digits or overflow.
pub fn int_literal_value(text: &str) -> Option<i64> {
    let t: String = text.chars().filter(|c| *c != '_' && !c.is_whitespace()).collect();
    let Some(q) = t.find('\'') else {
        return t.parse::<i64>().ok();
    };
    let rest = t[q + 1..].trim_start_matches(['s', 'S']);
    let mut chars = rest.chars();
    let radix = match chars.next()?.to_ascii_lowercase() {
        'b' => 2,
        'o' => 8,
        'd' => 10,
        'h' => 16,
        _ => return None,
    };
    i64::from_str_radix(chars.as_str(), radix).ok()
}

/// Evaluate an expression made of literals, known parameters,
/// `+ - * / % ** << >>`, unary `+ -`, `?:` and `$clog2`.
pub fn eval_const(e: &AstNode, env: &ParamEnv) -> Option<i64> {
    match e.kind {
        NodeKind::IntLiteral => int_literal_value(e.attr(attr::VALUE)?),
        NodeKind::Identifier => env.get(e.name()?).copied(),
        NodeKind::UnaryOp => {
            let v = eval_const(&e.children[0], env)?;
            match e.attr(attr::OP)? {
                "-" => v.checked_neg(),
                "+" => Some(v),
                "!" => Some((v == 0) as i64),
                _ => None,
            }
        }
        NodeKind::BinaryOp => {
            let a = eval_const(&e.children[0], env)?;
            let b = eval_const(&e.children[1], env)?;
            match e.attr(attr::OP)? {
                "+" => a.checked_add(b),
                "-" => a.checked_sub(b),
                "*" => a.checked_mul(b),
                "/" => a.checked_div(b),
                "%" => a.checked_rem(b),
                "**" => u32::try_from(b).ok().and_then(|b| a.checked_pow(b)),
                "<<" | "<<<" => u32::try_from(b).ok().and_then(|b| a.checked_shl(b)),
                ">>" | ">>>" => u32::try_from(b).ok().and_then(|b| a.checked_shr(b)),
                "==" => Some((a == b) as i64),
                "!=" => Some((a != b) as i64),
                "<" => Some((a < b) as i64),
                "<=" => Some((a <= b) as i64),
                ">" => Some((a > b) as i64),
                ">=" => Some((a >= b) as i64),
                _ => None,
            }
        }
        NodeKind::TernaryOp => {
            if eval_const(&e.children[0], env)? != 0 {
                eval_const(&e.children[1], env)
            } else {
                eval_const(&e.children[2], env)
            }
        }
        NodeKind::Call if e.name() == Some("$clog2") && e.children.len() == 1 => {
            let v = eval_const(&e.children[0], env)?;
            Some(clog2(v))
        }
        _ => None,
    }
}

/// Ceiling log2 with `clog2(0) == clog2(1) == 0`.
pub fn clog2(v: i64) -> i64 {
    if v <= 1 {
        0
    } else {
        64 - (v - 1).leading_zeros() as i64
    }
}

/// Evaluate canonical expression text (as stored in width attributes).
pub fn eval_const_text(text: &str, env: &ParamEnv) -> Option<i64> {
    parse_expression(text).ok().and_then(|e| eval_const(&e, env))
}

/// Parameter values of one module, folded in declaration order.
pub fn module_params(module: &AstNode) -> ParamEnv {
    let mut env = ParamEnv::new();
    for c in &module.children {
        if c.kind == NodeKind::ParamDecl {
            if let (Some(name), Some(v)) = (c.name(), c.children.first().and_then(|e| eval_const(e, &env))) {
                env.insert(name.to_string(), v);
            }
        }
    }
    env
}

/// Width of `[msb:lsb]`. Returns `(width, folded)`; unfoldable ranges count as width 1.
pub fn range_width(msb: Option<&str>, lsb: Option<&str>, env: &ParamEnv) -> (u64, bool) {
    match (msb, lsb) {
        (None, None) => (1, true),
        (Some(m), Some(l)) => match (eval_const_text(m, env), eval_const_text(l, env)) {
            (Some(m), Some(l)) => ((m - l).unsigned_abs() + 1, true),
            _ => (1, false),
        },
        _ => (1, false),
    }
}
