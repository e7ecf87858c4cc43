// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::verilog::lexer::{is_identifier, is_keyword};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
    Inout,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::In => "input",
            Direction::Out => "output",
            Direction::Inout => "inout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Pos,
    Neg,
}

impl Edge {
    pub fn as_str(self) -> &'static str {
        match self {
            Edge::Pos => "pos",
            Edge::Neg => "neg",
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Edge::Pos => "posedge",
            Edge::Neg => "negedge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    High,
    Low,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::High => "high",
            Polarity::Low => "low",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortSpec {
    pub name: String,
    pub direction: Direction,
    pub width_bits: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockSpec {
    pub name: String,
    pub edge: Edge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResetSpec {
    pub name: String,
    pub active: Polarity,
    pub sync: bool,
}

/// Natural-language design request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    pub module_name: String,
    pub ports: Vec<PortSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock: Option<ClockSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reset: Option<ResetSpec>,
    pub behavior: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pseudocode_hints: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("'{0}' is not a legal Verilog identifier")]
    InvalidIdentifier(String),
    #[error("duplicate port name '{0}'")]
    DuplicatePort(String),
    #[error("port '{0}' has width 0")]
    ZeroWidth(String),
    #[error("{role} '{name}' is not one of the ports")]
    UnknownSignal { role: &'static str, name: String },
    #[error("behavior description is empty")]
    EmptyBehavior,
}

fn check_ident(name: &str) -> Result<(), SpecError> {
    if is_identifier(name) && !is_keyword(name) {
        Ok(())
    } else {
        Err(SpecError::InvalidIdentifier(name.to_string()))
    }
}

impl DesignSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        check_ident(&self.module_name)?;
        let mut seen = HashSet::new();
        for p in &self.ports {
            check_ident(&p.name)?;
            if !seen.insert(p.name.as_str()) {
                return Err(SpecError::DuplicatePort(p.name.clone()));
            }
            if p.width_bits == 0 {
                return Err(SpecError::ZeroWidth(p.name.clone()));
            }
        }
        if let Some(c) = &self.clock {
            if !seen.contains(c.name.as_str()) {
                return Err(SpecError::UnknownSignal {
                    role: "clock",
                    name: c.name.clone(),
                });
            }
        }
        if let Some(r) = &self.reset {
            if !seen.contains(r.name.as_str()) {
                return Err(SpecError::UnknownSignal {
                    role: "reset",
                    name: r.name.clone(),
                });
            }
        }
        if self.behavior.trim().is_empty() {
            return Err(SpecError::EmptyBehavior);
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
