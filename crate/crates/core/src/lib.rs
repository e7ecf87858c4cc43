// SPDX-License-Identifier: Apache-2.0

//! Power and timing forecasting for LLM-generated Verilog.

pub mod features;
pub mod verilog;
pub mod metrics;
pub mod predictor;
pub mod promptgen;
pub mod llm;
pub mod pipeline;
