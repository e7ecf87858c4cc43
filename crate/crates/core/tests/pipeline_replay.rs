// SPDX-License-Identifier: Apache-2.0

use rtlcast::features::{EdaParams, FeatureVector, FEATURE_COUNT, SCHEMA_VERSION};
use rtlcast::llm::{LlmBackend, ReplayBackend, ReplayScript};
use rtlcast::pipeline::{
    batch_forecast, forecast, generate_with_ipref, no_code_report, read_session_log, ForecastError, ForecastInput,
    GenerationConfig, Outcome, PromptKind, SessionLog, NO_CODE_MESSAGE,
};
use rtlcast::predictor::{train, Dataset, Row, TrainConfig, TrainedModel};
use rtlcast::promptgen::{build_feedback, build_repic, DesignSpec, Templates};
use rtlcast::verilog::check_syntax;

const GOOD: &str = "module counter (\n    input clk,\n    input rst,\n    output reg [3:0] q\n);\n    always @(posedge clk) begin\n        if (rst) q <= 4'd0;\n        else q <= q + 4'd1;\n    end\nendmodule\n";
const BROKEN: &str = "module counter (\n    input clk,\n    input rst,\n    output reg [3:0] q\n);\n    always @(posedge clk) begin\n        if (rst) q <= 4'd0\n        else q <= q + 4'd1;\n    end\nendmodule\n";

fn fenced(code: &str) -> String {
    format!("Pseudocode:\n```text\nq increments every cycle\n```\n\n```verilog\n{}```\n", code)
}

fn spec() -> DesignSpec {
    serde_json::from_str(
        r#"{"module_name": "counter",
            "ports": [{"name": "clk", "direction": "in", "width_bits": 1},
                      {"name": "rst", "direction": "in", "width_bits": 1},
                      {"name": "q", "direction": "out", "width_bits": 4}],
            "clock": {"name": "clk", "edge": "pos"},
            "reset": {"name": "rst", "active": "high", "sync": true},
            "behavior": "4-bit up counter with synchronous reset."}"#,
    )
    .unwrap()
}

fn cfg() -> GenerationConfig {
    GenerationConfig {
        record_timing: false,
        ..GenerationConfig::default()
    }
}

fn replay(texts: &[String]) -> ReplayBackend {
    ReplayBackend::new(ReplayScript::from_texts(texts.iter().cloned()))
}

fn constant_model(power: f64, tns: f64) -> TrainedModel {
    let rows = (0..8)
        .map(|i| {
            let mut v = vec![0.0; FEATURE_COUNT];
            v[0] = i as f64;
            Row {
                design: None,
                features: FeatureVector::from_values(v).unwrap(),
                power_uw: power,
                tns_ns: tns,
            }
        })
        .collect();
    let d = Dataset {
        schema_version: SCHEMA_VERSION,
        rows,
    };
    train(
        &d,
        &TrainConfig {
            n_trees: 5,
            ..TrainConfig::default()
        },
    )
    .unwrap()
}

#[test]
fn first_response_valid() {
    let mut b = replay(&[fenced(GOOD)]);
    let s = generate_with_ipref(&spec(), &mut b, &cfg(), &Templates::default(), None).unwrap();
    assert_eq!(s.attempts.len(), 1);
    assert_eq!(s.outcome, Outcome::SyntaxOk);
    assert_eq!(s.final_code.as_deref(), Some(GOOD));
    assert_eq!(s.attempts[0].prompt_kind, PromptKind::Repic);
}

#[test]
fn broken_then_fixed() {
    let mut b = replay(&[fenced(BROKEN), fenced(GOOD)]);
    let s = generate_with_ipref(&spec(), &mut b, &cfg(), &Templates::default(), None).unwrap();
    assert_eq!(s.attempts.len(), 2);
    assert_eq!(s.outcome, Outcome::SyntaxOk);
    let report = s.attempts[0].syntax_report.as_ref().unwrap();
    assert!(!report.ok());
    let fb = &s.attempts[1];
    assert_eq!(fb.prompt_kind, PromptKind::Feedback);
    for d in &report.diagnostics {
        assert!(fb.prompt_text.contains(&d.message));
        assert!(fb.prompt_text.contains(&d.offending_line_text));
    }
    assert_eq!(b.cursor(), 2);
}

#[test]
fn ten_broken_responses_exhaust() {
    let texts: Vec<String> = (0..12).map(|_| fenced(BROKEN)).collect();
    let mut b = replay(&texts);
    let s = generate_with_ipref(&spec(), &mut b, &cfg(), &Templates::default(), None).unwrap();
    assert_eq!(s.max_iterations, 10);
    assert_eq!(s.attempts.len(), 10);
    assert_eq!(s.outcome, Outcome::MaxIterationsExhausted);
    assert_eq!(s.final_code.as_deref(), Some(BROKEN));
    assert_eq!(b.cursor(), 10);
    let idx: Vec<u32> = s.attempts.iter().map(|a| a.index).collect();
    assert_eq!(idx, (0..10).collect::<Vec<_>>());
}

#[test]
fn missing_code_counts_as_an_attempt() {
    let mut b = replay(&["I would rather describe it in words.".to_string(), fenced(GOOD)]);
    let s = generate_with_ipref(&spec(), &mut b, &cfg(), &Templates::default(), None).unwrap();
    assert_eq!(s.attempts.len(), 2);
    assert_eq!(s.attempts[0].extracted_code, None);
    assert!(s.attempts[1].prompt_text.contains(NO_CODE_MESSAGE));
    assert_eq!(s.outcome, Outcome::SyntaxOk);

    let mut b = replay(&["no".to_string(), "still no".to_string()]);
    let c = GenerationConfig {
        max_iterations: 2,
        ..cfg()
    };
    let s = generate_with_ipref(&spec(), &mut b, &c, &Templates::default(), None).unwrap();
    assert_eq!(s.outcome, Outcome::NoCodeExtracted);
    assert_eq!(s.final_code, None);
}

#[test]
fn backend_failure_keeps_partial_session() {
    let mut b = replay(&[fenced(BROKEN)]);
    let s = generate_with_ipref(&spec(), &mut b, &cfg(), &Templates::default(), None).unwrap();
    assert_eq!(s.outcome, Outcome::BackendFailed);
    assert_eq!(s.attempts.len(), 1);
    assert!(s.backend_error.unwrap().contains("exhausted"));
}

#[test]
fn prompts_are_reproducible_from_the_session() {
    let texts = vec![fenced(BROKEN), "prose only".to_string(), fenced(BROKEN), fenced(GOOD)];
    let t = Templates::default();
    let s = generate_with_ipref(&spec(), &mut replay(&texts), &cfg(), &t, None).unwrap();
    assert_eq!(s.attempts[0].prompt_text, build_repic(&spec(), &t).unwrap().rendered_text);
    for w in s.attempts.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        let expected = match &prev.extracted_code {
            Some(code) => build_feedback(code, &check_syntax(code), next.index, &t).unwrap(),
            None => build_feedback(&prev.response_text, &no_code_report(&prev.response_text), next.index, &t).unwrap(),
        };
        assert_eq!(next.prompt_text, expected.rendered_text);
    }
    let again = generate_with_ipref(&spec(), &mut replay(&texts), &cfg(), &t, None).unwrap();
    assert_eq!(serde_json::to_string(&s).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn session_log_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.jsonl");
    let mut log = SessionLog::append(&path).unwrap();
    let s = generate_with_ipref(
        &spec(),
        &mut replay(&[fenced(BROKEN), fenced(GOOD)]),
        &cfg(),
        &Templates::default(),
        Some(&mut log),
    )
    .unwrap();
    drop(log);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(read_session_log(&path).unwrap(), vec![s]);
}

#[test]
fn direct_code_with_constant_model() {
    let m = constant_model(100.0, 0.25);
    let eda = EdaParams::with_clock(5.0).unwrap();
    let r = forecast(&ForecastInput::Code(GOOD.into()), &m, &eda, None, &cfg(), &Templates::default(), None).unwrap();
    assert!((r.forecast.power_uw - 100.0).abs() < 1e-6);
    assert!((r.forecast.tns_ns - 0.25).abs() < 1e-9);
    assert_eq!(r.session.attempts.len(), 1);

    let e = forecast(&ForecastInput::Code(BROKEN.into()), &m, &eda, None, &cfg(), &Templates::default(), None).unwrap_err();
    assert!(matches!(e, ForecastError::Refused { .. }));
    let e = forecast(&ForecastInput::Spec(spec()), &m, &eda, None, &cfg(), &Templates::default(), None).unwrap_err();
    assert!(matches!(e, ForecastError::MissingBackend));
}

#[test]
fn spec_forecast_and_refusal() {
    let m = constant_model(42.0, 0.1);
    let eda = EdaParams::with_clock(2.0).unwrap();
    let mut b = replay(&[fenced(BROKEN), fenced(GOOD)]);
    let r = forecast(
        &ForecastInput::Spec(spec()),
        &m,
        &eda,
        Some(&mut b as &mut dyn LlmBackend),
        &cfg(),
        &Templates::default(),
        None,
    )
    .unwrap();
    assert_eq!(r.session.attempts.len(), 2);
    assert_eq!(r.features.get("clock_period_ns"), Some(2.0));

    let texts: Vec<String> = (0..10).map(|_| fenced(BROKEN)).collect();
    let mut b = replay(&texts);
    let e = forecast(
        &ForecastInput::Spec(spec()),
        &m,
        &eda,
        Some(&mut b as &mut dyn LlmBackend),
        &cfg(),
        &Templates::default(),
        None,
    )
    .unwrap_err();
    assert_eq!(e.session().unwrap().outcome, Outcome::MaxIterationsExhausted);
}

#[test]
fn batch_keeps_order_and_counts_syntax_rate() {
    let m = constant_model(10.0, 0.0);
    let eda = EdaParams::with_clock(1.0).unwrap();
    let scripts: Vec<Vec<String>> = vec![
        vec![fenced(GOOD)],
        (0..10).map(|_| fenced(BROKEN)).collect(),
        vec![fenced(BROKEN), fenced(GOOD)],
    ];
    let specs = vec![spec(), spec(), spec()];
    for concurrency in [1, 3] {
        let r = batch_forecast(
            &specs,
            &m,
            &eda,
            |i| Box::new(replay(&scripts[i])),
            &cfg(),
            &Templates::default(),
            concurrency,
        )
        .unwrap();
        assert!((r.syntax_rate - 2.0 / 3.0).abs() < 1e-12);
        assert!(r.results[0].is_ok());
        assert!(r.results[1].is_err());
        assert_eq!(r.results[2].as_ref().unwrap().session.attempts.len(), 2);
    }
    assert!(batch_forecast(&[], &m, &eda, |i| Box::new(replay(&scripts[i])), &cfg(), &Templates::default(), 1).is_err());
}
