// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::anyhow;
use serde_json::{json, Map, Value};

use rtlcast::features::{extract_features, subtree_match_rate, EdaParams, Effort, SubtreeMatchConfig, DEFAULT_TARGET_UTILIZATION};
use rtlcast::llm::{HttpBackend, LlmBackend, ReplayBackend, ReplayScript, RetryPolicy};
use rtlcast::metrics::{conditional_report, report, EvalSet};
use rtlcast::pipeline::{
    batch_forecast, direct_session, forecast_session, generate_with_ipref, ForecastError, ForecastResult,
    GenerationConfig, GenerationSession, Outcome, SessionLog, DEFAULT_MAX_ITERATIONS,
};
use rtlcast::predictor::synth::{synthetic_dataset, SynthConfig};
use rtlcast::predictor::{load_dataset_csv, load_model, save_model, train, write_dataset_csv, TrainConfig, TrainedModel};
use rtlcast::promptgen::{DesignSpec, Templates};
use rtlcast::verilog::{check_syntax, parse, SyntaxReport};

use crate::config::{pick, BackendSection, CliConfig};
use crate::output::{backend, csv_table, domain, usage, Failure, Output};
use crate::{Command, EdaArgs, GenArgs};

type Result<T> = std::result::Result<T, Failure>;

pub fn run(cmd: Command, cfg: &CliConfig) -> Result<Output> {
    match cmd {
        Command::Generate { spec, gen, out_dir } => generate(&spec, &gen, out_dir, cfg),
        Command::Check { file } => check(&file),
        Command::Features { file, eda } => features(&file, &eda, cfg),
        Command::Train {
            data,
            output,
            trees,
            depth,
            learning_rate,
            min_leaf_rows,
            seed,
            no_timestamp,
        } => {
            let d = TrainConfig::default();
            let tc = TrainConfig {
                n_trees: trees.unwrap_or(d.n_trees),
                max_depth: depth.unwrap_or(d.max_depth),
                learning_rate: learning_rate.unwrap_or(d.learning_rate),
                min_leaf_rows: min_leaf_rows.unwrap_or(d.min_leaf_rows),
                seed: seed.unwrap_or(d.seed),
                ..d
            };
            train_cmd(&data, &output, &tc, !no_timestamp)
        }
        Command::Forecast {
            inputs,
            model,
            eda,
            gen,
            batch,
            concurrency,
        } => forecast_cmd(&inputs, model, &eda, &gen, batch, concurrency, cfg),
        Command::Eval {
            predictions,
            truth,
            conditional,
            residuals,
        } => eval(&predictions, &truth, conditional, residuals.as_deref()),
        Command::MatchRate {
            reference,
            candidate,
            min_nodes,
            no_normalize,
        } => match_rate(&reference, &candidate, min_nodes, !no_normalize),
        Command::SynthData {
            output,
            rows,
            seed,
            noise,
        } => synth(&output, rows, seed, noise),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(anyhow!("{}: {}", path.display(), e)))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn diagnostics_output(file: &str, r: &SyntaxReport) -> Output {
    Output {
        json: json!({"file": file, "ok": r.ok(), "source_hash": r.source_hash, "diagnostics": r.diagnostics}),
        csv: csv_table(
            &["file", "line", "column", "kind", "message"],
            r.diagnostics.iter().map(|d| {
                vec![
                    file.to_string(),
                    d.span.line.to_string(),
                    d.span.column.to_string(),
                    d.kind.to_string(),
                    d.message.clone(),
                ]
            }),
        ),
        text: r.render(file),
    }
}

fn check(file: &Path) -> Result<Output> {
    let src = read(file)?;
    let name = file.display().to_string();
    let r = check_syntax(&src);
    let out = diagnostics_output(&name, &r);
    if r.ok() {
        Ok(out)
    } else {
        Err(Failure {
            output: Some(out),
            ..domain(anyhow!("{}: {} syntax error(s)", name, r.diagnostics.len()))
        })
    }
}

fn eda_params(args: &EdaArgs, cfg: &CliConfig) -> Result<EdaParams> {
    let clock = args
        .clock_period_ns
        .or(cfg.eda.clock_period_ns)
        .ok_or_else(|| usage(anyhow!("a clock period is required (--clock, RTLCAST_CLOCK_NS or [eda] clock_period_ns)")))?;
    let effort = match &args.effort_level {
        Some(s) => s.parse::<Effort>().map_err(usage)?,
        None => cfg.eda.effort_level.unwrap_or_default(),
    };
    let util = pick(args.target_utilization, cfg.eda.target_utilization, DEFAULT_TARGET_UTILIZATION);
    EdaParams::new(clock, util, effort).map_err(usage)
}

fn parse_file(path: &Path) -> Result<Vec<rtlcast::verilog::AstNode>> {
    let src = read(path)?;
    parse(&src).map_err(|r| {
        let name = path.display().to_string();
        Failure {
            output: Some(diagnostics_output(&name, &r)),
            ..domain(anyhow!("{} does not parse:\n{}", name, r.render(&name).trim_end()))
        }
    })
}

fn features(file: &Path, eda: &EdaArgs, cfg: &CliConfig) -> Result<Output> {
    let eda = eda_params(eda, cfg)?;
    let forest = parse_file(file)?;
    let fv = extract_features(&forest, &eda);
    let text: String = fv.named().map(|(n, v)| format!("{:<26} {}\n", n, v)).collect();
    Ok(Output {
        json: fv.to_json(),
        csv: fv.to_csv(),
        text,
    })
}

fn timestamp() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .expect("utc time formats")
}

fn train_cmd(data: &Path, out: &Path, tc: &TrainConfig, stamp: bool) -> Result<Output> {
    let ds = load_dataset_csv(data).map_err(|e| match e {
        rtlcast::predictor::DatasetError::Io(_) => usage(anyhow!("{}: {}", data.display(), e)),
        _ => domain(anyhow!("{}: {}", data.display(), e)),
    })?;
    let mut model = train(&ds, tc).map_err(|e| match e {
        rtlcast::predictor::TrainError::InvalidConfig(_) => usage(e),
        _ => domain(e),
    })?;
    if stamp {
        model.metadata.timestamp = Some(timestamp());
    }
    save_model(&model, out).map_err(|e| usage(anyhow!("{}: {}", out.display(), e)))?;
    let power_mse = *model.power.train_mse.last().expect("at least one entry");
    let tns_mse = *model.tns.train_mse.last().expect("at least one entry");
    Ok(Output {
        json: json!({
            "model_path": out.display().to_string(),
            "rows": ds.rows.len(),
            "trees": tc.n_trees,
            "power_train_mse": power_mse,
            "tns_train_mse": tns_mse,
        }),
        csv: csv_table(
            &["model_path", "rows", "trees", "power_train_mse", "tns_train_mse"],
            [vec![
                out.display().to_string(),
                ds.rows.len().to_string(),
                tc.n_trees.to_string(),
                power_mse.to_string(),
                tns_mse.to_string(),
            ]],
        ),
        text: format!(
            "trained on {} rows, {} trees per target\nfinal training MSE: power {:.6}, tns {:.6}\nwrote {}\n",
            ds.rows.len(),
            tc.n_trees,
            power_mse,
            tns_mse,
            out.display()
        ),
    })
}

fn synth(out: &Path, rows: usize, seed: u64, noise: f64) -> Result<Output> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(usage(anyhow!("noise must be a non-negative number")));
    }
    let d = synthetic_dataset(&SynthConfig {
        rows,
        seed,
        noise,
        ..SynthConfig::default()
    });
    let f = fs::File::create(out).map_err(|e| usage(anyhow!("{}: {}", out.display(), e)))?;
    write_dataset_csv(&d, f).map_err(|e| usage(anyhow!("{}: {}", out.display(), e)))?;
    Ok(Output {
        json: json!({"output": out.display().to_string(), "rows": rows, "seed": seed}),
        csv: csv_table(&["output", "rows", "seed"], [vec![out.display().to_string(), rows.to_string(), seed.to_string()]]),
        text: format!("wrote {} rows to {}\n", rows, out.display()),
    })
}

fn match_rate(reference: &Path, candidate: &Path, min_nodes: usize, normalize: bool) -> Result<Output> {
    if min_nodes < 1 {
        return Err(usage(anyhow!("--min-nodes must be at least 1")));
    }
    let a = parse_file(reference)?;
    let b = parse_file(candidate)?;
    let cfg = SubtreeMatchConfig {
        min_subtree_nodes: min_nodes,
        normalize_identifiers: normalize,
    };
    let smr = subtree_match_rate(&a, &b, &cfg);
    Ok(Output {
        json: json!({"smr_percent": smr, "min_subtree_nodes": min_nodes, "normalize_identifiers": normalize}),
        csv: csv_table(&["smr_percent", "min_subtree_nodes", "normalize_identifiers"], [vec![
            smr.to_string(),
            min_nodes.to_string(),
            normalize.to_string(),
        ]]),
        text: format!("{:.2}%\n", smr),
    })
}

// ---- eval ----

struct Table {
    design: Option<Vec<String>>,
    columns: Vec<(String, Vec<f64>)>,
}

fn read_table(path: &Path) -> Result<Table> {
    let text = read(path)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| domain(anyhow!("{}: {}", path.display(), e)))?
        .iter()
        .map(str::to_string)
        .collect();
    let design_col = header.iter().position(|h| h == "design");
    let mut design = design_col.map(|_| Vec::new());
    let mut columns: Vec<(String, Vec<f64>)> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != design_col)
        .map(|(_, h)| (h.clone(), Vec::new()))
        .collect();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| domain(anyhow!("{}: {}", path.display(), e)))?;
        let mut k = 0;
        for (i, cell) in rec.iter().enumerate() {
            if Some(i) == design_col {
                design.as_mut().expect("design column").push(cell.to_string());
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| domain(anyhow!("{}: row {}: '{}' is not a number", path.display(), n + 2, cell)))?;
            columns[k].1.push(v);
            k += 1;
        }
    }
    Ok(Table { design, columns })
}

fn eval(pred_path: &Path, truth_path: &Path, conditional: bool, residuals: Option<&Path>) -> Result<Output> {
    let pred = read_table(pred_path)?;
    let truth = read_table(truth_path)?;
    let n_truth = truth.columns.first().map_or(0, |c| c.1.len());
    // Pair rows by design name when both sides carry one, else by position.
    let pairs_idx: Vec<(usize, usize)> = match (&pred.design, &truth.design) {
        (Some(p), Some(t)) => {
            let at: HashMap<&str, usize> = p.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
            let mut v = Vec::new();
            for (j, d) in t.iter().enumerate() {
                if let Some(&i) = at.get(d.as_str()) {
                    v.push((i, j));
                }
            }
            if v.len() != p.len() {
                return Err(domain(anyhow!("some forecast designs are missing from the truth file")));
            }
            v
        }
        _ => {
            let n_pred = pred.columns.first().map_or(0, |c| c.1.len());
            if n_pred != n_truth && !conditional {
                return Err(domain(anyhow!("{} forecasts vs {} truths", n_pred, n_truth)));
            }
            (0..n_pred.min(n_truth)).map(|i| (i, i)).collect()
        }
    };
    if pairs_idx.len() != n_truth && !conditional {
        return Err(domain(anyhow!(
            "{} of {} designs have forecasts; use --conditional to score the rest as syntax failures",
            pairs_idx.len(),
            n_truth
        )));
    }
    let mut metrics = Map::new();
    let mut cond = Map::new();
    let mut text = String::new();
    let mut resid_rows = Vec::new();
    let mut scored = 0;
    for (name, tv) in &truth.columns {
        let Some((_, pv)) = pred.columns.iter().find(|(n, _)| n == name) else {
            continue;
        };
        scored += 1;
        let absolute = name.to_ascii_lowercase().contains("tns");
        let fix = |v: f64| if absolute { v.abs() } else { v };
        let pairs: Vec<(f64, f64)> = pairs_idx.iter().map(|(i, j)| (fix(pv[*i]), fix(tv[*j]))).collect();
        for (k, (i, j)) in pairs_idx.iter().enumerate() {
            let label = truth.design.as_ref().map_or_else(|| j.to_string(), |d| d[*j].clone());
            let _ = i;
            resid_rows.push(vec![
                label,
                name.clone(),
                pairs[k].0.to_string(),
                pairs[k].1.to_string(),
                (pairs[k].0 - pairs[k].1).to_string(),
            ]);
        }
        let set = EvalSet::new(name.clone(), pairs).map_err(|e| domain(anyhow!("{}: {}", name, e)))?;
        let r = report(&set).map_err(|e| domain(anyhow!("{}: {}", name, e)))?;
        text.push_str(&format!(
            "{}: n={} APME {:.2}% NRMSE {:.2}% R² {}\n",
            name,
            r.n,
            r.apme_percent,
            r.nrmse_percent,
            r.r2.map_or("undefined".to_string(), |v| format!("{:.5}", v))
        ));
        metrics.insert(name.clone(), to_value(&r));
        if conditional {
            let c = conditional_report(&set, n_truth).map_err(|e| domain(anyhow!("{}: {}", name, e)))?;
            text.push_str(&format!(
                "{}: rho {:.4} E {:.2}% conditional accuracy {:.2}% conditional error {:.2}%\n",
                name, c.rho, c.e_percent, c.conditional_accuracy_percent, c.conditional_error_percent
            ));
            cond.insert(name.clone(), to_value(&c));
        }
    }
    if scored == 0 {
        return Err(domain(anyhow!("no value column is shared by both files")));
    }
    if let Some(path) = residuals {
        let body = csv_table(&["design", "column", "forecast", "truth", "residual"], resid_rows);
        fs::write(path, body).map_err(|e| usage(anyhow!("{}: {}", path.display(), e)))?;
    }
    let mut doc = Map::new();
    doc.insert("metrics".into(), Value::Object(metrics.clone()));
    if conditional {
        doc.insert("conditional".into(), Value::Object(cond));
    }
    let csv = csv_table(
        &["column", "n", "apme_percent", "nrmse_percent", "r2"],
        metrics.iter().map(|(k, v)| {
            vec![
                k.clone(),
                v["n"].to_string(),
                v["apme_percent"].to_string(),
                v["nrmse_percent"].to_string(),
                v["r2"].to_string(),
            ]
        }),
    );
    Ok(Output {
        json: Value::Object(doc),
        csv,
        text,
    })
}

// ---- generation and forecasting ----

fn gen_config(gen: &GenArgs, cfg: &CliConfig) -> Result<(GenerationConfig, rtlcast::llm::BackendConfig)> {
    let flags = BackendSection {
        endpoint_url: gen.endpoint.clone(),
        model_id: gen.model_id.clone(),
        timeout_s: gen.timeout_s,
        max_attempts: gen.max_attempts,
    };
    let bc = cfg.backend(&flags);
    let max_iterations = pick(gen.max_iterations, cfg.max_iterations, DEFAULT_MAX_ITERATIONS);
    if max_iterations < 1 {
        return Err(usage(anyhow!("max_iterations must be at least 1")));
    }
    if bc.max_attempts < 1 {
        return Err(usage(anyhow!("max_attempts must be at least 1")));
    }
    let gc = GenerationConfig {
        max_iterations,
        model_id: bc.model_id.clone(),
        retry: RetryPolicy {
            max_attempts: bc.max_attempts,
            ..RetryPolicy::default()
        },
        ..GenerationConfig::default()
    };
    Ok((gc, bc))
}

fn templates(gen: &GenArgs, cfg: &CliConfig) -> Result<Templates> {
    match gen.template_dir.as_ref().or(cfg.template_dir.as_ref()) {
        Some(dir) => Templates::from_dir(dir).map_err(usage),
        None => Ok(Templates::default()),
    }
}

fn load_spec(path: &Path) -> Result<DesignSpec> {
    let text = read(path)?;
    let spec: DesignSpec = serde_json::from_str(&text).map_err(|e| usage(anyhow!("{}: {}", path.display(), e)))?;
    spec.validate().map_err(|e| usage(anyhow!("{}: {}", path.display(), e)))?;
    Ok(spec)
}

fn make_backend(replay: Option<&Path>, bc: &rtlcast::llm::BackendConfig) -> Result<Box<dyn LlmBackend>> {
    match replay {
        Some(p) => {
            let script = ReplayScript::load(p).map_err(|e| usage(anyhow!(e)))?;
            Ok(Box::new(ReplayBackend::new(script)))
        }
        None => Ok(Box::new(HttpBackend::from_env(bc).map_err(backend)?)),
    }
}

fn session_log(dir: Option<&PathBuf>, spec: &DesignSpec) -> Result<Option<(PathBuf, SessionLog)>> {
    let Some(dir) = dir else { return Ok(None) };
    fs::create_dir_all(dir).map_err(|e| usage(anyhow!("{}: {}", dir.display(), e)))?;
    let path = dir.join(format!("{}-{}.session.jsonl", spec.module_name, &spec.digest()[..12]));
    let log = SessionLog::append(&path).map_err(|e| usage(anyhow!("{}: {}", path.display(), e)))?;
    Ok(Some((path, log)))
}

fn session_failure_code(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::BackendFailed => crate::output::EXIT_BACKEND,
        _ => crate::output::EXIT_DOMAIN,
    }
}

fn generate(spec_path: &Path, gen: &GenArgs, out_dir: Option<PathBuf>, cfg: &CliConfig) -> Result<Output> {
    let spec = load_spec(spec_path)?;
    let (gc, bc) = gen_config(gen, cfg)?;
    let t = templates(gen, cfg)?;
    let mut be = make_backend(gen.replay.as_deref(), &bc)?;
    let dir = out_dir
        .or_else(|| gen.session_dir.clone())
        .or_else(|| cfg.session_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let (log_path, mut log) = match session_log(Some(&dir), &spec)? {
        Some((p, l)) => (p, l),
        None => unreachable!("directory always given"),
    };
    let session = generate_with_ipref(&spec, &mut *be, &gc, &t, Some(&mut log)).map_err(domain)?;
    let code_path = match &session.final_code {
        Some(code) => {
            let p = dir.join(format!("{}.v", spec.module_name));
            fs::write(&p, code).map_err(|e| usage(anyhow!("{}: {}", p.display(), e)))?;
            Some(p.display().to_string())
        }
        None => None,
    };
    let out = Output {
        json: json!({
            "outcome": session.outcome,
            "attempts": session.attempts.len(),
            "code_path": code_path,
            "session_log": log_path.display().to_string(),
            "session": session,
        }),
        csv: csv_table(
            &["outcome", "attempts", "code_path", "session_log"],
            [vec![
                format!("{:?}", session.outcome),
                session.attempts.len().to_string(),
                code_path.clone().unwrap_or_default(),
                log_path.display().to_string(),
            ]],
        ),
        text: format!(
            "{:?} after {} attempt(s)\n{}session log: {}\n",
            session.outcome,
            session.attempts.len(),
            code_path.as_ref().map_or(String::new(), |p| format!("code: {}\n", p)),
            log_path.display()
        ),
    };
    if session.outcome == Outcome::SyntaxOk {
        Ok(out)
    } else {
        Err(Failure {
            code: session_failure_code(session.outcome),
            error: anyhow!("generation ended with {:?}", session.outcome),
            output: Some(out),
        })
    }
}

fn load_model_arg(model: Option<PathBuf>, cfg: &CliConfig) -> Result<TrainedModel> {
    let path = model
        .or_else(|| cfg.model_path.clone())
        .ok_or_else(|| usage(anyhow!("a model is required (-m, RTLCAST_MODEL or model_path in the config)")))?;
    load_model(&path).map_err(|e| usage(anyhow!("{}: {}", path.display(), e)))
}

fn is_spec(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

fn refusal_json(session: &GenerationSession) -> Value {
    let diagnostics = session
        .attempts
        .last()
        .and_then(|a| a.syntax_report.as_ref())
        .map(|r| to_value(&r.diagnostics))
        .unwrap_or(Value::Array(vec![]));
    json!({
        "refused": true,
        "outcome": session.outcome,
        "diagnostics": diagnostics,
        "final_code": session.final_code,
        "session": session,
    })
}

fn result_row(r: &ForecastResult) -> Vec<String> {
    vec![
        r.forecast.power_uw.to_string(),
        r.forecast.tns_ns.to_string(),
        format!("{:?}", r.session.outcome),
        r.session.attempts.len().to_string(),
    ]
}

const FORECAST_HEADER: [&str; 5] = ["input", "power_uW", "tns_ns", "outcome", "attempts"];

fn forecast_error(input: &str, e: ForecastError) -> Failure {
    match e {
        ForecastError::Refused { session } => {
            let code = session_failure_code(session.outcome);
            let text = match session.attempts.last().and_then(|a| a.syntax_report.as_ref()) {
                Some(r) => format!("refused ({:?})\n{}", session.outcome, r.render(input)),
                None => format!("refused ({:?})\n", session.outcome),
            };
            Failure {
                code,
                error: anyhow!("{}: forecast refused, generation ended with {:?}", input, session.outcome),
                output: Some(Output {
                    csv: csv_table(&FORECAST_HEADER, [vec![
                        input.to_string(),
                        String::new(),
                        String::new(),
                        format!("{:?}", session.outcome),
                        session.attempts.len().to_string(),
                    ]]),
                    json: refusal_json(&session),
                    text,
                }),
            }
        }
        ForecastError::Eda(e) => usage(e),
        ForecastError::MissingBackend => usage(anyhow!("a backend is required for spec input")),
        ForecastError::Predict(e) => domain(e),
        ForecastError::Pipeline(e) => domain(e),
    }
}

fn forecast_cmd(
    inputs: &[PathBuf],
    model: Option<PathBuf>,
    eda: &EdaArgs,
    gen: &GenArgs,
    batch: bool,
    concurrency: usize,
    cfg: &CliConfig,
) -> Result<Output> {
    let eda = eda_params(eda, cfg)?;
    let model = load_model_arg(model, cfg)?;
    let (gc, bc) = gen_config(gen, cfg)?;
    let t = templates(gen, cfg)?;
    if batch {
        return forecast_batch(inputs, &model, &eda, gen, &gc, &bc, &t, concurrency);
    }
    if inputs.len() != 1 {
        return Err(usage(anyhow!("forecast takes one input unless --batch is given")));
    }
    let input = &inputs[0];
    let name = input.display().to_string();
    let session = if is_spec(input) {
        let spec = load_spec(input)?;
        let mut be = make_backend(gen.replay.as_deref(), &bc)?;
        let session_dir = gen.session_dir.as_ref().or(cfg.session_dir.as_ref());
        let mut log = session_log(session_dir, &spec)?;
        generate_with_ipref(&spec, &mut *be, &gc, &t, log.as_mut().map(|(_, l)| l)).map_err(domain)?
    } else {
        direct_session(&read(input)?)
    };
    let r = forecast_session(session, &model, &eda).map_err(|e| forecast_error(&name, e))?;
    let mut row = vec![name.clone()];
    row.extend(result_row(&r));
    Ok(Output {
        text: format!(
            "power {:.3} uW\ntns {:.4} ns\n{:?} after {} attempt(s)\n",
            r.forecast.power_uw,
            r.forecast.tns_ns,
            r.session.outcome,
            r.session.attempts.len()
        ),
        csv: csv_table(&FORECAST_HEADER, [row]),
        json: to_value(&r),
    })
}

#[allow(clippy::too_many_arguments)]
fn forecast_batch(
    inputs: &[PathBuf],
    model: &TrainedModel,
    eda: &EdaParams,
    gen: &GenArgs,
    gc: &GenerationConfig,
    bc: &rtlcast::llm::BackendConfig,
    t: &Templates,
    concurrency: usize,
) -> Result<Output> {
    let specs: Vec<DesignSpec> = inputs.iter().map(|p| load_spec(p)).collect::<Result<_>>()?;
    let scripts: Option<Vec<ReplayScript>> = match &gen.replay {
        Some(dir) => Some(
            inputs
                .iter()
                .map(|p| {
                    let stem = p.file_stem().unwrap_or_default().to_string_lossy();
                    let path = [format!("{}.json", stem), format!("{}.jsonl", stem)]
                        .iter()
                        .map(|f| dir.join(f))
                        .find(|f| f.exists())
                        .ok_or_else(|| usage(anyhow!("no replay script for {} in {}", stem, dir.display())))?;
                    ReplayScript::load(&path).map_err(|e| usage(anyhow!(e)))
                })
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    if scripts.is_none() {
        // Fail early on a bad endpoint configuration rather than once per design.
        HttpBackend::from_env(bc).map_err(backend)?;
    }
    let make = |i: usize| -> Box<dyn LlmBackend> {
        match &scripts {
            Some(s) => Box::new(ReplayBackend::new(s[i].clone())),
            None => Box::new(HttpBackend::from_env(bc).expect("checked above")),
        }
    };
    let res = batch_forecast(&specs, model, eda, make, gc, t, concurrency).map_err(domain)?;
    let mut items = Vec::new();
    let mut rows = Vec::new();
    let mut text = String::new();
    let mut worst = 0u8;
    for (p, r) in inputs.iter().zip(&res.results) {
        let name = p.display().to_string();
        match r {
            Ok(fr) => {
                let mut row = vec![name.clone()];
                row.extend(result_row(fr));
                rows.push(row);
                text.push_str(&format!("{}: power {:.3} uW, tns {:.4} ns\n", name, fr.forecast.power_uw, fr.forecast.tns_ns));
                items.push(json!({"input": name, "result": fr}));
            }
            Err(e) => {
                let (code, doc) = match e.session() {
                    Some(s) => (session_failure_code(s.outcome), refusal_json(s)),
                    None => (crate::output::EXIT_DOMAIN, json!({"error": e.to_string()})),
                };
                worst = worst.max(code);
                rows.push(vec![name.clone(), String::new(), String::new(), e.to_string(), String::new()]);
                text.push_str(&format!("{}: {}\n", name, e));
                items.push(json!({"input": name, "refusal": doc}));
            }
        }
    }
    text.push_str(&format!("syntax rate {:.4}\n", res.syntax_rate));
    let out = Output {
        json: json!({"syntax_rate": res.syntax_rate, "results": items}),
        csv: csv_table(&FORECAST_HEADER, rows),
        text,
    };
    if worst == 0 {
        Ok(out)
    } else {
        Err(Failure {
            code: worst,
            error: anyhow!("some designs were not forecast"),
            output: Some(out),
        })
    }
}
