// SPDX-License-Identifier: Apache-2.0

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CliConfig, OutputFormat};
use output::Failure;

#[derive(Debug, Parser)]
#[command(name = "rtlcast", version, about = "Power and timing forecasts for LLM-generated Verilog")]
pub struct Cli {
    /// Config file (TOML). Defaults to ./rtlcast.toml when present.
    #[arg(long, global = true, env = "RTLCAST_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output format for results on stdout.
    #[arg(long, global = true, value_enum, env = "RTLCAST_FORMAT")]
    pub format: Option<OutputFormat>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EdaArgs {
    /// Target clock period in ns.
    #[arg(long = "clock", env = "RTLCAST_CLOCK_NS")]
    pub clock_period_ns: Option<f64>,
    /// Placement utilization target in (0, 1].
    #[arg(long = "utilization", env = "RTLCAST_UTILIZATION")]
    pub target_utilization: Option<f64>,
    /// Synthesis effort: low, medium or high.
    #[arg(long = "effort", env = "RTLCAST_EFFORT")]
    pub effort_level: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GenArgs {
    /// Serve responses from a replay script instead of calling the endpoint.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Upper bound on generation attempts.
    #[arg(long, env = "RTLCAST_MAX_ITERATIONS")]
    pub max_iterations: Option<u32>,
    #[arg(long, env = "RTLCAST_ENDPOINT")]
    pub endpoint: Option<String>,
    #[arg(long, env = "RTLCAST_MODEL_ID")]
    pub model_id: Option<String>,
    #[arg(long)]
    pub timeout_s: Option<u64>,
    #[arg(long)]
    pub max_attempts: Option<u32>,
    /// Directory with repic.txt / feedback.txt overrides.
    #[arg(long, env = "RTLCAST_TEMPLATE_DIR")]
    pub template_dir: Option<PathBuf>,
    /// Where session logs are written.
    #[arg(long, env = "RTLCAST_SESSION_DIR")]
    pub session_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate Verilog for a design spec with syntax-feedback repair.
    Generate {
        spec: PathBuf,
        #[command(flatten)]
        gen: GenArgs,
        /// Directory for the generated code (default: session dir, else .).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Syntax-check a Verilog file; exit 0 iff it is clean.
    Check { file: PathBuf },
    /// Print the feature vector of a Verilog file.
    Features {
        file: PathBuf,
        #[command(flatten)]
        eda: EdaArgs,
    },
    /// Train a model from a dataset CSV.
    Train {
        data: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        trees: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        min_leaf_rows: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Leave the training timestamp out of the model file.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Forecast power and TNS for a spec (.json) or Verilog file.
    Forecast {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long, env = "RTLCAST_MODEL")]
        model: Option<PathBuf>,
        #[command(flatten)]
        eda: EdaArgs,
        #[command(flatten)]
        gen: GenArgs,
        /// Treat every input as a spec and run them concurrently; --replay is then a directory of
        /// <spec-stem>.json scripts.
        #[arg(long)]
        batch: bool,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
    },
    /// Score forecasts against ground truth.
    Eval {
        predictions: PathBuf,
        truth: PathBuf,
        /// Treat truth rows without a forecast as syntax failures and report conditional error.
        #[arg(long)]
        conditional: bool,
        /// Write per-design residuals here.
        #[arg(long)]
        residuals: Option<PathBuf>,
    },
    /// Subtree match rate of a candidate against a reference design.
    MatchRate {
        reference: PathBuf,
        candidate: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_nodes: usize,
        #[arg(long)]
        no_normalize: bool,
    },
    /// Write a synthetic training dataset.
    SynthData {
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 500)]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.verbose {
        env_logger::Builder::new().filter_level(log::LevelFilter::Info).init();
    } else {
        env_logger::init();
    }
    let cfg = match CliConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {:#}", e);
            return ExitCode::from(output::EXIT_USAGE);
        }
    };
    let format = config::pick(cli.format, cfg.output_format, OutputFormat::Json);
    let mut stdout = std::io::stdout().lock();
    let (code, out) = match commands::run(cli.command, &cfg) {
        Ok(out) => (0, Some(out)),
        Err(Failure { code, error, output }) => {
            eprintln!("error: {:#}", error);
            (code, output)
        }
    };
    if let Some(out) = out {
        if let Err(e) = out.write(format, &mut stdout).and_then(|_| stdout.flush()) {
            eprintln!("error: writing output: {}", e);
            return ExitCode::from(output::EXIT_USAGE);
        }
    }
    ExitCode::from(code)
}
