use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use optboost::commands::{self, HypothesisArg, Inputs, RunConfig};
use optboost::data::LabelColumn;
use optboost_core::{Cadence, SvParams};

#[derive(Parser)]
#[command(name = "optboost", version, about = "Optimal AdaBoost with replayable traces and margin analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boost, then write the trace, analytics tables and a summary.
    Run {
        #[command(flatten)]
        inputs: InputArgs,
        /// Iteration budget.
        #[arg(long = "iters", default_value_t = 10_000)]
        iters: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Record the pre-update weight vector on every trace line.
        #[arg(long)]
        emit_weights: bool,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Replay a trace and certify every recorded quantity.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        inputs: InputArgs,
        /// Lags for the Cauchy-gap checks.
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 10, 100])]
        lags: Vec<usize>,
        /// Certification JSON; defaults to `certificate.json` next to the trace.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the analytics tables for an existing trace.
    Report {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Write a random weak-learnable dataset and dichotomy matrix.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Dataset CSV; the label column is the last one unless --label-column is given.
    #[arg(long)]
    data: PathBuf,
    /// `stumps` or a path to a ±1 matrix CSV (one hypothesis per row).
    #[arg(long, default_value = "stumps")]
    hypotheses: HypothesisArg,
    /// Header name of the label column.
    #[arg(long)]
    label_column: Option<String>,
}

impl InputArgs {
    fn into_inputs(self) -> Inputs {
        Inputs {
            data: self.data,
            label_column: self.label_column.map_or(LabelColumn::Last, LabelColumn::Named),
            hypotheses: self.hypotheses,
        }
    }
}

#[derive(Args)]
struct AnalysisArgs {
    /// Trailing checkpoints examined by the support-vector criteria.
    #[arg(long, default_value_t = optboost_core::analytics::DEFAULT_SV_WINDOW)]
    sv_window: usize,
    /// Distance to the minimum normalized margin that counts as "at" it.
    #[arg(long, default_value_t = optboost_core::analytics::DEFAULT_SV_DELTA)]
    sv_delta: f64,
    /// Weight floor for the weight criterion [default: 1e-6/n].
    #[arg(long)]
    sv_eps: Option<f64>,
    /// Snapshot every N iterations instead of the adaptive cadence.
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Drift tolerance for the convergence certificate.
    #[arg(long, default_value_t = 1e-3)]
    convergence_tol: f64,
}

impl AnalysisArgs {
    fn sv(&self) -> SvParams {
        SvParams { window: self.sv_window, delta: self.sv_delta, weight_floor: self.sv_eps }
    }

    fn cadence(&self) -> Cadence {
        self.checkpoint_every.map_or_else(Cadence::default, Cadence::Every)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> optboost::Result<u8> {
    match command {
        Command::Run { inputs, iters, out, emit_weights, analysis } => {
            let mut cfg = RunConfig::new(inputs.into_inputs(), out);
            cfg.t_max = iters;
            cfg.emit_weights = emit_weights;
            cfg.cadence = analysis.cadence();
            cfg.sv = analysis.sv();
            cfg.convergence_tol = analysis.convergence_tol;
            let outcome = commands::cmd_run(&cfg)?;
            println!("{}", outcome.summary_line());
            Ok(outcome.exit_code() as u8)
        }
        Command::Verify { trace, inputs, lags, out } => {
            let report = out.unwrap_or_else(|| default_certificate_path(&trace));
            let outcome = commands::cmd_verify(&trace, &inputs.into_inputs(), &lags, &report)?;
            if outcome.passed() {
                println!("{} checks passed; certificate at {}", outcome.results.len(), report.display());
                Ok(0)
            } else {
                println!("failed checks: {}", outcome.failed().join(", "));
                Ok(1)
            }
        }
        Command::Report { trace, inputs, out, analysis } => {
            let a = commands::cmd_report(
                &trace,
                &inputs.into_inputs(),
                analysis.cadence(),
                &analysis.sv(),
                analysis.convergence_tol,
                &out,
            )?;
            println!("t={} theta={:.6} ratio={:.6} |V|={}", a.report.t, a.report.theta, a.report.ratio, a.sv_margin.len());
            Ok(0)
        }
        Command::Generate { seed, n, d, m, out } => {
            commands::cmd_generate(seed, n, d, m, &out)?;
            Ok(0)
        }
    }
}

fn default_certificate_path(trace: &Path) -> PathBuf {
    trace.with_file_name("certificate.json")
}
