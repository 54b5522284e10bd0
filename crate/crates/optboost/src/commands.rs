//! The `run`, `verify`, `report` and `generate` subcommands as library calls.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use optboost_core::{
    enumerate_stumps, run_with, verify_replay, Cadence, CheckResult, CheckStatus, Dataset,
    DichotomyPool, Halt, Recorder, RunOptions, SvParams, Trace, VerifyConfig,
};
use serde_json::json;

use crate::data::{load_dataset, load_dichotomy_matrix, LabelColumn};
use crate::error::{Error, Result};
use crate::report::{self, Analysis};
use crate::trace_file::{load_trace, save_trace};

pub const TRACE_FILE: &str = "trace.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

/// `stumps`, or a path to a dichotomy matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HypothesisArg {
    Stumps,
    Matrix(PathBuf),
}

impl FromStr for HypothesisArg {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s == "stumps" { HypothesisArg::Stumps } else { HypothesisArg::Matrix(s.into()) })
    }
}

#[derive(Debug, Clone)]
pub struct Inputs {
    pub data: PathBuf,
    pub label_column: LabelColumn,
    pub hypotheses: HypothesisArg,
}

impl Inputs {
    pub fn load(&self) -> Result<(Dataset, DichotomyPool)> {
        let data = load_dataset(&self.data, &self.label_column)?;
        let pool = match &self.hypotheses {
            HypothesisArg::Stumps => enumerate_stumps(&data)?,
            HypothesisArg::Matrix(path) => load_dichotomy_matrix(path, &data)?,
        };
        Ok((data, pool))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Inputs,
    pub t_max: usize,
    pub cadence: Cadence,
    pub emit_weights: bool,
    pub sv: SvParams,
    pub convergence_tol: f64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(inputs: Inputs, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            inputs,
            t_max: 10_000,
            cadence: Cadence::default(),
            emit_weights: false,
            sv: SvParams::default(),
            convergence_tol: 1e-3,
            out: out.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: Trace,
    pub analysis: Option<Analysis>,
}

impl RunOutcome {
    /// 0 after `t_max` iterations, 2 on a weak-learning halt, 3 on a perfect
    /// hypothesis.
    pub fn exit_code(&self) -> i32 {
        match self.trace.halt {
            Some(Halt::TMax) => 0,
            Some(Halt::WeakLearningViolation) => 2,
            Some(Halt::PerfectHypothesis) => 3,
            None => 1,
        }
    }

    pub fn summary_line(&self) -> String {
        let halt = self.trace.halt.map_or("none", Halt::as_str);
        let t = self.trace.records.len();
        match &self.analysis {
            Some(a) => format!(
                "t={t} halt={halt} theta={:.6} ratio={:.6} |V|={} (window {}, stable {})",
                a.report.theta,
                a.report.ratio,
                a.sv_margin.len(),
                a.sv_window,
                a.sv_stable
            ),
            None => format!("t={t} halt={halt}"),
        }
    }
}

fn validate(cfg: &RunConfig) -> Result<()> {
    let bad = |m: &str| Err(Error::parse(0, m.to_string()));
    if cfg.t_max == 0 {
        return Err(optboost_core::Error::ZeroIterations.into());
    }
    if cfg.sv.window == 0 {
        return bad("--sv-window must be at least 1");
    }
    if !(cfg.sv.delta > 0.0) {
        return bad("--sv-delta must be positive");
    }
    if cfg.sv.weight_floor.is_some_and(|e| !(e > 0.0)) {
        return bad("--sv-eps must be positive");
    }
    if matches!(cfg.cadence, Cadence::Every(0)) {
        return bad("--checkpoint-every must be at least 1");
    }
    Ok(())
}

fn run_recorded(
    data: &Dataset,
    pool: &DichotomyPool,
    options: RunOptions,
    cadence: Cadence,
) -> Result<(optboost_core::BoostState, Trace, Recorder)> {
    let mut recorder = Recorder::new(cadence);
    let (state, trace) = run_with(data, pool, options, |s, r| recorder.observe(s, r))?;
    recorder.finish(&state);
    Ok((state, trace, recorder))
}

/// Load → pool → run → analyze, writing the trace, the three tables and a
/// summary into `cfg.out`.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutcome> {
    validate(cfg)?;
    let (data, pool) = cfg.inputs.load()?;
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let options = RunOptions { t_max: cfg.t_max, emit_weights: cfg.emit_weights };
    let (state, trace, recorder) = run_recorded(&data, &pool, options, cfg.cadence)?;
    save_trace(&trace, &cfg.out.join(TRACE_FILE))?;

    let analysis = if state.t() > 0 {
        let a = report::analyze_run(&state, &trace, recorder, &pool, &cfg.sv, cfg.convergence_tol)?;
        report::write_tables(&a, &cfg.out)?;
        Some(a)
    } else {
        None
    };
    report::write_json(&report::summary_json(&trace, analysis.as_ref()), &cfg.out.join(SUMMARY_FILE))?;
    Ok(RunOutcome { trace, analysis })
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub results: Vec<CheckResult>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.results.iter().filter(|c| c.status == CheckStatus::Fail).map(|c| c.name).collect()
    }
}

/// Replays `trace_path` against the inputs and writes the certification
/// document to `report_path`. A digest mismatch or a missing halt record is
/// reported as a single failed check.
pub fn cmd_verify(
    trace_path: &Path,
    inputs: &Inputs,
    lags: &[usize],
    report_path: &Path,
) -> Result<VerifyOutcome> {
    let (data, pool) = inputs.load()?;
    let trace = load_trace(trace_path)?;
    let config = VerifyConfig { lags: lags.to_vec() };
    let results = match verify_replay(&trace, &data, &pool, &config) {
        Ok(results) => results,
        Err(e @ (optboost_core::Error::DigestMismatch { .. } | optboost_core::Error::TruncatedTrace)) => {
            let name = if matches!(e, optboost_core::Error::TruncatedTrace) {
                "truncated_trace"
            } else {
                "dataset_digest"
            };
            eprintln!("{e}");
            vec![CheckResult {
                name,
                status: CheckStatus::Fail,
                worst_violation: f64::INFINITY,
                tolerance: 0.0,
                location: None,
            }]
        }
        Err(e) => return Err(e.into()),
    };
    report::write_json(&report::certificate(&results), report_path)?;
    Ok(VerifyOutcome { results })
}

/// Rebuilds the analytics tables for an existing trace by replaying it.
pub fn cmd_report(
    trace_path: &Path,
    inputs: &Inputs,
    cadence: Cadence,
    sv: &SvParams,
    convergence_tol: f64,
    out: &Path,
) -> Result<Analysis> {
    let (data, pool) = inputs.load()?;
    let trace = load_trace(trace_path)?;
    if trace.halt.is_none() {
        return Err(optboost_core::Error::TruncatedTrace.into());
    }
    if trace.records.is_empty() {
        return Err(optboost_core::Error::NotStarted.into());
    }
    let options = RunOptions {
        t_max: trace.header.config.t_max,
        emit_weights: trace.header.config.emit_weights,
    };
    let (state, replayed, recorder) = run_recorded(&data, &pool, options, cadence)?;
    if replayed.header.dataset_digest != trace.header.dataset_digest {
        return Err(optboost_core::Error::DigestMismatch {
            expected: replayed.header.dataset_digest,
            found: trace.header.dataset_digest,
        }
        .into());
    }
    if replayed != trace {
        return Err(Error::parse(0, "trace does not match a replay of its inputs"));
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let analysis = report::analyze_run(&state, &trace, recorder, &pool, sv, convergence_tol)?;
    report::write_tables(&analysis, out)?;
    report::write_json(&report::summary_json(&trace, Some(&analysis)), &out.join(SUMMARY_FILE))?;
    Ok(analysis)
}

/// Writes `dataset.csv` and `hypotheses.csv` for a random weak-learnable
/// problem into `out`.
pub fn cmd_generate(seed: u64, n: usize, d: usize, m: usize, out: &Path) -> Result<()> {
    let (data, pool) = crate::synthetic::random_problem(seed, n, d, m)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("dataset.csv");
    let mut buf = Vec::new();
    crate::data::write_dataset(&data, &mut buf).map_err(|e| Error::io(&path, e))?;
    fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
    let path = out.join("hypotheses.csv");
    let mut buf = Vec::new();
    crate::data::write_dichotomy_matrix(&pool, &mut buf).map_err(|e| Error::io(&path, e))?;
    fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
    let meta = json!({ "seed": seed, "n": n, "d": d, "m": pool.m() });
    report::write_json(&meta, &out.join("generated.json"))
}
