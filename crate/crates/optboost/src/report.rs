//! Analytics CSVs, the run summary and the certification document.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use optboost_core::analytics::support_set_stable;
use optboost_core::verify::Location;
use optboost_core::{
    analyze, certify_convergence, detect_support_vectors, detect_support_vectors_by_weight,
    AnalyticsReport, BoostState, CheckResult, CheckStatus, DichotomyPool, History,
    IterationStats, Recorder, SvParams, Trace,
};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::trace_file::real;

pub const PER_EXAMPLE_COLUMNS: [&str; 6] = [
    "i",
    "margin",
    "normalized_margin",
    "beta_plus_norm",
    "is_support_vector_margin_criterion",
    "is_support_vector_weight_criterion",
];

pub const PER_ITERATION_COLUMNS: [&str; 11] = [
    "t",
    "edge",
    "alpha",
    "logZ",
    "A",
    "ratio",
    "expected_margin",
    "entropy",
    "lower_bound",
    "upper_bound",
    "theta",
];

pub const PER_DICHOTOMY_COLUMNS: [&str; 3] = ["j", "lambda", "selection_count"];

/// Everything derived from a finished run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: AnalyticsReport,
    pub margins: Vec<f64>,
    pub rows: Vec<IterationStats>,
    pub history: History,
    pub sv_margin: Vec<usize>,
    pub sv_weight: Vec<usize>,
    /// Window actually used; shorter than requested when the run has fewer
    /// checkpoints.
    pub sv_window: usize,
    pub sv_stable: bool,
    pub selection_counts: Vec<usize>,
    pub convergence: CheckResult,
}

pub fn analyze_run(
    state: &BoostState,
    trace: &Trace,
    recorder: Recorder,
    pool: &DichotomyPool,
    sv: &SvParams,
    convergence_tol: f64,
) -> Result<Analysis> {
    let report = analyze(state, trace)?;
    let Recorder { history, rows, .. } = recorder;
    let sv_window = sv.window.min(history.len()).max(1);
    let margins_hist = history.normalized_margins();
    let sv_margin = detect_support_vectors(&margins_hist, sv_window, sv.delta)?;
    let sv_stable = support_set_stable(&margins_hist, sv_window, sv.delta)?;
    let sv_weight =
        detect_support_vectors_by_weight(&history.log_weights(), sv_window, sv.floor_for(state.n()))?;
    let mut selection_counts = vec![0; pool.m()];
    for r in &trace.records {
        selection_counts[r.selected] += 1;
    }
    let convergence = match certify_convergence(trace, &history, convergence_tol, sv) {
        Ok(c) => c,
        Err(optboost_core::Error::InsufficientHistory { .. }) => CheckResult {
            name: "convergence",
            status: CheckStatus::Skipped,
            worst_violation: 0.0,
            tolerance: convergence_tol,
            location: None,
        },
        Err(e) => return Err(e.into()),
    };
    Ok(Analysis {
        report,
        margins: state.margins(),
        rows,
        history,
        sv_margin,
        sv_weight,
        sv_window,
        sv_stable,
        selection_counts,
        convergence,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn finish(mut out: BufWriter<File>, path: &Path, body: std::io::Result<()>) -> Result<()> {
    body.and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_per_example(analysis: &Analysis, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let body = (|| {
        writeln!(out, "{}", PER_EXAMPLE_COLUMNS.join(","))?;
        let rep = &analysis.report;
        for (i, &margin) in analysis.margins.iter().enumerate() {
            writeln!(
                out,
                "{i},{},{},{},{},{}",
                real(margin),
                real(rep.normalized_margins[i]),
                real(rep.beta_norm_plus[i]),
                u8::from(analysis.sv_margin.contains(&i)),
                u8::from(analysis.sv_weight.contains(&i)),
            )?;
        }
        Ok(())
    })();
    finish(out, path, body)
}

pub fn write_per_iteration(rows: &[IterationStats], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let body = (|| {
        writeln!(out, "{}", PER_ITERATION_COLUMNS.join(","))?;
        for r in rows {
            let reals = [
                r.edge,
                r.alpha,
                r.log_z,
                r.total_alpha,
                r.ratio,
                r.expected_margin,
                r.entropy,
                r.lower_bound,
                r.upper_bound,
                r.theta,
            ];
            let cells: Vec<String> = reals.iter().map(|&x| real(x)).collect();
            writeln!(out, "{},{}", r.t, cells.join(","))?;
        }
        Ok(())
    })();
    finish(out, path, body)
}

pub fn write_per_dichotomy(analysis: &Analysis, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let body = (|| {
        writeln!(out, "{}", PER_DICHOTOMY_COLUMNS.join(","))?;
        for (j, &count) in analysis.selection_counts.iter().enumerate() {
            let lambda = analysis.report.lambda.get(&j).copied().unwrap_or(0.0);
            writeln!(out, "{j},{},{count}", real(lambda))?;
        }
        Ok(())
    })();
    finish(out, path, body)
}

/// Writes the three analytics tables into `dir`.
pub fn write_tables(analysis: &Analysis, dir: &Path) -> Result<()> {
    write_per_example(analysis, &dir.join("per_example.csv"))?;
    write_per_iteration(&analysis.rows, &dir.join("per_iteration.csv"))?;
    write_per_dichotomy(analysis, &dir.join("per_dichotomy.csv"))
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

fn location(loc: Option<Location>) -> Value {
    match loc {
        Some(Location { t, index }) => json!({ "t": t, "index": index }),
        None => Value::Null,
    }
}

pub fn check_json(c: &CheckResult) -> Value {
    json!({
        "status": c.status.as_str(),
        "worst_violation": number(c.worst_violation),
        "tolerance": number(c.tolerance),
        "location": location(c.location),
    })
}

/// Certification document: `{check_name: {status, worst_violation, tolerance, location}}`.
pub fn certificate(results: &[CheckResult]) -> Value {
    let map: Map<String, Value> =
        results.iter().map(|c| (c.name.to_string(), check_json(c))).collect();
    Value::Object(map)
}

pub fn write_json(value: &Value, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let body = serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(out));
    finish(out, path, body)
}

pub fn summary_json(trace: &Trace, analysis: Option<&Analysis>) -> Value {
    let halt = trace.halt.map(|h| h.as_str());
    let mut v = json!({
        "iterations": trace.records.len(),
        "halt": halt,
    });
    if let Some(a) = analysis {
        let obj = v.as_object_mut().expect("object literal");
        obj.insert("A".into(), number(a.report.total_alpha));
        obj.insert("theta".into(), number(a.report.theta));
        obj.insert("ratio".into(), number(a.report.ratio));
        obj.insert("expected_normalized_margin".into(), number(a.report.expected_normalized_margin));
        obj.insert("support_vectors_margin".into(), json!(a.sv_margin));
        obj.insert("support_vectors_weight".into(), json!(a.sv_weight));
        obj.insert("support_vector_window".into(), json!(a.sv_window));
        obj.insert("support_set_stable".into(), json!(a.sv_stable));
        obj.insert("convergence".into(), check_json(&a.convergence));
    }
    v
}
