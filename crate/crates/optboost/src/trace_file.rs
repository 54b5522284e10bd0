//! JSON-lines trace files.
//!
//! Line 1 is a header `{"n","m","dataset_digest","config"}`, then one object
//! per iteration `{"t","j","edge","alpha","logZ"}` (plus `"weights"` when the
//! run emitted them), then `{"halt": …}`. Reals are written in scientific
//! notation with 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use optboost_core::{Halt, HypothesisSource, IterationRecord, Trace, TraceConfig, TraceHeader};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// `x` with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace<W: Write>(trace: &Trace, mut out: W) -> std::io::Result<()> {
    let h = &trace.header;
    writeln!(
        out,
        "{{\"n\":{},\"m\":{},\"dataset_digest\":\"{}\",\"config\":{{\"t_max\":{},\"hypotheses\":\"{}\",\"emit_weights\":{}}}}}",
        h.n,
        h.m,
        h.dataset_digest,
        h.config.t_max,
        h.config.hypotheses.as_str(),
        h.config.emit_weights
    )?;
    let mut line = String::new();
    for (k, r) in trace.records.iter().enumerate() {
        line.clear();
        let _ = write!(
            line,
            "{{\"t\":{},\"j\":{},\"edge\":{},\"alpha\":{},\"logZ\":{}",
            r.t,
            r.selected,
            real(r.edge),
            real(r.alpha),
            real(r.log_z)
        );
        if let Some(w) = trace.weights.get(k) {
            line.push_str(",\"weights\":[");
            for (i, x) in w.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&real(*x));
            }
            line.push(']');
        }
        line.push('}');
        writeln!(out, "{line}")?;
    }
    if let Some(halt) = trace.halt {
        writeln!(out, "{{\"halt\":\"{}\"}}", halt.as_str())?;
    }
    Ok(())
}

pub fn save_trace(trace: &Trace, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_trace(trace, &mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn load_trace(path: &Path) -> Result<Trace> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace(BufReader::new(file))
}

/// Parses a trace. A missing halt line leaves [`Trace::halt`] as `None`.
pub fn read_trace<R: BufRead>(reader: R) -> Result<Trace> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, first) = lines.next().ok_or_else(|| Error::parse(1, "empty trace file"))?;
    let first = first.map_err(|e| Error::parse(1, e.to_string()))?;
    let header = parse_header(&object(&first, 1)?)?;

    let mut trace = Trace { header, records: Vec::new(), weights: Vec::new(), halt: None };
    for (line_no, line) in lines {
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if trace.halt.is_some() {
            return Err(Error::parse(line_no, "content after halt record"));
        }
        let obj = object(&line, line_no)?;
        if let Some(halt) = obj.get("halt") {
            let halt = halt
                .as_str()
                .and_then(Halt::parse)
                .ok_or_else(|| Error::parse(line_no, "unknown halt reason"))?;
            trace.halt = Some(halt);
            continue;
        }
        trace.records.push(IterationRecord {
            t: uint(&obj, "t", line_no)?,
            selected: uint(&obj, "j", line_no)?,
            edge: float(&obj, "edge", line_no)?,
            alpha: float(&obj, "alpha", line_no)?,
            log_z: float(&obj, "logZ", line_no)?,
        });
        if let Some(w) = obj.get("weights") {
            let w = w
                .as_array()
                .ok_or_else(|| Error::parse(line_no, "weights is not an array"))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| Error::parse(line_no, "non-numeric weight")))
                .collect::<Result<Vec<f64>>>()?;
            trace.weights.push(w);
        }
    }
    Ok(trace)
}

fn object(line: &str, line_no: usize) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(Error::parse(line_no, "expected a JSON object")),
        Err(e) => Err(Error::parse(line_no, e.to_string())),
    }
}

fn uint(obj: &Map<String, Value>, key: &str, line_no: usize) -> Result<usize> {
    obj.get(key)
        .and_then(Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::parse(line_no, format!("{key:?} missing or not a non-negative integer")))
}

fn float(obj: &Map<String, Value>, key: &str, line_no: usize) -> Result<f64> {
    obj.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::parse(line_no, format!("{key:?} missing or not a number")))
}

fn parse_header(obj: &Map<String, Value>) -> Result<TraceHeader> {
    let config = obj
        .get("config")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::parse(1, "header has no config object"))?;
    let hypotheses = match config.get("hypotheses").and_then(Value::as_str) {
        Some("stumps") => HypothesisSource::Stumps,
        Some("matrix") => HypothesisSource::Matrix,
        _ => return Err(Error::parse(1, "config.hypotheses must be \"stumps\" or \"matrix\"")),
    };
    let emit_weights = config
        .get("emit_weights")
        .and_then(Value::as_bool)
        .ok_or_else(|| Error::parse(1, "config.emit_weights must be a boolean"))?;
    Ok(TraceHeader {
        n: uint(obj, "n", 1)?,
        m: uint(obj, "m", 1)?,
        dataset_digest: obj
            .get("dataset_digest")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::parse(1, "header has no dataset_digest"))?
            .to_string(),
        config: TraceConfig { t_max: uint(config, "t_max", 1)?, hypotheses, emit_weights },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use optboost_core::{run_with, Dataset, DichotomyPool, RunOptions};

    fn toy_trace(emit_weights: bool) -> Trace {
        let data =
            Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1.0; 3]).unwrap();
        let pool = DichotomyPool::from_rows(&[vec![1, 1, -1], vec![1, -1, 1]], &data).unwrap();
        run_with(&data, &pool, RunOptions { t_max: 5, emit_weights }, |_, _| {}).unwrap().1
    }

    #[test]
    fn reals_have_seventeen_significant_digits() {
        assert_eq!(real(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(real(-0.25), "-2.5000000000000000e-1");
        assert_eq!(real(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn layout_of_first_lines() {
        let mut buf = Vec::new();
        write_trace(&toy_trace(false), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("{\"n\":3,\"m\":2,\"dataset_digest\":\""));
        assert!(lines[0].ends_with(
            "\"config\":{\"t_max\":5,\"hypotheses\":\"matrix\",\"emit_weights\":false}}"
        ));
        assert!(lines[1].starts_with("{\"t\":0,\"j\":0,\"edge\":3.33333333333333"));
        assert_eq!(lines.last().unwrap(), &"{\"halt\":\"t_max\"}");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn round_trip_with_and_without_weights() {
        for emit in [false, true] {
            let trace = toy_trace(emit);
            let mut buf = Vec::new();
            write_trace(&trace, &mut buf).unwrap();
            assert_eq!(read_trace(buf.as_slice()).unwrap(), trace);
        }
    }

    #[test]
    fn rejects_fractional_integers_and_trailing_lines() {
        let mut buf = Vec::new();
        write_trace(&toy_trace(false), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let bad = text.replacen("\"n\":3", "\"n\":3.000003", 1);
        assert!(read_trace(bad.as_bytes()).is_err());
        let extra = format!("{text}{{\"t\":9}}\n");
        assert!(read_trace(extra.as_bytes()).is_err());
        let header_only = text.lines().next().unwrap().to_string();
        let trace = read_trace(header_only.as_bytes()).unwrap();
        assert!(trace.records.is_empty() && trace.halt.is_none());
    }
}
