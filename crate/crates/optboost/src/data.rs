//! CSV input: labelled datasets and explicit dichotomy matrices.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use optboost_core::{Dataset, DichotomyPool};

use crate::error::{Error, Result};

/// Which column holds the ±1 label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    /// Header name; requires a header row.
    Named(String),
}

pub fn load_dataset(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(file, label)
}

/// Parses a dataset CSV. A first row with any non-numeric cell is a header.
pub fn parse_dataset<R: Read>(reader: R, label: &LabelColumn) -> Result<Dataset> {
    let mut records = read_records(reader)?;
    if records.is_empty() {
        return Err(optboost_core::Error::EmptyDataset { n: 0 }.into());
    }
    let header = if records[0].1.iter().any(|cell| cell.parse::<f64>().is_err()) {
        Some(records.remove(0).1)
    } else {
        None
    };
    let width = match (&header, records.first()) {
        (Some(h), _) => h.len(),
        (None, Some((_, first))) => first.len(),
        (None, None) => 0,
    };
    let label_idx = match label {
        LabelColumn::Last => width.checked_sub(1),
        LabelColumn::Named(name) => {
            let header = header.as_ref().ok_or_else(|| Error::UnknownColumn(name.clone()))?;
            Some(
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::UnknownColumn(name.clone()))?,
            )
        }
    };
    let Some(label_idx) = label_idx else {
        return Err(Error::parse(1, "no columns"));
    };
    if width < 2 {
        return Err(optboost_core::Error::NoFeatures.into());
    }

    let mut rows = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (line, record) in &records {
        if record.len() != width {
            return Err(Error::parse(
                *line,
                format!("expected {width} columns, found {}", record.len()),
            ));
        }
        let mut features = Vec::with_capacity(width - 1);
        for (col, cell) in record.iter().enumerate() {
            let value = parse_real(cell, *line, col)?;
            if col == label_idx {
                labels.push(value);
            } else {
                features.push(value);
            }
        }
        rows.push(features);
    }
    Ok(Dataset::from_rows(rows, labels)?)
}

fn parse_real(cell: &str, line: usize, col: usize) -> Result<f64> {
    if cell.is_empty() {
        return Err(Error::parse(line, format!("empty cell in column {col}")));
    }
    cell.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("non-numeric cell {cell:?} in column {col}")))
}

fn read_records<R: Read>(reader: R) -> Result<Vec<(usize, StringRecord)>> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        out.push((line, record));
    }
    Ok(out)
}

/// Writes `data` with a header row `x0,…,x{d-1},label`. Reals use the
/// shortest representation that reads back to the same value.
pub fn write_dataset<W: Write>(data: &Dataset, mut out: W) -> std::io::Result<()> {
    let header: Vec<String> =
        (0..data.d()).map(|f| format!("x{f}")).chain(["label".to_string()]).collect();
    writeln!(out, "{}", header.join(","))?;
    for (i, row) in data.rows().enumerate() {
        for v in row {
            write!(out, "{v},")?;
        }
        writeln!(out, "{}", data.label(i))?;
    }
    Ok(())
}

pub fn load_dichotomy_matrix(path: &Path, data: &Dataset) -> Result<DichotomyPool> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dichotomy_matrix(file, data)
}

/// Parses a headerless ±1 matrix, one hypothesis per row.
pub fn parse_dichotomy_matrix<R: Read>(reader: R, data: &Dataset) -> Result<DichotomyPool> {
    let mut rows = Vec::new();
    for (line, record) in read_records(reader)? {
        let row = record
            .iter()
            .map(|cell| {
                cell.strip_prefix('+')
                    .unwrap_or(cell)
                    .parse::<i64>()
                    .map_err(|_| Error::parse(line, format!("entry {cell:?} is not an integer")))
            })
            .collect::<Result<Vec<i64>>>()?;
        rows.push(row);
    }
    Ok(DichotomyPool::from_rows(&rows, data)?)
}

pub fn write_dichotomy_matrix<W: Write>(pool: &DichotomyPool, mut out: W) -> std::io::Result<()> {
    for row in pool.raw_rows() {
        let cells: Vec<String> = row.iter().map(i8::to_string).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
