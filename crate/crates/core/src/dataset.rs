use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A fixed labelled training set: `n` rows of `d` finite features and a ±1
/// label per row.
///
/// Immutable once built. Row order is significant; every other module indexes
/// examples by their position here.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<i8>,
    n: usize,
    d: usize,
}

impl Dataset {
    /// Builds a dataset from row vectors and labels, validating every invariant.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                what: "label count",
                expected: n,
                found: labels.len(),
            });
        }
        if n < 2 {
            return Err(Error::EmptyDataset { n });
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::NoFeatures);
        }
        let mut features = Vec::with_capacity(n * d);
        for (row, values) in rows.iter().enumerate() {
            if values.len() != d {
                return Err(Error::Shape { row, expected: d, found: values.len() });
            }
            for (col, &v) in values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteFeature { row, col });
                }
            }
            features.extend_from_slice(values);
        }
        let labels = labels
            .into_iter()
            .enumerate()
            .map(|(row, value)| {
                if value == 1.0 {
                    Ok(1)
                } else if value == -1.0 {
                    Ok(-1)
                } else {
                    Err(Error::Label { row, value })
                }
            })
            .collect::<Result<Vec<i8>>>()?;
        Ok(Dataset { features, labels, n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn feature(&self, i: usize, f: usize) -> f64 {
        self.features[i * self.d + f]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.d)
    }
}
