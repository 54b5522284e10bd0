//! Finite hypothesis pools, represented by the dichotomies they induce on the
//! training set.
//!
//! A pool stores two ±1 matrices with one row per distinct hypothesis
//! behaviour: `raw[j][i] = h_j(x_i)` and `mistake[j][i] = y_i * h_j(x_i)`.
//! Rows are deduplicated by exact equality of the raw vector, keeping the first
//! occurrence, so two hypotheses that label the training set identically
//! collapse to one row.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Where a pool row came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypothesisId {
    /// `x -> polarity * sign(x[feature] - threshold)` with `sign(0) = +1`.
    Stump { feature: usize, threshold: f64, polarity: i8 },
    /// Row index in a loaded dichotomy matrix, before deduplication.
    MatrixRow(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisSource {
    Stumps,
    Matrix,
}

impl HypothesisSource {
    pub fn as_str(self) -> &'static str {
        match self {
            HypothesisSource::Stumps => "stumps",
            HypothesisSource::Matrix => "matrix",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyPool {
    raw: Vec<i8>,
    mistake: Vec<i8>,
    ids: Vec<HypothesisId>,
    m: usize,
    n: usize,
    source: HypothesisSource,
}

/// Evaluates a decision stump on one feature value.
#[inline]
pub fn stump_predict(value: f64, threshold: f64, polarity: i8) -> i8 {
    if value - threshold >= 0.0 {
        polarity
    } else {
        -polarity
    }
}

/// Every decision stump over every feature of `data`.
///
/// Thresholds per feature are one value below the minimum followed by the
/// midpoints between consecutive distinct sorted values; each threshold is
/// tried with polarity +1 and then -1. Enumeration is feature-major with
/// ascending thresholds, which fixes which stump names a deduplicated row.
pub fn enumerate_stumps(data: &Dataset) -> Result<DichotomyPool> {
    let n = data.n();
    let mut builder = PoolBuilder::new(n);
    let mut column = Vec::with_capacity(n);
    let mut row = alloc::vec![0i8; n];
    for feature in 0..data.d() {
        column.clear();
        column.extend((0..n).map(|i| data.feature(i, feature)));
        column.sort_by(f64::total_cmp);
        column.dedup();

        let below = column[0] - 1.0;
        let thresholds = core::iter::once(below)
            .chain(column.windows(2).map(|pair| pair[0] + (pair[1] - pair[0]) / 2.0));
        for threshold in thresholds {
            for polarity in [1i8, -1] {
                for (i, slot) in row.iter_mut().enumerate() {
                    *slot = stump_predict(data.feature(i, feature), threshold, polarity);
                }
                builder.push(&row, HypothesisId::Stump { feature, threshold, polarity });
            }
        }
    }
    builder.finish(data, HypothesisSource::Stumps)
}

impl DichotomyPool {
    /// Builds a pool from an explicit ±1 matrix with one hypothesis per row.
    pub fn from_rows(rows: &[Vec<i64>], data: &Dataset) -> Result<Self> {
        let n = data.n();
        let mut builder = PoolBuilder::new(n);
        let mut buf = alloc::vec![0i8; n];
        for (j, values) in rows.iter().enumerate() {
            if values.len() != n {
                return Err(Error::Shape { row: j, expected: n, found: values.len() });
            }
            for (i, &v) in values.iter().enumerate() {
                buf[i] = match v {
                    1 => 1,
                    -1 => -1,
                    value => return Err(Error::Entry { row: j, col: i, value }),
                };
            }
            builder.push(&buf, HypothesisId::MatrixRow(j));
        }
        builder.finish(data, HypothesisSource::Matrix)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> HypothesisSource {
        self.source
    }

    /// Labelling dichotomy `h_j(x_i)` of row `j`.
    pub fn raw_row(&self, j: usize) -> &[i8] {
        &self.raw[j * self.n..(j + 1) * self.n]
    }

    /// Mistake dichotomy `y_i h_j(x_i)` of row `j`.
    pub fn mistake_row(&self, j: usize) -> &[i8] {
        &self.mistake[j * self.n..(j + 1) * self.n]
    }

    pub fn mistake_rows(&self) -> core::slice::ChunksExact<'_, i8> {
        self.mistake.chunks_exact(self.n)
    }

    pub fn raw_rows(&self) -> core::slice::ChunksExact<'_, i8> {
        self.raw.chunks_exact(self.n)
    }

    pub fn id(&self, j: usize) -> HypothesisId {
        self.ids[j]
    }

    pub fn ids(&self) -> &[HypothesisId] {
        &self.ids
    }

    /// Rebuilds the pool from its own raw rows; a no-op on any valid pool.
    pub fn deduplicated(&self, data: &Dataset) -> Result<Self> {
        let mut builder = PoolBuilder::new(self.n);
        for (row, &id) in self.raw_rows().zip(&self.ids) {
            builder.push(row, id);
        }
        builder.finish(data, self.source)
    }
}

struct PoolBuilder {
    n: usize,
    raw: Vec<i8>,
    ids: Vec<HypothesisId>,
    seen: BTreeMap<Vec<i8>, usize>,
}

impl PoolBuilder {
    fn new(n: usize) -> Self {
        PoolBuilder { n, raw: Vec::new(), ids: Vec::new(), seen: BTreeMap::new() }
    }

    fn push(&mut self, row: &[i8], id: HypothesisId) {
        if self.seen.contains_key(row) {
            return;
        }
        self.seen.insert(row.to_vec(), self.ids.len());
        self.raw.extend_from_slice(row);
        self.ids.push(id);
    }

    fn finish(self, data: &Dataset, source: HypothesisSource) -> Result<DichotomyPool> {
        if data.n() != self.n {
            return Err(Error::DimensionMismatch {
                what: "pool width",
                expected: data.n(),
                found: self.n,
            });
        }
        let m = self.ids.len();
        if m == 0 {
            return Err(Error::DegeneratePool);
        }
        let labels = data.labels();
        let mistake = self
            .raw
            .chunks_exact(self.n)
            .flat_map(|row| row.iter().zip(labels).map(|(&h, &y)| h * y))
            .collect();
        Ok(DichotomyPool { raw: self.raw, mistake, ids: self.ids, m, n: self.n, source })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_point() -> Dataset {
        Dataset::from_rows(vec![vec![0.5], vec![1.5]], vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn two_point_stumps_give_all_four_dichotomies() {
        let pool = enumerate_stumps(&two_point()).unwrap();
        assert_eq!(pool.m(), 4);
        let rows: Vec<&[i8]> = pool.raw_rows().collect();
        assert_eq!(rows, vec![&[1, 1][..], &[-1, -1], &[-1, 1], &[1, -1]]);
        assert_eq!(
            pool.id(2),
            HypothesisId::Stump { feature: 0, threshold: 1.0, polarity: 1 }
        );
        assert_eq!(pool.mistake_row(3), &[1, 1]);
    }

    #[test]
    fn constant_feature_only_gives_constant_rows() {
        let data = Dataset::from_rows(
            vec![vec![2.0, 0.0], vec![2.0, 1.0], vec![2.0, 2.0]],
            vec![1.0, -1.0, 1.0],
        )
        .unwrap();
        let pool = enumerate_stumps(&data).unwrap();
        let from_first: Vec<_> = pool
            .ids()
            .iter()
            .zip(pool.raw_rows())
            .filter(|(id, _)| matches!(id, HypothesisId::Stump { feature: 0, .. }))
            .map(|(_, r)| r.to_vec())
            .collect();
        assert_eq!(from_first, vec![vec![1, 1, 1], vec![-1, -1, -1]]);
    }

    #[test]
    fn sign_of_zero_is_positive() {
        assert_eq!(stump_predict(1.0, 1.0, 1), 1);
        assert_eq!(stump_predict(1.0, 1.0, -1), -1);
    }

    #[test]
    fn matrix_rows_with_positive_labels_keep_mistake_equal_to_raw() {
        let data =
            Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1.0; 3]).unwrap();
        let pool = DichotomyPool::from_rows(&[vec![1, 1, -1], vec![1, -1, 1]], &data).unwrap();
        assert_eq!(pool.m(), 2);
        for j in 0..2 {
            assert_eq!(pool.raw_row(j), pool.mistake_row(j));
        }
        assert_eq!(pool.id(1), HypothesisId::MatrixRow(1));
    }

    #[test]
    fn duplicate_matrix_rows_collapse() {
        let data = Dataset::from_rows(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap();
        let pool = DichotomyPool::from_rows(&[vec![1, 1], vec![1, 1]], &data).unwrap();
        assert_eq!(pool.m(), 1);
    }

    #[test]
    fn matrix_entry_and_shape_errors() {
        let data = Dataset::from_rows(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap();
        assert_eq!(
            DichotomyPool::from_rows(&[vec![1, 2]], &data).unwrap_err(),
            Error::Entry { row: 0, col: 1, value: 2 }
        );
        assert!(matches!(
            DichotomyPool::from_rows(&[vec![1, 1, 1]], &data).unwrap_err(),
            Error::Shape { row: 0, expected: 2, found: 3 }
        ));
        assert_eq!(DichotomyPool::from_rows(&[], &data).unwrap_err(), Error::DegeneratePool);
    }
}
