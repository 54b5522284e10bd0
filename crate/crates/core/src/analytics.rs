//! Quantities derived from a run: normalized margins, the entropy bounds on
//! the expected margin, the edge ratio that support-vector margins approach,
//! coefficient shares per dichotomy, per-example coefficient splits, and
//! finite-time support-vector detection.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::booster::{BoostState, IterationRecord, Trace};
use crate::error::{Error, Result};
use crate::numeric::{exp, ln, ln_1p, CompensatedSum};

pub const DEFAULT_SV_WINDOW: usize = 100;
pub const DEFAULT_SV_DELTA: f64 = 1e-3;
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticsReport {
    /// Completed iterations.
    pub t: usize,
    /// `A_t`.
    pub total_alpha: f64,
    pub normalized_margins: Vec<f64>,
    /// `−Σ log(1−r_k²) / Σ log((1+r_k)/(1−r_k))`.
    pub ratio: f64,
    /// `E_{w_{t+1}}[mar_t]`.
    pub expected_margin: f64,
    pub expected_normalized_margin: f64,
    /// `H(w_{t+1})`.
    pub entropy: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Share of `A_t` held by each selected pool row.
    pub lambda: BTreeMap<usize, f64>,
    /// `β⁺_{t,i} / A_t`.
    pub beta_norm_plus: Vec<f64>,
    /// Minimum normalized margin.
    pub theta: f64,
    /// Examples within [`DEFAULT_SV_DELTA`] of `theta` at this checkpoint only.
    /// Use [`detect_support_vectors`] over a [`History`] for the windowed set.
    pub support_vectors: Vec<usize>,
}

impl AnalyticsReport {
    /// `ratio_t − E[mar̄_t]`, which lies in `[0, log n / A_t]`.
    pub fn envelope_gap(&self) -> f64 {
        self.ratio - self.expected_normalized_margin
    }

    pub fn beta_norm_minus(&self, i: usize) -> f64 {
        1.0 - self.beta_norm_plus[i]
    }
}

/// Computes the report for `state` using the coefficients recorded in `trace`.
pub fn analyze(state: &BoostState, trace: &Trace) -> Result<AnalyticsReport> {
    let t = state.t();
    if t == 0 {
        return Err(Error::NotStarted);
    }
    if trace.records.len() < t {
        return Err(Error::DimensionMismatch {
            what: "trace records vs. state iterations",
            expected: t,
            found: trace.records.len(),
        });
    }
    let n = state.n();
    let a = state.total_alpha();
    let margins = state.margins();
    let normalized_margins: Vec<f64> = margins.iter().map(|m| m / a).collect();

    let half_log_partition = trace.sum_log_z(t);
    let upper_bound = -half_log_partition;
    let lower_bound = -ln(n as f64) - half_log_partition;

    let mut expected = CompensatedSum::ZERO;
    let mut entropy_acc = CompensatedSum::ZERO;
    for (&l, &m) in state.log_weights().iter().zip(&margins) {
        let w = exp(l);
        expected.add(w * m);
        if w > 0.0 {
            entropy_acc.add(-w * l);
        }
    }
    let expected_margin = expected.value();

    let lambda = state.alpha_by_dichotomy().map(|(j, s)| (j, s / a)).collect();
    let beta_norm_plus = (0..n).map(|i| state.beta_plus(i) / a).collect();
    let theta = normalized_margins.iter().copied().fold(f64::INFINITY, f64::min);
    let support_vectors = min_margin_set(&normalized_margins, DEFAULT_SV_DELTA);

    Ok(AnalyticsReport {
        t,
        total_alpha: a,
        normalized_margins,
        ratio: edge_ratio(trace.records[..t].iter().map(|r| r.edge)),
        expected_margin,
        expected_normalized_margin: expected_margin / a,
        entropy: entropy_acc.value(),
        lower_bound,
        upper_bound,
        lambda,
        beta_norm_plus,
        theta,
        support_vectors,
    })
}

/// `−Σ log(1−r²) / Σ log((1+r)/(1−r))` over a sequence of edges.
pub fn edge_ratio<I: IntoIterator<Item = f64>>(edges: I) -> f64 {
    let mut num = CompensatedSum::ZERO;
    let mut den = CompensatedSum::ZERO;
    for r in edges {
        num.add(-ln_1p(-r * r));
        den.add(ln_1p(r) - ln_1p(-r));
    }
    num.value() / den.value()
}

/// Shannon entropy in nats, with `0 log 0 = 0`.
pub fn entropy(weights: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    let mut h = 0.0;
    for (index, &p) in weights.iter().enumerate() {
        if !(p >= 0.0) {
            return Err(Error::NegativeProbability { index, value: p });
        }
        sum += p;
        if p > 0.0 {
            h -= p * ln(p);
        }
    }
    if !((sum - 1.0).abs() <= 1e-9) {
        return Err(Error::NotNormalized { sum });
    }
    Ok(h)
}

/// `|E[mar̄_t] − ratio_t|`, bounded by `log n / A_t`.
pub fn expected_margin_gap(report: &AnalyticsReport, n: usize) -> f64 {
    let gap = (report.expected_normalized_margin - report.ratio).abs();
    debug_assert!(gap <= ln(n as f64) / report.total_alpha + 1e-9);
    gap
}

fn min_margin_set(normalized: &[f64], delta: f64) -> Vec<usize> {
    let theta = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    normalized
        .iter()
        .enumerate()
        .filter(|(_, &m)| m <= theta + delta)
        .map(|(i, _)| i)
        .collect()
}

/// Examples whose normalized margin is within `delta` of the minimum at every
/// one of the last `window` checkpoints.
pub fn detect_support_vectors<M: AsRef<[f64]>>(
    history: &[M],
    window: usize,
    delta: f64,
) -> Result<Vec<usize>> {
    let recent = trailing(history, window)?;
    let mut keep: Option<BTreeSet<usize>> = None;
    for margins in recent {
        let set: BTreeSet<usize> = min_margin_set(margins.as_ref(), delta).into_iter().collect();
        keep = Some(match keep {
            None => set,
            Some(prev) => prev.intersection(&set).copied().collect(),
        });
    }
    Ok(keep.unwrap_or_default().into_iter().collect())
}

/// Examples whose weight stays above `floor` at every one of the last `window`
/// checkpoints. Takes log-weights.
pub fn detect_support_vectors_by_weight<M: AsRef<[f64]>>(
    log_weight_history: &[M],
    window: usize,
    floor: f64,
) -> Result<Vec<usize>> {
    let recent = trailing(log_weight_history, window)?;
    let log_floor = ln(floor);
    let n = recent[0].as_ref().len();
    Ok((0..n)
        .filter(|&i| recent.iter().all(|lw| lw.as_ref()[i] > log_floor))
        .collect())
}

/// True when the per-checkpoint min-margin set is identical across the window.
pub fn support_set_stable<M: AsRef<[f64]>>(
    history: &[M],
    window: usize,
    delta: f64,
) -> Result<bool> {
    let recent = trailing(history, window)?;
    let first = min_margin_set(recent[0].as_ref(), delta);
    Ok(recent[1..].iter().all(|m| min_margin_set(m.as_ref(), delta) == first))
}

fn trailing<M>(history: &[M], window: usize) -> Result<&[M]> {
    if window == 0 || history.len() < window {
        return Err(Error::InsufficientHistory { needed: window.max(1), available: history.len() });
    }
    Ok(&history[history.len() - window..])
}

/// Support-vector detection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvParams {
    pub window: usize,
    pub delta: f64,
    /// Weight floor for the alternative criterion; `None` means `1e-6 / n`.
    pub weight_floor: Option<f64>,
}

impl Default for SvParams {
    fn default() -> Self {
        SvParams { window: DEFAULT_SV_WINDOW, delta: DEFAULT_SV_DELTA, weight_floor: None }
    }
}

impl SvParams {
    pub fn floor_for(&self, n: usize) -> f64 {
        self.weight_floor.unwrap_or(1e-6 / n as f64)
    }
}

/// Which completed-iteration counts get a history snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cadence {
    /// Every iteration up to `dense_until`, then every `⌈t / dense_until⌉`-th.
    Adaptive { dense_until: usize },
    Every(usize),
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence::Adaptive { dense_until: 1000 }
    }
}

impl Cadence {
    pub fn includes(self, t: usize) -> bool {
        match self {
            Cadence::Adaptive { dense_until } => {
                let dense_until = dense_until.max(1);
                t <= dense_until || t.is_multiple_of(t.div_ceil(dense_until))
            }
            Cadence::Every(k) => t.is_multiple_of(k.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Completed iterations.
    pub t: usize,
    pub total_alpha: f64,
    pub normalized_margins: Vec<f64>,
    pub log_weights: Vec<f64>,
    pub lambda: BTreeMap<usize, f64>,
}

impl Snapshot {
    pub fn capture(state: &BoostState) -> Self {
        let a = state.total_alpha();
        Snapshot {
            t: state.t(),
            total_alpha: a,
            normalized_margins: state.normalized_margins(),
            log_weights: state.log_weights().to_vec(),
            lambda: state.alpha_by_dichotomy().map(|(j, s)| (j, s / a)).collect(),
        }
    }
}

/// Checkpointed snapshots of a run, in increasing `t`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    pub cadence: Cadence,
    pub snapshots: Vec<Snapshot>,
}

impl History {
    pub fn new(cadence: Cadence) -> Self {
        History { cadence, snapshots: Vec::new() }
    }

    /// Records `state` if the cadence selects its iteration count.
    pub fn observe(&mut self, state: &BoostState) {
        if state.t() > 0 && self.cadence.includes(state.t()) {
            self.snapshots.push(Snapshot::capture(state));
        }
    }

    /// Records the final state if the cadence skipped it.
    pub fn finish(&mut self, state: &BoostState) {
        if state.t() > 0 && self.snapshots.last().map(|s| s.t) != Some(state.t()) {
            self.snapshots.push(Snapshot::capture(state));
        }
    }

    pub fn get(&self, t: usize) -> Option<&Snapshot> {
        self.snapshots.binary_search_by_key(&t, |s| s.t).ok().map(|k| &self.snapshots[k])
    }

    pub fn normalized_margins(&self) -> Vec<&[f64]> {
        self.snapshots.iter().map(|s| s.normalized_margins.as_slice()).collect()
    }

    pub fn log_weights(&self) -> Vec<&[f64]> {
        self.snapshots.iter().map(|s| s.log_weights.as_slice()).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

/// Scalar summary of one checkpoint, one row of the per-iteration table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    /// Index of the last completed iteration.
    pub t: usize,
    pub selected: usize,
    pub edge: f64,
    pub alpha: f64,
    pub log_z: f64,
    pub total_alpha: f64,
    pub ratio: f64,
    pub expected_margin: f64,
    pub entropy: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub theta: f64,
}

/// Collects a [`History`] and per-checkpoint [`IterationStats`] while a run
/// is in progress; feed it from the observer of [`crate::booster::run_with`].
#[derive(Debug, Clone)]
pub struct Recorder {
    pub history: History,
    pub rows: Vec<IterationStats>,
    sum_log_z: CompensatedSum,
    ratio_num: CompensatedSum,
    ratio_den: CompensatedSum,
    last: Option<IterationRecord>,
}

impl Recorder {
    pub fn new(cadence: Cadence) -> Self {
        Recorder {
            history: History::new(cadence),
            rows: Vec::new(),
            sum_log_z: CompensatedSum::ZERO,
            ratio_num: CompensatedSum::ZERO,
            ratio_den: CompensatedSum::ZERO,
            last: None,
        }
    }

    pub fn observe(&mut self, state: &BoostState, record: &IterationRecord) {
        self.sum_log_z.add(record.log_z);
        self.ratio_num.add(-ln_1p(-record.edge * record.edge));
        self.ratio_den.add(ln_1p(record.edge) - ln_1p(-record.edge));
        self.last = Some(*record);
        if self.history.cadence.includes(state.t()) {
            self.push(state);
        }
    }

    /// Adds the final state if the cadence skipped it.
    pub fn finish(&mut self, state: &BoostState) {
        if state.t() > 0 && self.history.snapshots.last().map(|s| s.t) != Some(state.t()) {
            self.push(state);
        }
    }

    fn push(&mut self, state: &BoostState) {
        let Some(record) = self.last else { return };
        let snapshot = Snapshot::capture(state);
        let mut expected = CompensatedSum::ZERO;
        let mut entropy = CompensatedSum::ZERO;
        for (&l, &m) in state.log_weights().iter().zip(&state.margins()) {
            let w = exp(l);
            expected.add(w * m);
            if w > 0.0 {
                entropy.add(-w * l);
            }
        }
        let sum_log_z = self.sum_log_z.value();
        self.rows.push(IterationStats {
            t: record.t,
            selected: record.selected,
            edge: record.edge,
            alpha: record.alpha,
            log_z: record.log_z,
            total_alpha: snapshot.total_alpha,
            ratio: self.ratio_num.value() / self.ratio_den.value(),
            expected_margin: expected.value(),
            entropy: entropy.value(),
            lower_bound: -ln(state.n() as f64) - sum_log_z,
            upper_bound: -sum_log_z,
            theta: snapshot.normalized_margins.iter().copied().fold(f64::INFINITY, f64::min),
        });
        self.history.snapshots.push(snapshot);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEntry {
    /// Example index for margin gaps, pool row for coefficient-share gaps.
    pub index: usize,
    pub gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub t: usize,
    pub lag: usize,
    /// `2 Σ_{k in window} α_k / A_{t+lag}`.
    pub bound: f64,
    pub margin_gaps: Vec<GapEntry>,
    pub lambda_gaps: Vec<GapEntry>,
}

impl GapReport {
    pub fn all_pass(&self) -> bool {
        self.margin_gaps.iter().chain(&self.lambda_gaps).all(|g| g.pass)
    }

    pub fn worst_excess(&self) -> f64 {
        self.margin_gaps
            .iter()
            .chain(&self.lambda_gaps)
            .map(|g| g.gap - self.bound)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Gaps between the snapshots after `t` and `t + lag` completed iterations,
/// for every normalized margin and every coefficient share, against the bound
/// `2 (α_t + … + α_{t+lag−1}) / A_{t+lag}` on the recorded coefficients.
pub fn convergence_gaps(
    trace: &Trace,
    history: &History,
    t: usize,
    lag: usize,
) -> Result<GapReport> {
    let available = history.len();
    let missing = |needed| Error::InsufficientHistory { needed, available };
    let early = history.get(t).ok_or_else(|| missing(t))?;
    let late = history.get(t + lag).ok_or_else(|| missing(t + lag))?;
    if trace.records.len() < t + lag {
        return Err(Error::InsufficientHistory {
            needed: t + lag,
            available: trace.records.len(),
        });
    }
    let mut window = CompensatedSum::ZERO;
    for r in &trace.records[t..t + lag] {
        window.add(r.alpha);
    }
    let bound = if lag == 0 { 0.0 } else { 2.0 * window.value() / late.total_alpha };
    let entry = |index, a: f64, b: f64| {
        let gap = (a - b).abs();
        GapEntry { index, gap, pass: gap <= bound + INEQUALITY_SLACK }
    };
    let margin_gaps = early
        .normalized_margins
        .iter()
        .zip(&late.normalized_margins)
        .enumerate()
        .map(|(i, (&a, &b))| entry(i, a, b))
        .collect();
    let rows: BTreeSet<usize> = early.lambda.keys().chain(late.lambda.keys()).copied().collect();
    let lambda_gaps = rows
        .into_iter()
        .map(|j| {
            let a = early.lambda.get(&j).copied().unwrap_or(0.0);
            let b = late.lambda.get(&j).copied().unwrap_or(0.0);
            entry(j, a, b)
        })
        .collect();
    Ok(GapReport { t, lag, bound, margin_gaps, lambda_gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::booster::{run, run_with, RunOptions};
    use crate::dataset::Dataset;
    use crate::hypothesis::DichotomyPool;
    use alloc::vec;

    const LN2: f64 = core::f64::consts::LN_2;

    fn toy() -> (Dataset, DichotomyPool) {
        let data =
            Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1.0; 3]).unwrap();
        let pool = DichotomyPool::from_rows(&[vec![1, 1, -1], vec![1, -1, 1]], &data).unwrap();
        (data, pool)
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[0.25; 4]).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!((entropy(&[0.25, 0.25, 0.5]).unwrap() - 1.5 * LN2).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            entropy(&[1.5, -0.5]),
            Err(Error::NegativeProbability { index: 1, .. })
        ));
        assert!(matches!(entropy(&[0.5, 0.4]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn toy_after_one_step() {
        let (data, pool) = toy();
        let (state, trace) = run(&data, &pool, 1).unwrap();
        let rep = analyze(&state, &trace).unwrap();
        let log_z0 = 0.5 * (8.0f64 / 9.0).ln();
        assert!(rep.expected_margin.abs() < 1e-15);
        assert!((rep.upper_bound - (-log_z0)).abs() < 1e-15);
        assert!((rep.lower_bound - (-(3f64.ln()) - log_z0)).abs() < 1e-15);
        assert!((rep.entropy - 1.5 * LN2).abs() < 1e-15);
        assert!((rep.entropy - (3f64.ln() + rep.expected_margin + log_z0)).abs() < 1e-12);
        let gap = expected_margin_gap(&rep, 3);
        assert!((gap - 0.058891 / 0.346574).abs() < 1e-5);
        assert!(gap <= 3f64.ln() / rep.total_alpha);
    }

    #[test]
    fn toy_after_two_steps() {
        let (data, pool) = toy();
        let (state, trace) = run(&data, &pool, 2).unwrap();
        let rep = analyze(&state, &trace).unwrap();
        assert!((rep.total_alpha - 0.5 * 6f64.ln()).abs() < 1e-15);
        let want = [1.0, (2.0f64 / 3.0).ln() / 6f64.ln(), 1.5f64.ln() / 6f64.ln()];
        for (got, want) in rep.normalized_margins.iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((rep.theta - want[1]).abs() < 1e-15);
        assert_eq!(rep.support_vectors, vec![1]);
        assert!((rep.lambda.values().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..3 {
            let diff = rep.beta_norm_plus[i] - rep.beta_norm_minus(i);
            assert!((diff - rep.normalized_margins[i]).abs() < 1e-12);
        }
        assert!(matches!(
            analyze(&crate::booster::init_state(3).unwrap(), &trace),
            Err(Error::NotStarted)
        ));
    }

    #[test]
    fn constant_edge_ratio() {
        let want = -(0.75f64.ln()) / 3f64.ln();
        for t in 1..50 {
            assert!((edge_ratio(core::iter::repeat_n(0.5, t)) - want).abs() < 1e-12);
        }
        assert!((want - 0.261860).abs() < 1e-6);
    }

    #[test]
    fn detection_examples() {
        let stable = vec![vec![0.4, 0.4, 0.9]; 5];
        assert_eq!(detect_support_vectors(&stable, 5, 0.01).unwrap(), vec![0, 1]);
        let near = vec![vec![0.4, 0.41, 0.9]; 5];
        assert_eq!(detect_support_vectors(&near, 3, 0.001).unwrap(), vec![0]);
        let alternating: Vec<Vec<f64>> = (0..6)
            .map(|k| if k % 2 == 0 { vec![0.4, 0.4, 0.9] } else { vec![0.4, 0.5, 0.9] })
            .collect();
        assert_eq!(detect_support_vectors(&alternating, 6, 0.01).unwrap(), vec![0]);
        assert!(!support_set_stable(&alternating, 6, 0.01).unwrap());
        assert!(support_set_stable(&stable, 5, 0.01).unwrap());
        assert!(matches!(
            detect_support_vectors(&stable, 6, 0.01),
            Err(Error::InsufficientHistory { needed: 6, available: 5 })
        ));
    }

    #[test]
    fn weight_floor_detection() {
        let lw = vec![vec![(0.5f64).ln(), (0.5f64).ln(), -40.0]; 3];
        assert_eq!(detect_support_vectors_by_weight(&lw, 3, 1e-6).unwrap(), vec![0, 1]);
    }

    #[test]
    fn cadence_is_dense_then_sparse() {
        let c = Cadence::default();
        assert!((1..=1000).all(|t| c.includes(t)));
        assert!(!c.includes(1001));
        assert!(c.includes(1002));
        assert!(c.includes(10_000));
        assert!(!c.includes(9_995));
        assert!(Cadence::Every(5).includes(10));
        assert!(!Cadence::Every(5).includes(11));
    }

    fn toy_history(t_max: usize) -> (Trace, History) {
        let (data, pool) = toy();
        let mut history = History::new(Cadence::default());
        let (state, trace) =
            run_with(&data, &pool, RunOptions::new(t_max), |s, _| history.observe(s)).unwrap();
        history.finish(&state);
        (trace, history)
    }

    #[test]
    fn zero_lag_gaps_vanish() {
        let (trace, history) = toy_history(20);
        let rep = convergence_gaps(&trace, &history, 7, 0).unwrap();
        assert!(rep.all_pass());
        assert!(rep.margin_gaps.iter().all(|g| g.gap == 0.0));
    }

    #[test]
    fn toy_lag_one_gap_is_tight() {
        let (trace, history) = toy_history(2);
        let rep = convergence_gaps(&trace, &history, 1, 1).unwrap();
        let a1 = 0.5 * 3f64.ln();
        let a2 = 0.5 * 6f64.ln();
        assert!((rep.bound - 2.0 * a1 / a2).abs() < 1e-15);
        // Example 2 goes from normalized margin -1 to its two-step value.
        let want = (-1.0 - (1.5f64.ln() / 6f64.ln())).abs();
        assert!((rep.margin_gaps[2].gap - want).abs() < 1e-15);
        assert!(rep.all_pass());
        assert!(convergence_gaps(&trace, &history, 2, 1).is_err());
    }

    #[test]
    fn repeated_row_lambda_gap() {
        // Synthetic: row 0 is picked at iterations 1 and 2 with equal alpha.
        use crate::booster::{IterationRecord, TraceConfig, TraceHeader};
        use crate::hypothesis::HypothesisSource;
        let alpha = [0.4, 0.3, 0.3];
        let records = alpha
            .iter()
            .zip([1usize, 0, 0])
            .enumerate()
            .map(|(t, (&alpha, selected))| IterationRecord {
                t,
                selected,
                edge: 0.0,
                alpha,
                log_z: 0.0,
            })
            .collect();
        let trace = Trace {
            header: TraceHeader {
                n: 2,
                m: 2,
                dataset_digest: alloc::string::String::new(),
                config: TraceConfig {
                    t_max: 3,
                    hypotheses: HypothesisSource::Matrix,
                    emit_weights: false,
                },
            },
            records,
            weights: Vec::new(),
            halt: None,
        };
        let snap = |t: usize, a: f64, l0: f64, l1: f64| Snapshot {
            t,
            total_alpha: a,
            normalized_margins: vec![0.0, 0.0],
            log_weights: vec![0.0, 0.0],
            lambda: [(0, l0), (1, l1)].into_iter().filter(|(_, l)| *l > 0.0).collect(),
        };
        let history = History {
            cadence: Cadence::default(),
            snapshots: vec![snap(2, 0.7, 0.3 / 0.7, 0.4 / 0.7), snap(3, 1.0, 0.6, 0.4)],
        };
        let rep = convergence_gaps(&trace, &history, 2, 1).unwrap();
        let lambda_t = 0.3 / 0.7;
        let want = 0.3 * (1.0 - lambda_t) / 1.0;
        let got = rep.lambda_gaps.iter().find(|g| g.index == 0).unwrap().gap;
        assert!((got - want).abs() < 1e-15);
        assert!(got <= rep.bound);
        assert!(rep.all_pass());
    }

    #[test]
    fn recorder_rows_agree_with_analyze() {
        let (data, pool) = toy();
        let mut rec = Recorder::new(Cadence::Every(3));
        let (state, trace) =
            run_with(&data, &pool, RunOptions::new(10), |s, r| rec.observe(s, r)).unwrap();
        rec.finish(&state);
        let ts: Vec<usize> = rec.rows.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![2, 5, 8, 9]);
        let last = rec.rows.last().unwrap();
        let rep = analyze(&state, &trace).unwrap();
        assert!((last.ratio - rep.ratio).abs() < 1e-15);
        assert!((last.expected_margin - rep.expected_margin).abs() < 1e-15);
        assert!((last.entropy - rep.entropy).abs() < 1e-15);
        assert!((last.lower_bound - rep.lower_bound).abs() < 1e-15);
        assert_eq!(last.theta, rep.theta);
        assert_eq!(rec.history.len(), 4);
    }
}
