//! The Optimal AdaBoost loop: exact edge maximization over the pool, the
//! closed-form coefficient, and a log-domain multiplicative weight update.
//!
//! Weights are stored as `log w_{t,i}` and renormalized with a log-sum-exp
//! after every step. The closed-form partition value `½·log(1 − r²)` is what
//! gets recorded; the directly computed normalizer is used for the update and
//! must agree with it to `1e-9`, otherwise the step fails with
//! [`Error::NumericalDrift`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hypothesis::{DichotomyPool, HypothesisSource};
use crate::numeric::{exp, ln, ln_1p, logsumexp, signed_dot, CompensatedSum};

/// Edges at or above `1 - PERFECT_EDGE_GAP` halt the run as a perfect hypothesis.
pub const PERFECT_EDGE_GAP: f64 = 1e-12;

/// Allowed disagreement between closed-form and direct `log Z_t`.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BoostState {
    t: usize,
    log_weights: Vec<f64>,
    margins: Vec<CompensatedSum>,
    total_alpha: CompensatedSum,
    sum_log_z: CompensatedSum,
    alpha_by_dichotomy: BTreeMap<usize, CompensatedSum>,
    beta_plus: Vec<CompensatedSum>,
    beta_minus: Vec<CompensatedSum>,
}

/// Uniform starting state for `n` examples.
pub fn init_state(n: usize) -> Result<BoostState> {
    if n < 2 {
        return Err(Error::TooFewExamples { n });
    }
    Ok(BoostState {
        t: 0,
        log_weights: alloc::vec![-ln(n as f64); n],
        margins: alloc::vec![CompensatedSum::ZERO; n],
        total_alpha: CompensatedSum::ZERO,
        sum_log_z: CompensatedSum::ZERO,
        alpha_by_dichotomy: BTreeMap::new(),
        beta_plus: alloc::vec![CompensatedSum::ZERO; n],
        beta_minus: alloc::vec![CompensatedSum::ZERO; n],
    })
}

impl BoostState {
    /// Number of completed iterations.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|&l| exp(l)).collect()
    }

    pub fn margin(&self, i: usize) -> f64 {
        self.margins[i].value()
    }

    /// Unnormalized margins `y_i F_t(x_i)`.
    pub fn margins(&self) -> Vec<f64> {
        self.margins.iter().map(CompensatedSum::value).collect()
    }

    /// `A_t`, the sum of all coefficients so far.
    pub fn total_alpha(&self) -> f64 {
        self.total_alpha.value()
    }

    /// Sum of the directly computed `log Z_k`.
    pub fn sum_log_z(&self) -> f64 {
        self.sum_log_z.value()
    }

    /// Margins divided by `A_t`; all zero before the first step.
    pub fn normalized_margins(&self) -> Vec<f64> {
        let a = self.total_alpha();
        if a > 0.0 {
            self.margins.iter().map(|m| m.value() / a).collect()
        } else {
            alloc::vec![0.0; self.n()]
        }
    }

    /// Coefficient mass accumulated by each selected pool row.
    pub fn alpha_by_dichotomy(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.alpha_by_dichotomy.iter().map(|(&j, s)| (j, s.value()))
    }

    /// Coefficient mass from iterations where example `i` was classified correctly.
    pub fn beta_plus(&self, i: usize) -> f64 {
        self.beta_plus[i].value()
    }

    /// Coefficient mass from iterations where example `i` was misclassified.
    pub fn beta_minus(&self, i: usize) -> f64 {
        self.beta_minus[i].value()
    }

    /// Residuals `(β⁺ + β⁻ − A, β⁺ − β⁻ − mar)` for example `i`.
    ///
    /// Evaluated from the uncollapsed accumulator parts, so the result is the
    /// accumulators' real disagreement rather than the rounding of `A`-sized
    /// intermediate values.
    pub fn beta_residuals(&self, i: usize) -> (f64, f64) {
        let (plus, minus) = (&self.beta_plus[i], &self.beta_minus[i]);
        let split = CompensatedSum::combine(&[(1.0, plus), (1.0, minus), (-1.0, &self.total_alpha)]);
        let margin = CompensatedSum::combine(&[(1.0, plus), (-1.0, minus), (-1.0, &self.margins[i])]);
        (split, margin)
    }
}

/// Picks the pool row with the largest weighted edge.
///
/// Ties go to the smallest row index. Fails with
/// [`Error::WeakLearningViolation`] when no edge is positive and with
/// [`Error::PerfectHypothesis`] when the best edge is within `1e-12` of 1.
pub fn select_edge(state: &BoostState, pool: &DichotomyPool) -> Result<(usize, f64)> {
    check_width(state, pool)?;
    let weights = state.weights();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (j, row) in pool.mistake_rows().enumerate() {
        let edge = signed_dot(&weights, row);
        if edge > best.1 {
            best = (j, edge);
        }
    }
    let (j, edge) = best;
    if !(edge > 0.0) {
        return Err(Error::WeakLearningViolation { t: state.t, edge });
    }
    if edge >= 1.0 - PERFECT_EDGE_GAP {
        return Err(Error::PerfectHypothesis { t: state.t, j, edge });
    }
    Ok((j, edge))
}

/// `(α, log Z)` for an edge `r` in `(0, 1)`: `α = ½ log((1+r)/(1−r))` and
/// `log Z = ½ log(1 − r²)`.
pub fn edge_to_coefficients(edge: f64) -> Result<(f64, f64)> {
    if !(edge > 0.0 && edge < 1.0) {
        return Err(Error::EdgeDomain { edge });
    }
    let alpha = 0.5 * (ln_1p(edge) - ln_1p(-edge));
    let log_z = 0.5 * ln_1p(-edge * edge);
    Ok((alpha, log_z))
}

/// Applies one multiplicative update with row `j` and returns the directly
/// computed `log Z_t`.
///
/// The state is left untouched if the direct normalizer drifts from `log_z`
/// by more than `1e-9`.
pub fn apply_update(
    state: &mut BoostState,
    pool: &DichotomyPool,
    j: usize,
    alpha: f64,
    log_z: f64,
) -> Result<f64> {
    check_width(state, pool)?;
    if j >= pool.m() {
        return Err(Error::RowOutOfRange { j, m: pool.m() });
    }
    let row = pool.mistake_row(j);
    let mut shifted: Vec<f64> = state
        .log_weights
        .iter()
        .zip(row)
        .map(|(&l, &eta)| l - f64::from(eta) * alpha)
        .collect();
    let direct = logsumexp(&shifted);
    if !((direct - log_z).abs() <= DRIFT_TOLERANCE) {
        return Err(Error::NumericalDrift { t: state.t, closed_form: log_z, direct });
    }
    for l in &mut shifted {
        *l -= direct;
    }
    state.log_weights = shifted;

    for (i, &eta) in row.iter().enumerate() {
        state.margins[i].add(f64::from(eta) * alpha);
        if eta > 0 {
            state.beta_plus[i].add(alpha);
        } else {
            state.beta_minus[i].add(alpha);
        }
    }
    state.total_alpha.add(alpha);
    state.sum_log_z.add(direct);
    state.alpha_by_dichotomy.entry(j).or_default().add(alpha);
    state.t += 1;
    Ok(direct)
}

fn check_width(state: &BoostState, pool: &DichotomyPool) -> Result<()> {
    if pool.n() != state.n() {
        return Err(Error::DimensionMismatch {
            what: "pool width vs. weight vector",
            expected: state.n(),
            found: pool.n(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub selected: usize,
    pub edge: f64,
    pub alpha: f64,
    pub log_z: f64,
}

impl IterationRecord {
    /// Largest deviation of the recorded `α` and `log Z` from their closed
    /// forms in the recorded edge, or `None` if the edge is outside `(0, 1)`.
    pub fn closed_form_deviation(&self) -> Option<f64> {
        let (alpha, log_z) = edge_to_coefficients(self.edge).ok()?;
        Some((alpha - self.alpha).abs().max((log_z - self.log_z).abs()))
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Halt {
    TMax,
    WeakLearningViolation,
    PerfectHypothesis,
}

impl Halt {
    pub fn as_str(self) -> &'static str {
        match self {
            Halt::TMax => "t_max",
            Halt::WeakLearningViolation => "weak_learning_violation",
            Halt::PerfectHypothesis => "perfect_hypothesis",
        }
    }

    pub fn parse(s: &str) -> Option<Halt> {
        match s {
            "t_max" => Some(Halt::TMax),
            "weak_learning_violation" => Some(Halt::WeakLearningViolation),
            "perfect_hypothesis" => Some(Halt::PerfectHypothesis),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceConfig {
    pub t_max: usize,
    pub hypotheses: HypothesisSource,
    pub emit_weights: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub n: usize,
    pub m: usize,
    pub dataset_digest: String,
    pub config: TraceConfig,
}

/// Append-only log of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<IterationRecord>,
    /// `w_t` in force when record `t` selected its row; empty unless
    /// `emit_weights` is set.
    pub weights: Vec<Vec<f64>>,
    pub halt: Option<Halt>,
}

impl Trace {
    /// Sum of the recorded closed-form `log Z_k` over the first `t` records.
    pub fn sum_log_z(&self, t: usize) -> f64 {
        let mut acc = CompensatedSum::ZERO;
        for r in &self.records[..t] {
            acc.add(r.log_z);
        }
        acc.value()
    }

    /// Index of the first record that is out of sequence, if any.
    pub fn first_gap(&self) -> Option<usize> {
        self.records.iter().enumerate().find(|(k, r)| r.t != *k).map(|(k, _)| k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub t_max: usize,
    pub emit_weights: bool,
}

impl RunOptions {
    pub fn new(t_max: usize) -> Self {
        RunOptions { t_max, emit_weights: false }
    }
}

/// SHA-256 over the dataset and the pool's raw dichotomies, as lowercase hex.
pub fn input_digest(data: &Dataset, pool: &DichotomyPool) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"optboost/inputs/v1");
    hasher.update((data.n() as u64).to_le_bytes());
    hasher.update((data.d() as u64).to_le_bytes());
    for row in data.rows() {
        for v in row {
            hasher.update(v.to_bits().to_le_bytes());
        }
    }
    hasher.update(data.labels().iter().map(|&y| y as u8).collect::<Vec<u8>>());
    hasher.update((pool.m() as u64).to_le_bytes());
    for row in pool.raw_rows() {
        hasher.update(row.iter().map(|&h| h as u8).collect::<Vec<u8>>());
    }
    let mut hex = String::with_capacity(64);
    for byte in hasher.finalize().iter() {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Runs up to `t_max` iterations.
pub fn run(data: &Dataset, pool: &DichotomyPool, t_max: usize) -> Result<(BoostState, Trace)> {
    run_with(data, pool, RunOptions::new(t_max), |_, _| {})
}

/// Runs with options, calling `observe` after every completed iteration.
///
/// Weak-learning and perfect-hypothesis halts end the run normally and are
/// recorded in [`Trace::halt`]; only invalid input and numerical drift are
/// errors.
pub fn run_with<F>(
    data: &Dataset,
    pool: &DichotomyPool,
    options: RunOptions,
    mut observe: F,
) -> Result<(BoostState, Trace)>
where
    F: FnMut(&BoostState, &IterationRecord),
{
    if options.t_max == 0 {
        return Err(Error::ZeroIterations);
    }
    if pool.n() != data.n() {
        return Err(Error::DimensionMismatch {
            what: "pool width vs. dataset size",
            expected: data.n(),
            found: pool.n(),
        });
    }
    let mut state = init_state(data.n())?;
    let mut trace = Trace {
        header: TraceHeader {
            n: data.n(),
            m: pool.m(),
            dataset_digest: input_digest(data, pool),
            config: TraceConfig {
                t_max: options.t_max,
                hypotheses: pool.source(),
                emit_weights: options.emit_weights,
            },
        },
        records: Vec::with_capacity(options.t_max.min(1 << 20)),
        weights: Vec::new(),
        halt: None,
    };

    while state.t < options.t_max {
        let (j, edge) = match select_edge(&state, pool) {
            Ok(sel) => sel,
            Err(Error::WeakLearningViolation { .. }) => {
                trace.halt = Some(Halt::WeakLearningViolation);
                return Ok((state, trace));
            }
            Err(Error::PerfectHypothesis { .. }) => {
                trace.halt = Some(Halt::PerfectHypothesis);
                return Ok((state, trace));
            }
            Err(e) => return Err(e),
        };
        let (alpha, log_z) = edge_to_coefficients(edge)?;
        if options.emit_weights {
            trace.weights.push(state.weights());
        }
        let record = IterationRecord { t: state.t, selected: j, edge, alpha, log_z };
        apply_update(&mut state, pool, j, alpha, log_z)?;
        trace.records.push(record);
        observe(&state, &record);
    }
    trace.halt = Some(Halt::TMax);
    Ok((state, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const LN2: f64 = core::f64::consts::LN_2;

    fn toy() -> (Dataset, DichotomyPool) {
        let data =
            Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1.0; 3]).unwrap();
        let pool = DichotomyPool::from_rows(&[vec![1, 1, -1], vec![1, -1, 1]], &data).unwrap();
        (data, pool)
    }

    fn state_with_weights(w: &[f64]) -> BoostState {
        let mut s = init_state(w.len()).unwrap();
        s.log_weights = w.iter().map(|&x| x.ln()).collect();
        s
    }

    #[test]
    fn init_is_uniform() {
        let s = init_state(4).unwrap();
        for &l in s.log_weights() {
            assert!((l - (-1.3862943611198906)).abs() < 1e-15);
        }
        assert_eq!(init_state(2).unwrap().weights(), vec![0.5, 0.5]);
        assert_eq!(init_state(1).unwrap_err(), Error::TooFewExamples { n: 1 });
        assert_eq!(s.total_alpha(), 0.0);
        assert_eq!(s.alpha_by_dichotomy().count(), 0);
    }

    #[test]
    fn select_edge_breaks_ties_low() {
        let (_, pool) = toy();
        let (j, r) = select_edge(&init_state(3).unwrap(), &pool).unwrap();
        assert_eq!(j, 0);
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn select_edge_prefers_larger_edge() {
        let (_, pool) = toy();
        let (j, r) = select_edge(&state_with_weights(&[0.25, 0.25, 0.5]), &pool).unwrap();
        assert_eq!(j, 1);
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_edges_violate_weak_learning() {
        let data = Dataset::from_rows(vec![vec![0.0], vec![1.0]], vec![1.0, 1.0]).unwrap();
        let pool = DichotomyPool::from_rows(&[vec![1, -1], vec![-1, 1]], &data).unwrap();
        assert!(matches!(
            select_edge(&init_state(2).unwrap(), &pool),
            Err(Error::WeakLearningViolation { t: 0, .. })
        ));
    }

    #[test]
    fn coefficients_closed_form() {
        let (a, z) = edge_to_coefficients(0.5).unwrap();
        assert!((a - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!((z - 0.5 * 0.75f64.ln()).abs() < 1e-15);
        let (a, z) = edge_to_coefficients(1.0 / 3.0).unwrap();
        assert!((a - 0.5 * LN2).abs() < 1e-15);
        assert!((z - 0.5 * (8.0f64 / 9.0).ln()).abs() < 1e-15);
        let (a, z) = edge_to_coefficients(1e-300).unwrap();
        assert!(a > 0.0 && z <= 0.0);
        for bad in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(edge_to_coefficients(bad), Err(Error::EdgeDomain { .. })));
        }
    }

    #[test]
    fn single_update_matches_hand_values() {
        let (_, pool) = toy();
        let mut s = init_state(3).unwrap();
        let (alpha, log_z) = edge_to_coefficients(1.0 / 3.0).unwrap();
        let direct = apply_update(&mut s, &pool, 0, alpha, log_z).unwrap();
        assert!((direct - (2.0 * 2f64.sqrt() / 3.0).ln()).abs() < 1e-15);
        let w = s.weights();
        for (got, want) in w.iter().zip([0.25, 0.25, 0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let half_ln2 = 0.5 * LN2;
        for (got, want) in s.margins().iter().zip([half_ln2, half_ln2, -half_ln2]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(s.t(), 1);
    }

    #[test]
    fn inconsistent_log_z_is_drift_and_leaves_state() {
        let (_, pool) = toy();
        let mut s = init_state(3).unwrap();
        let before = s.clone();
        let (alpha, log_z) = edge_to_coefficients(1.0 / 3.0).unwrap();
        let err = apply_update(&mut s, &pool, 0, alpha, log_z + 1e-6).unwrap_err();
        assert!(matches!(err, Error::NumericalDrift { t: 0, .. }));
        assert_eq!(s, before);
    }

    #[test]
    fn two_iterations_on_toy() {
        let (data, pool) = toy();
        let (s, trace) = run(&data, &pool, 2).unwrap();
        assert_eq!(trace.halt, Some(Halt::TMax));
        let sel: Vec<usize> = trace.records.iter().map(|r| r.selected).collect();
        assert_eq!(sel, vec![0, 1]);
        let want = [0.5 * 6f64.ln(), 0.5 * (2.0f64 / 3.0).ln(), 0.5 * 1.5f64.ln()];
        for (got, want) in s.margins().iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_row_halts_at_start() {
        let (data, _) = toy();
        let pool = DichotomyPool::from_rows(&[vec![1, -1, 1], vec![1, 1, 1]], &data).unwrap();
        let (s, trace) = run(&data, &pool, 10).unwrap();
        assert_eq!(trace.halt, Some(Halt::PerfectHypothesis));
        assert!(trace.records.is_empty());
        assert_eq!(s.t(), 0);
        assert_eq!(run(&data, &pool, 0).unwrap_err(), Error::ZeroIterations);
    }

    #[test]
    fn emitted_weights_are_pre_update() {
        let (data, pool) = toy();
        let opts = RunOptions { t_max: 2, emit_weights: true };
        let (_, trace) = run_with(&data, &pool, opts, |_, _| {}).unwrap();
        assert_eq!(trace.weights.len(), 2);
        assert!((trace.weights[1][2] - 0.5).abs() < 1e-15);
    }
}
