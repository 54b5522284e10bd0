//! Trace certification by replay.
//!
//! [`verify_replay`] reruns the boosting loop against the same dataset and
//! pool, compares every recorded field with the replay, and evaluates each
//! identity and bound at every iteration. Recorded coefficients and replayed
//! state are deliberately mixed: the information identity uses the recorded
//! closed-form `log Z_k` against the replayed weights and margins, and the
//! Cauchy bounds use the recorded coefficients against replayed normalized
//! margins.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::analytics::{detect_support_vectors, support_set_stable, History, SvParams};
use crate::booster::{
    apply_update, edge_to_coefficients, init_state, input_digest, select_edge, Halt, Trace,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hypothesis::DichotomyPool;
use crate::numeric::{exp, ln, logsumexp, CompensatedSum};

pub const IDENTITY_TOLERANCE: f64 = 1e-9;
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

/// Where the worst case of a check occurred: iteration index and, when the
/// check is per example or per pool row, that index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub t: usize,
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Largest violation measure seen; the check fails iff it exceeds
    /// `tolerance`. For inequalities this is the signed excess, so a passing
    /// check can report a negative value.
    pub worst_violation: f64,
    pub tolerance: f64,
    pub location: Option<Location>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub lags: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { lags: vec![1, 10, 100] }
    }
}

struct Check {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    location: Option<Location>,
    evaluated: bool,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check { name, tolerance, worst: f64::NEG_INFINITY, location: None, evaluated: false }
    }

    fn observe(&mut self, violation: f64, t: usize, index: Option<usize>) {
        self.evaluated = true;
        // NaN counts as the worst possible violation.
        let violation = if violation.is_nan() { f64::INFINITY } else { violation };
        if violation > self.worst || self.location.is_none() {
            self.worst = violation;
            self.location = Some(Location { t, index });
        }
    }

    fn finish(self) -> CheckResult {
        let status = if !self.evaluated {
            CheckStatus::Skipped
        } else if self.worst > self.tolerance {
            CheckStatus::Fail
        } else {
            CheckStatus::Pass
        };
        CheckResult {
            name: self.name,
            status,
            worst_violation: if self.evaluated { self.worst } else { 0.0 },
            tolerance: self.tolerance,
            location: self.location,
        }
    }
}

/// Absolute difference, or a minimal positive value when the bits differ but
/// the values compare equal (signed zeros).
fn bit_delta(recorded: f64, replayed: f64) -> f64 {
    if recorded.to_bits() == replayed.to_bits() {
        0.0
    } else {
        let d = (recorded - replayed).abs();
        if d > 0.0 {
            d
        } else {
            f64::MIN_POSITIVE
        }
    }
}

struct Checkpoint {
    normalized_margins: Vec<f64>,
    lambda: BTreeMap<usize, f64>,
    alpha_prefix: f64,
}

/// Replays `trace` against `data` and `pool` and evaluates every check.
///
/// Fails outright only when the trace does not belong to these inputs
/// ([`Error::DigestMismatch`]) or has no halt record
/// ([`Error::TruncatedTrace`]); everything else is reported per check.
pub fn verify_replay(
    trace: &Trace,
    data: &Dataset,
    pool: &DichotomyPool,
    config: &VerifyConfig,
) -> Result<Vec<CheckResult>> {
    let digest = input_digest(data, pool);
    if digest != trace.header.dataset_digest {
        return Err(Error::DigestMismatch {
            expected: digest,
            found: trace.header.dataset_digest.clone(),
        });
    }
    let halt = trace.halt.ok_or(Error::TruncatedTrace)?;
    let n = data.n();
    let ln_n = ln(n as f64);

    let mut header = Check::new("header_dimensions", 0.0);
    header.observe(
        if trace.header.n == n && trace.header.m == pool.m() { 0.0 } else { 1.0 },
        0,
        None,
    );
    let mut sequence = Check::new("record_sequence", 0.0);
    let mut replay = Check::new("replay_records", IDENTITY_TOLERANCE);
    let mut bit_exact = Check::new("replay_bit_exact", 0.0);
    let mut weights_check = Check::new("replay_weights", IDENTITY_TOLERANCE);
    let mut closed_form = Check::new("record_closed_forms", IDENTITY_TOLERANCE);
    let mut positivity = Check::new("record_positivity", 0.0);
    let mut partition = Check::new("partition_closed_form", IDENTITY_TOLERANCE);
    let mut information = Check::new("information_identity", IDENTITY_TOLERANCE);
    let mut normalization = Check::new("weight_normalization", SIMPLEX_TOLERANCE);
    let mut lower = Check::new("entropy_bound_lower", INEQUALITY_SLACK);
    let mut upper = Check::new("entropy_bound_upper", INEQUALITY_SLACK);
    let mut entropy_identity = Check::new("entropy_identity", IDENTITY_TOLERANCE);
    let mut envelope = Check::new("expected_margin_envelope", INEQUALITY_SLACK);
    let mut range = Check::new("normalized_margin_range", INEQUALITY_SLACK);
    let mut beta = Check::new("beta_identities", SIMPLEX_TOLERANCE);
    let mut lambda_simplex = Check::new("lambda_simplex", SIMPLEX_TOLERANCE);
    let mut cauchy_margin = Check::new("cauchy_margin_gaps", INEQUALITY_SLACK);
    let mut cauchy_lambda = Check::new("cauchy_lambda_gaps", INEQUALITY_SLACK);
    let mut halt_check = Check::new("halt_consistency", 0.0);

    let max_lag = config.lags.iter().copied().max().unwrap_or(0);
    let mut ring: VecDeque<Checkpoint> = VecDeque::with_capacity(max_lag + 1);
    let mut state = init_state(n)?;
    let mut log_z_sum = CompensatedSum::ZERO;
    let mut alpha_prefix = CompensatedSum::ZERO;
    let mut ratio_num = CompensatedSum::ZERO;
    let mut ratio_den = CompensatedSum::ZERO;
    let mut diverged = false;

    for (k, rec) in trace.records.iter().enumerate() {
        sequence.observe(if rec.t == k { 0.0 } else { 1.0 }, k, None);

        match rec.closed_form_deviation() {
            Some(dev) => closed_form.observe(dev, k, None),
            None => closed_form.observe(f64::INFINITY, k, None),
        }
        let positive = rec.edge > 0.0 && rec.edge < 1.0 && rec.alpha > 0.0 && rec.log_z < 0.0;
        positivity.observe(if positive { 0.0 } else { 1.0 }, k, None);

        let (j, edge) = match select_edge(&state, pool) {
            Ok(sel) => sel,
            Err(_) => {
                replay.observe(f64::INFINITY, k, None);
                bit_exact.observe(f64::INFINITY, k, None);
                diverged = true;
                break;
            }
        };
        let (alpha, log_z) = edge_to_coefficients(edge)?;
        let field_delta = [(rec.edge, edge), (rec.alpha, alpha), (rec.log_z, log_z)];
        let mut worst = field_delta.iter().map(|&(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let mut bits = field_delta.iter().map(|&(a, b)| bit_delta(a, b)).fold(0.0, f64::max);
        if rec.selected != j {
            worst = f64::INFINITY;
            bits = f64::INFINITY;
        }
        if trace.header.config.emit_weights {
            match trace.weights.get(k) {
                Some(recorded) if recorded.len() == n => {
                    let replayed = state.weights();
                    for (i, (&a, &b)) in recorded.iter().zip(&replayed).enumerate() {
                        weights_check.observe((a - b).abs(), k, Some(i));
                        bits = bits.max(bit_delta(a, b));
                    }
                }
                _ => weights_check.observe(f64::INFINITY, k, None),
            }
        }
        replay.observe(worst, k, None);
        bit_exact.observe(bits, k, None);

        let direct = match apply_update(&mut state, pool, j, alpha, log_z) {
            Ok(direct) => direct,
            Err(Error::NumericalDrift { direct, .. }) => {
                partition.observe((direct - rec.log_z).abs(), k, None);
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        partition.observe((rec.log_z - direct).abs(), k, None);

        log_z_sum.add(rec.log_z);
        alpha_prefix.add(rec.alpha);
        ratio_num.add(-2.0 * rec.log_z);
        ratio_den.add(2.0 * rec.alpha);
        let sum_log_z = log_z_sum.value();

        let margins = state.margins();
        let log_weights = state.log_weights();
        normalization.observe(logsumexp(log_weights).abs(), k, None);
        let mut expected = CompensatedSum::ZERO;
        let mut entropy = CompensatedSum::ZERO;
        for (i, (&l, &mar)) in log_weights.iter().zip(&margins).enumerate() {
            information.observe((-l - (ln_n + mar + sum_log_z)).abs(), k, Some(i));
            let w = exp(l);
            expected.add(w * mar);
            if w > 0.0 {
                entropy.add(-w * l);
            }
        }
        let expected = expected.value();
        let entropy = entropy.value();
        lower.observe((-ln_n - sum_log_z) - expected, k, None);
        upper.observe(expected - (-sum_log_z), k, None);
        entropy_identity.observe((entropy - (ln_n + expected + sum_log_z)).abs(), k, None);

        let a = state.total_alpha();
        let ratio = ratio_num.value() / ratio_den.value();
        let gap = ratio - expected / a;
        envelope.observe((-gap).max(gap - ln_n / a), k, None);
        range.observe(if ratio > 0.0 && ratio < 1.0 { f64::NEG_INFINITY } else { 1.0 }, k, None);

        let normalized = state.normalized_margins();
        for (i, &nm) in normalized.iter().enumerate() {
            range.observe(nm.abs() - 1.0, k, Some(i));
            let plus = state.beta_plus(i);
            let minus = state.beta_minus(i);
            let (plus_n, minus_n) = (plus / a, minus / a);
            let (split, margin) = state.beta_residuals(i);
            let worst = [
                split.abs(),
                margin.abs(),
                (plus_n + minus_n - 1.0).abs(),
                (plus_n - minus_n - nm).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            beta.observe(worst, k, Some(i));
        }

        let lambda: BTreeMap<usize, f64> =
            state.alpha_by_dichotomy().map(|(j, s)| (j, s / a)).collect();
        let mut lambda_sum = 0.0;
        let mut alpha_sum = CompensatedSum::ZERO;
        for (j, s) in state.alpha_by_dichotomy() {
            alpha_sum.add(s);
            let l = lambda[&j];
            lambda_sum += l;
            lambda_simplex.observe(-l, k, Some(j));
        }
        lambda_simplex.observe((lambda_sum - 1.0).abs(), k, None);
        lambda_simplex.observe((alpha_sum.value() - a).abs() / a, k, None);

        let prefix = alpha_prefix.value();
        let current = Checkpoint { normalized_margins: normalized, lambda, alpha_prefix: prefix };
        for &lag in &config.lags {
            if lag == 0 || lag > ring.len() {
                continue;
            }
            let early = &ring[ring.len() - lag];
            let bound = 2.0 * (prefix - early.alpha_prefix) / prefix;
            for (i, (&a0, &a1)) in
                early.normalized_margins.iter().zip(&current.normalized_margins).enumerate()
            {
                cauchy_margin.observe((a0 - a1).abs() - bound, k, Some(i));
            }
            let rows: BTreeSet<usize> =
                early.lambda.keys().chain(current.lambda.keys()).copied().collect();
            for j in rows {
                let l0 = early.lambda.get(&j).copied().unwrap_or(0.0);
                let l1 = current.lambda.get(&j).copied().unwrap_or(0.0);
                cauchy_lambda.observe((l0 - l1).abs() - bound, k, Some(j));
            }
        }
        if max_lag > 0 {
            if ring.len() == max_lag {
                ring.pop_front();
            }
            ring.push_back(current);
        }
    }

    let t_end = trace.records.len();
    if diverged {
        halt_check.observe(1.0, t_end, None);
    } else {
        let consistent = match halt {
            Halt::TMax => t_end == trace.header.config.t_max,
            Halt::WeakLearningViolation => matches!(
                select_edge(&state, pool),
                Err(Error::WeakLearningViolation { .. })
            ),
            Halt::PerfectHypothesis => {
                matches!(select_edge(&state, pool), Err(Error::PerfectHypothesis { .. }))
            }
        };
        halt_check.observe(if consistent { 0.0 } else { 1.0 }, t_end, None);
    }

    Ok([
        header,
        sequence,
        replay,
        bit_exact,
        weights_check,
        closed_form,
        positivity,
        partition,
        information,
        normalization,
        lower,
        upper,
        entropy_identity,
        envelope,
        range,
        beta,
        lambda_simplex,
        cauchy_margin,
        cauchy_lambda,
        halt_check,
    ]
    .into_iter()
    .map(Check::finish)
    .collect())
}

/// Empirical convergence certificate over the trailing `sv.window` snapshots.
///
/// Passes iff every normalized margin moved by at most `tol` across the
/// window, the per-checkpoint min-margin set did not change, and that set has
/// at least two members. Runs that did not reach `t_max` are skipped.
pub fn certify_convergence(
    trace: &Trace,
    history: &History,
    tol: f64,
    sv: &SvParams,
) -> Result<CheckResult> {
    let last_t = history.snapshots.last().map_or(0, |s| s.t);
    if trace.halt != Some(Halt::TMax) {
        return Ok(CheckResult {
            name: "convergence",
            status: CheckStatus::Skipped,
            worst_violation: 0.0,
            tolerance: tol,
            location: None,
        });
    }
    let margins = history.normalized_margins();
    let support = detect_support_vectors(&margins, sv.window, sv.delta)?;
    let stable = support_set_stable(&margins, sv.window, sv.delta)?;
    let first = margins[margins.len() - sv.window];
    let last = margins[margins.len() - 1];
    let (drift, at) = first
        .iter()
        .zip(last)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0.0, 0), |best, (i, d)| if d > best.0 { (d, i) } else { best });

    let structural_ok = stable && support.len() >= 2;
    let worst_violation = if structural_ok { drift } else { f64::INFINITY };
    Ok(CheckResult {
        name: "convergence",
        status: if structural_ok && drift <= tol { CheckStatus::Pass } else { CheckStatus::Fail },
        worst_violation,
        tolerance: tol,
        location: Some(Location { t: last_t, index: Some(at) }),
    })
}
