//! Optimal AdaBoost over an explicit finite pool of dichotomies.
//!
//! The crate is `no_std` (it needs `alloc`). It covers the boosting loop
//! itself, the per-iteration trace, and the margin quantities that can be
//! derived from a run: normalized margins, entropy bounds on the expected
//! margin, the asymptotic edge ratio, coefficient shares per dichotomy,
//! per-example coefficient splits and support-vector detection. The
//! [`verify`] module replays a trace and checks every identity and bound
//! against it.
//!
//! File formats, the CLI and the digest-bound trace files live in the
//! `optboost` companion crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytics;
pub mod booster;
pub mod dataset;
pub mod error;
pub mod hypothesis;
pub mod numeric;
pub mod verify;

pub use analytics::{
    analyze, convergence_gaps, detect_support_vectors, detect_support_vectors_by_weight,
    entropy, expected_margin_gap, AnalyticsReport, Cadence, GapEntry, GapReport, History,
    IterationStats, Recorder, Snapshot, SvParams,
};
pub use booster::{
    apply_update, edge_to_coefficients, init_state, run, run_with, select_edge, BoostState,
    Halt, IterationRecord, RunOptions, Trace, TraceConfig, TraceHeader,
};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use hypothesis::{enumerate_stumps, DichotomyPool, HypothesisId, HypothesisSource};
pub use verify::{certify_convergence, verify_replay, CheckResult, CheckStatus, VerifyConfig};
