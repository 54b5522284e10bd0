use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A label that is not exactly +1 or -1.
    Label { row: usize, value: f64 },
    /// Fewer than two examples.
    EmptyDataset { n: usize },
    NoFeatures,
    NonFiniteFeature { row: usize, col: usize },
    /// Rows of unequal length, or a length that disagrees with the dataset.
    Shape { row: usize, expected: usize, found: usize },
    /// A dichotomy entry outside {+1, -1}.
    Entry { row: usize, col: usize, value: i64 },
    DegeneratePool,
    /// `init_state` needs at least two examples.
    TooFewExamples { n: usize },
    ZeroIterations,
    /// Edge outside the open interval (0, 1).
    EdgeDomain { edge: f64 },
    WeakLearningViolation { t: usize, edge: f64 },
    PerfectHypothesis { t: usize, j: usize, edge: f64 },
    /// The closed-form partition value and the direct log-sum-exp disagree.
    NumericalDrift { t: usize, closed_form: f64, direct: f64 },
    RowOutOfRange { j: usize, m: usize },
    NotStarted,
    InsufficientHistory { needed: usize, available: usize },
    NegativeProbability { index: usize, value: f64 },
    NotNormalized { sum: f64 },
    DigestMismatch { expected: String, found: String },
    TruncatedTrace,
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Label { row, value } => {
                write!(f, "label on row {row} is {value}, expected +1 or -1")
            }
            Error::EmptyDataset { n } => write!(f, "dataset has {n} examples, need at least 2"),
            Error::NoFeatures => f.write_str("dataset has no feature columns"),
            Error::NonFiniteFeature { row, col } => {
                write!(f, "feature at row {row}, column {col} is not finite")
            }
            Error::Shape { row, expected, found } => {
                write!(f, "row {row} has {found} entries, expected {expected}")
            }
            Error::Entry { row, col, value } => {
                write!(f, "entry {value} at row {row}, column {col} is not +1 or -1")
            }
            Error::DegeneratePool => f.write_str("hypothesis pool is empty"),
            Error::TooFewExamples { n } => write!(f, "need at least 2 examples, got {n}"),
            Error::ZeroIterations => f.write_str("iteration budget must be at least 1"),
            Error::EdgeDomain { edge } => write!(f, "edge {edge} is outside (0, 1)"),
            Error::WeakLearningViolation { t, edge } => {
                write!(f, "weak learning condition fails at t={t}: best edge {edge}")
            }
            Error::PerfectHypothesis { t, j, edge } => {
                write!(f, "dichotomy {j} is perfect at t={t} (edge {edge})")
            }
            Error::NumericalDrift { t, closed_form, direct } => write!(
                f,
                "partition drift at t={t}: closed form {closed_form}, direct {direct}"
            ),
            Error::RowOutOfRange { j, m } => write!(f, "row {j} out of range for pool of {m}"),
            Error::NotStarted => f.write_str("no boosting iteration has completed"),
            Error::InsufficientHistory { needed, available } => write!(
                f,
                "history has {available} checkpoints, {needed} needed"
            ),
            Error::NegativeProbability { index, value } => {
                write!(f, "probability {value} at index {index} is negative")
            }
            Error::NotNormalized { sum } => write!(f, "probabilities sum to {sum}, not 1"),
            Error::DigestMismatch { expected, found } => {
                write!(f, "trace digest {found} does not match inputs ({expected})")
            }
            Error::TruncatedTrace => f.write_str("trace has no halt record"),
            Error::DimensionMismatch { what, expected, found } => {
                write!(f, "{what}: expected {expected}, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}
