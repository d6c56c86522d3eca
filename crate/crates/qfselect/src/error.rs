//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by dataset ingestion, configuration, training and the
/// island runtime.
#[derive(Debug, Error)]
pub enum Error {
    /// The chaotic seed lands on a fixed point of the logistic map and the
    /// orbit would never leave it.
    #[error("degenerate chaotic seed {0}: the orbit collapses to a fixed point")]
    DegenerateSeed(f64),

    /// Invalid configuration value or combination.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A dataset file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A label outside {0, 1} (or the remappable {-1, +1}) was encountered.
    #[error("label {0} is outside the binary domain {{0, 1}} / {{-1, +1}}")]
    LabelDomain(f64),

    /// A class does not have enough samples for the requested split or
    /// island count.
    #[error("class {class} has {available} samples, need at least {required}")]
    TooFewSamplesPerClass {
        class: u8,
        available: usize,
        required: usize,
    },

    /// A training partition contains a single class; the classifier cannot
    /// be fitted.
    #[error("training partition contains a single class")]
    SingleClassPartition,

    /// Metric evaluation received labels of a single class.
    #[error("labels contain a single class; sensitivity/specificity undefined")]
    SingleClassLabels,

    /// A feature mask selects no features.
    #[error("feature mask selects no features")]
    NoFeatures,

    /// A solution was used where an evaluated fitness is required.
    #[error("solution {0} has no evaluated fitness")]
    UnevaluatedSolution(u64),

    /// Model feature indices do not fit the dataset.
    #[error("model feature indices exceed the dataset dimension")]
    DimensionMismatch,

    /// Invalid statistical-test input.
    #[error("invalid statistics input: {0}")]
    Stats(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
