//! Chaotic, quantum-inspired binary differential evolution for wrapper
//! feature subset selection.
//!
//! The crate searches for small, high-AUC feature subsets by evolving a
//! population of candidate masks. Solutions can be encoded directly as bit
//! vectors (classical binary DE) or as per-feature amplitude pairs that are
//! *collapsed* into bits before each evaluation. Three ideas stack on top of
//! the quantum encoding:
//!
//! * **threshold-gated collapse** — a second gate draw caps the expected
//!   subset size, keeping cardinality low in high dimensions;
//! * **chaotic initialization** — amplitudes are seeded from a logistic-map
//!   stream, optionally burned in for 5000 steps so the stream operates in
//!   its fully chaotic regime (checked by a Lyapunov-exponent estimate);
//! * **lasso pruning** — the wrapped classifier can be L1-regularized, and
//!   features whose coefficients shrink to zero are dropped from the mask.
//!
//! Fitness is the balanced AUC of a logistic-regression classifier trained
//! on the masked columns. Populations evolve on data *islands*: disjoint
//! stratified partitions of the training rows, each evolving independently
//! between driver-side migration barriers that pool, sort, and truncate.
//!
//! ```
//! use qfselect::config::{AlgorithmConfig, ClassifierKind, Variant};
//! use qfselect::dataset::{generate_synthetic_dataset, stratified_split};
//! use qfselect::island::run_single;
//!
//! let synthetic = generate_synthetic_dataset(120, 16, 3, 0.0, 7).unwrap();
//! let (train, test) = stratified_split(&synthetic.data, 0.8, 7).unwrap();
//! let config = AlgorithmConfig {
//!     variant: Variant::ClqbdeII,
//!     classifier: ClassifierKind::Llr,
//!     pop_size: 10,
//!     local_pop: 5,
//!     max_generations: 4,
//!     islands: 2,
//!     theta: 0.3,
//!     ..AlgorithmConfig::default()
//! };
//! let outcome = run_single(&config, &synthetic.data, &train, &test, 7).unwrap();
//! let top = outcome.top_outcome();
//! assert!(top.test_auc > 0.5);
//! assert!(top.cardinality >= 1);
//! ```
//!
//! The `book/` directory of the repository walks through each building
//! block; its code snippets compile and run as doctests of this crate.

pub mod chaos;
pub mod classifier;
pub mod config;
pub mod dataset;
pub mod de;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod island;
pub mod quantum;
pub mod stats;

pub mod diagnostics;

pub use config::{AlgorithmConfig, ClassifierKind, ExperimentConfig, Variant};
pub use error::{Error, Result};

// Book chapters double as doctests so the guide can never drift from the
// API. Fences marked `text`/`toml` are prose, everything else must compile
// and pass.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/chaotic-streams.md")]
    mod chaotic_streams {}
    #[doc = include_str!("../../../book/src/quantum-encoding.md")]
    mod quantum_encoding {}
    #[doc = include_str!("../../../book/src/evolution-operators.md")]
    mod evolution_operators {}
    #[doc = include_str!("../../../book/src/classifiers.md")]
    mod classifiers {}
    #[doc = include_str!("../../../book/src/variants.md")]
    mod variants {}
    #[doc = include_str!("../../../book/src/islands.md")]
    mod islands {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
