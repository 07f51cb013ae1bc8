//! Fuzzy label generation by cluster-weighted label propagation, and KNN
//! classifiers that learn from fuzzy labels.
//!
//! * [`dataset`]: matrix types, CSV I/O, standardization, folds.
//! * [`synthdata`]: Gaussian-cluster datasets with known fuzzy labels.
//! * [`fcm`], [`graph`], [`flgen`]: fuzzy label generation.
//! * [`classify_single`], [`classify_multi`]: the fuzzy KNN classifiers and
//!   their logical-label baselines.
//! * [`metrics`]: evaluation metrics.
//! * [`harness`]: cross-validated experiments and reports.

pub mod arff;
pub mod classify_multi;
pub mod classify_single;
pub mod dataset;
pub mod error;
pub mod fcm;
pub mod flgen;
pub mod graph;
pub mod harness;
pub mod knn;
pub mod metrics;
pub mod synthdata;

pub use dataset::{Dataset, FeatureMatrix, FoldSplit, FuzzyLabelMatrix, LabelMode, LogicalLabelMatrix};
pub use error::{Error, Result};
pub use flgen::{flgen_lp, FlGenConfig, FlGenOutput};
pub use harness::{ExperimentPlan, ExperimentReport};
