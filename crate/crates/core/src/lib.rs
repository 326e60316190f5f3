//! Learn the structure of undirected graphs from i.i.d. samples by
//! thresholding partial correlations derived from the inverse of the
//! pairwise distance-correlation matrix.
//!
//! Pipeline: [`estimator::dcor_matrix`] → [`estimator::invert`] →
//! [`estimator::partial_correlations`] → [`estimator::threshold_graph`] or
//! [`estimator::threshold_for_edge_count`].

pub mod dataset;
pub mod dcor;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod linalg;
pub mod pipeline;
pub mod random_graphs;

pub use dataset::Dataset;
pub use dcor::{dcor, dcor_fast, DCovResult, Sample};
pub use error::{Error, ErrorKind, Result};
pub use estimator::{
    dcor_matrix, estimate, estimation_path, invert, partial_correlations, threshold_for_edge_count,
    threshold_graph, DCorMatrix, Estimate, PartialCorrMatrix, RidgeConfig, ThresholdPath,
};
pub use graph::{hamming_distance, Adjacency};
pub use linalg::{log_det, LogDet};
