//! Graph similarity measures and temporal anomaly detection for evolving
//! network graphs.
//!
//! The crate provides:
//! - [`graph`]: simple undirected graphs, degree statistics, and the
//!   complementary cumulative degree histogram (ccdh);
//! - [`similarity`]: Relative Hausdorff distance, Kolmogorov-Smirnov distance
//!   and test, and aligned edit distance;
//! - [`hlm`]: Chung-Lu sampling, Markovian edge-resampling evolution, weight
//!   families, planted anomalies, and scenario simulation;
//! - [`scoring`]: empirical distributions, anomaly scores, ROC-like curves,
//!   the normal approximation for edge flips, and temporal profile scoring;
//! - [`ingest`]: event-log parsing, sliding-window graph sequences, and the
//!   before/after change-point experiment.

pub mod graph;
pub mod hlm;
pub mod ingest;
pub mod rng;
pub mod scoring;
pub mod similarity;
