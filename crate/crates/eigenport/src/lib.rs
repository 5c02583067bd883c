//! Spectral graph embeddings through ramified optimal transport.
//!
//! The pipeline turns a graph into a low-dimensional portrait of its Laplacian
//! eigenvectors:
//!
//! 1. [`spectral`] computes Laplacian eigenpairs (or closed forms for paths and
//!    grids).
//! 2. [`pmf`] converts each eigenvector into a probability mass function over
//!    the nodes.
//! 3. [`transport`] solves a balance-equation linear program between every pair
//!    of mass functions and scores the optimal flow with a concave cost
//!    `M_alpha = sum flow(e)^alpha * length(e)`, yielding a distance matrix.
//! 4. [`embedding`] embeds that matrix with classical multidimensional scaling.
//! 5. [`pipeline`] wires the stages together and exports CSV/SVG/JSON outputs
//!    for the `eigenport` command line tool.
//!
//! All stages are deterministic: identical inputs produce byte-identical
//! exports regardless of thread count.

pub mod embedding;
pub mod graph;
pub mod pipeline;
pub mod pmf;
pub mod spectral;
pub mod svg;
pub mod transport;

mod util;

pub use graph::{BidirectedIncidence, Graph};
pub use pipeline::{run_pipeline, RunConfig, RunManifest, RunOutcome};
