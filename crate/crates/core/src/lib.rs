//! Random line graphs of stochastic block models: spectra, block
//! projections, edge embeddings and clustering.

pub mod cluster;
pub mod damped_binomial;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod line_graph;
pub mod linalg;
pub mod partition;
pub mod rng;
pub mod spectral;

pub use cluster::Clustering;
pub use embedding::{EmbeddingMode, EmbeddingResult};
pub use error::{Result, RlgError};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentKind};
pub use graph::{edge_index, pair_count, pair_of, sample_sbm, Graph, IncidenceMatrix, SbmModel};
pub use partition::{InducedEdgePartition, VertexPartition};
pub use rng::{derive_seed, rng_from_seed, Purpose};
