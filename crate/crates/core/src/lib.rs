//! Backprop-free embedding toolkit.
//!
//! Raw encodings are collected as columns of a matrix, factorized with a
//! randomized truncated SVD and projected onto the leading left singular
//! vectors ([`embedding`]). Variable-length sequences are first folded into a
//! fixed number of cosine spectral coefficients ([`spectral`]). Embeddings are
//! indexed by a recursive hyperplane partition for exact nearest-neighbour
//! queries ([`partition`]), and [`supervised`] learns per-cell linear maps in
//! a joint input/target embedding space.

pub mod embedding;
pub mod error;
pub mod linalg;
pub mod partition;
pub mod pipelines;
pub mod spectral;
pub mod supervised;

pub use embedding::EmbeddingModel;
pub use error::{Error, Result};
pub use linalg::{ColumnMatrix, SparseColumns, SvdParams, TruncatedSvd};
pub use partition::{Cell, PartitionTree};
pub use spectral::{SpectralConfig, VectorSequence};
pub use supervised::SupervisedModel;
