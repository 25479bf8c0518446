//! Column-matrix arithmetic and truncated SVD kernels.

pub mod dense;
mod incremental;
mod matrix;
mod svd;

pub use incremental::{incremental_svd_update, IncrementalSvd};
pub use matrix::{ColumnMatrix, SparseBuilder, SparseColumns};
pub use svd::{project, truncated_svd, SvdParams, TruncatedSvd, RANK_TOLERANCE};

/// Euclidean distance between two equal-length slices.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
