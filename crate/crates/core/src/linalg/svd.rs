use nalgebra::{DMatrix, DVector, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::ColumnMatrix;
use crate::error::{param_err, Error, Result};

/// Singular values below this fraction of the largest are discarded.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Randomized range-finder settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvdParams {
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl Default for SvdParams {
    fn default() -> Self {
        Self {
            oversample: 10,
            power_iters: 2,
            seed: 42,
        }
    }
}

impl SvdParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Rank-`k` factorization `u · diag(sigma) · vt`.
///
/// `u` has orthonormal columns, `sigma` is non-increasing and the largest
/// entry of every `u` column is non-negative (lowest row wins ties).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub vt: Option<DMatrix<f64>>,
}

impl TruncatedSvd {
    /// Rank-0 state over `rows`-dimensional columns, the starting point for
    /// incremental updates.
    pub fn empty(rows: usize) -> Self {
        Self {
            u: DMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            vt: Some(DMatrix::zeros(0, 0)),
        }
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn rows(&self) -> usize {
        self.u.nrows()
    }

    /// Number of data columns described by `vt`, if present.
    pub fn data_cols(&self) -> Option<usize> {
        self.vt.as_ref().map(|v| v.ncols())
    }

    /// `u · diag(sigma) · vt`; `None` when `vt` was not kept.
    pub fn reconstruct(&self) -> Option<DMatrix<f64>> {
        let vt = self.vt.as_ref()?;
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        Some(us * vt)
    }

    /// Max-norm of `uᵀu − I`.
    pub fn orthonormality_error(&self) -> f64 {
        gram_error(&self.u.tr_mul(&self.u))
    }

    /// Max-norm of `vt·vtᵀ − I`.
    pub fn vt_orthonormality_error(&self) -> Option<f64> {
        self.vt.as_ref().map(|v| gram_error(&(v * v.transpose())))
    }

    /// Keeps the leading `k` triplets.
    pub fn truncate(&self, k: usize) -> TruncatedSvd {
        let k = k.min(self.k());
        TruncatedSvd {
            u: self.u.columns(0, k).into_owned(),
            sigma: self.sigma[..k].to_vec(),
            vt: self.vt.as_ref().map(|v| v.rows(0, k).into_owned()),
        }
    }

    /// `uᵀ x`.
    pub fn project(&self, x: &ColumnMatrix) -> Result<DMatrix<f64>> {
        project(&self.u, x)
    }
}

pub(crate) fn gram_error(g: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..g.ncols() {
        for i in 0..g.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Randomized truncated SVD (Gaussian range finder with power iterations).
///
/// The sketch width is `k + oversample`, clipped to `min(rows, cols)`; at the
/// clip the sketch spans the full range and the result is exact up to
/// rounding. Output rank drops below `k` when trailing singular values fall
/// under [`RANK_TOLERANCE`] relative to the largest.
pub fn truncated_svd(x: &ColumnMatrix, k: usize, params: &SvdParams) -> Result<TruncatedSvd> {
    let (m, n) = (x.rows(), x.cols());
    if k == 0 || k > m.min(n) {
        return Err(param_err!("rank k={k} must be in 1..={}", m.min(n)));
    }
    x.check_finite()?;

    let width = (k + params.oversample).min(m.min(n));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let omega = DMatrix::from_fn(n, width, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z
    });

    let mut q = orthonormal_basis(x.mul_dense(&omega));
    for _ in 0..params.power_iters {
        let w = orthonormal_basis(x.tr_mul_dense(&q));
        q = orthonormal_basis(x.mul_dense(&w));
    }

    // B = Qᵀ X, formed as (Xᵀ Q)ᵀ so sparse input never densifies.
    let b = x.tr_mul_dense(&q).transpose();
    let svd = SVD::new(b, true, true);
    let ub = svd
        .u
        .ok_or_else(|| Error::Numeric("inner SVD returned no left vectors".into()))?;
    let vt = svd
        .v_t
        .ok_or_else(|| Error::Numeric("inner SVD returned no right vectors".into()))?;
    let u = q * ub;
    Ok(canonicalize(u, svd.singular_values, Some(vt), k))
}

/// Thin QR `Q` factor of `y`.
pub(crate) fn orthonormal_basis(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Sorts, truncates to `k` (and to the numerical rank) and fixes signs.
pub(crate) fn canonicalize(
    u: DMatrix<f64>,
    sigma: DVector<f64>,
    vt: Option<DMatrix<f64>>,
    k: usize,
) -> TruncatedSvd {
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let top = order.first().map(|&i| sigma[i]).unwrap_or(0.0);
    let keep: Vec<usize> = order
        .into_iter()
        .take(k)
        .filter(|&i| top > 0.0 && sigma[i] >= RANK_TOLERANCE * top)
        .collect();

    let mut out_u = DMatrix::zeros(u.nrows(), keep.len());
    let mut out_vt = vt.as_ref().map(|v| DMatrix::zeros(keep.len(), v.ncols()));
    let mut out_sigma = Vec::with_capacity(keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        let col = u.column(src);
        let sign = if col[pivot_row(col.as_slice())] < 0.0 {
            -1.0
        } else {
            1.0
        };
        out_u.set_column(dst, &(col * sign));
        if let (Some(o), Some(v)) = (out_vt.as_mut(), vt.as_ref()) {
            o.set_row(dst, &(v.row(src) * sign));
        }
        out_sigma.push(sigma[src]);
    }
    TruncatedSvd {
        u: out_u,
        sigma: out_sigma,
        vt: out_vt,
    }
}

/// Index of the entry with the largest magnitude, lowest index on ties.
fn pivot_row(col: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > col[best].abs() {
            best = i;
        }
    }
    best
}

/// Coordinates of the columns of `x` on an orthonormal basis: `basisᵀ x`.
pub fn project(basis: &DMatrix<f64>, x: &ColumnMatrix) -> Result<DMatrix<f64>> {
    if basis.nrows() != x.rows() {
        return Err(param_err!(
            "basis has {} rows but data has {}",
            basis.nrows(),
            x.rows()
        ));
    }
    Ok(match x {
        ColumnMatrix::Dense(m) => basis.tr_mul(m),
        ColumnMatrix::Sparse(_) => x.tr_mul_dense(basis).transpose(),
    })
}
