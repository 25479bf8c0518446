//! Column-incremental SVD updates.
//!
//! Given `X ≈ U Σ Vᵀ` and a batch `C`, the update factors
//! `[U Σ Vᵀ | C] = [U J] · M · blockdiag(V, I)ᵀ` where `J` spans the part of
//! `C` orthogonal to `U` and `M = [[Σ, UᵀC], [0, JᵀC]]` is small. Only the
//! current factors and the batch are touched.

use nalgebra::{DMatrix, DVector, SVD};

use super::matrix::ColumnMatrix;
use super::svd::{canonicalize, TruncatedSvd};
use crate::error::{param_err, Error, Result};

/// Relative norm under which a residual batch direction is treated as zero.
const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Rank-`k` truncated SVD of `[previous data | batch]`.
///
/// When `current.vt` is absent the result is basis-only (`vt = None`).
pub fn incremental_svd_update(
    current: &TruncatedSvd,
    batch: &ColumnMatrix,
    k: usize,
) -> Result<TruncatedSvd> {
    let m = current.rows();
    if batch.rows() != m {
        return Err(param_err!(
            "batch has {} rows but the current basis has {m}",
            batch.rows()
        ));
    }
    if k == 0 {
        return Err(param_err!("rank k must be positive"));
    }
    batch.check_finite()?;

    let r0 = current.k();
    let c = batch.cols();
    let u = &current.u;

    // L = Uᵀ C and the orthogonal residual H = C − U L, re-orthogonalized once.
    let cd = batch.to_dense();
    let mut l = u.tr_mul(&cd);
    let mut h = &cd - u * &l;
    let l2 = u.tr_mul(&h);
    h -= u * &l2;
    l += l2;

    let scale = cd.norm().max(current.sigma.first().copied().unwrap_or(0.0));
    let (j, kmat) = residual_basis(&h, u, RESIDUAL_TOLERANCE * scale);
    let r = j.ncols();

    let mut mid = DMatrix::zeros(r0 + r, r0 + c);
    for (i, s) in current.sigma.iter().enumerate() {
        mid[(i, i)] = *s;
    }
    mid.view_mut((0, r0), (r0, c)).copy_from(&l);
    if r > 0 {
        mid.view_mut((r0, r0), (r, c)).copy_from(&kmat);
    }

    let svd = SVD::new(mid, true, true);
    let um = svd
        .u
        .ok_or_else(|| Error::Numeric("update SVD returned no left vectors".into()))?;
    let vmt = svd
        .v_t
        .ok_or_else(|| Error::Numeric("update SVD returned no right vectors".into()))?;

    let mut basis = DMatrix::zeros(m, r0 + r);
    basis.view_mut((0, 0), (m, r0)).copy_from(u);
    if r > 0 {
        basis.view_mut((0, r0), (m, r)).copy_from(&j);
    }
    let new_u = basis * um;

    let new_vt = current.vt.as_ref().map(|vt| {
        let n_prev = vt.ncols();
        let mut out = DMatrix::zeros(vmt.nrows(), n_prev + c);
        if r0 > 0 {
            let left = vmt.columns(0, r0) * vt;
            out.view_mut((0, 0), (vmt.nrows(), n_prev)).copy_from(&left);
        }
        out.view_mut((0, n_prev), (vmt.nrows(), c))
            .copy_from(&vmt.columns(r0, c));
        out
    });

    Ok(canonicalize(new_u, svd.singular_values, new_vt, k))
}

/// Modified Gram–Schmidt on the columns of `h`, against `u` and each other.
/// Returns `(J, K)` with `h ≈ J K` and `J ⟂ u`; near-zero directions are
/// dropped.
fn residual_basis(h: &DMatrix<f64>, u: &DMatrix<f64>, tol: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, c) = h.shape();
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    let mut coeffs: Vec<Vec<f64>> = Vec::new();
    for col in 0..c {
        let mut v = h.column(col).into_owned();
        let mut proj = vec![0.0; dirs.len()];
        for _ in 0..2 {
            for (d, p) in dirs.iter().zip(proj.iter_mut()) {
                let a = d.dot(&v);
                v.axpy(-a, d, 1.0);
                *p += a;
            }
            let back = u.tr_mul(&v);
            v -= u * back;
        }
        let norm = v.norm();
        for (row, p) in proj.into_iter().enumerate() {
            coeffs[row][col] = p;
        }
        if norm > tol {
            v /= norm;
            let mut row = vec![0.0; c];
            row[col] = norm;
            dirs.push(v);
            coeffs.push(row);
        }
    }
    let r = dirs.len();
    let mut j = DMatrix::zeros(m, r);
    let mut kmat = DMatrix::zeros(r, c);
    for (i, (d, row)) in dirs.iter().zip(&coeffs).enumerate() {
        j.set_column(i, d);
        for (col, v) in row.iter().enumerate() {
            kmat[(i, col)] = *v;
        }
    }
    (j, kmat)
}

/// Streaming accumulator that keeps up to `working_rank` triplets between
/// batches and truncates only in [`IncrementalSvd::finish`].
///
/// With `working_rank` at least the rank of all data seen, the final result
/// equals the batch factorization up to rounding.
#[derive(Debug, Clone)]
pub struct IncrementalSvd {
    state: TruncatedSvd,
    working_rank: usize,
}

impl IncrementalSvd {
    pub fn new(rows: usize, working_rank: usize) -> Result<Self> {
        if rows == 0 || working_rank == 0 {
            return Err(param_err!("rows and working rank must be positive"));
        }
        Ok(Self {
            state: TruncatedSvd::empty(rows),
            working_rank,
        })
    }

    pub fn push(&mut self, batch: &ColumnMatrix) -> Result<()> {
        self.state = incremental_svd_update(&self.state, batch, self.working_rank)?;
        Ok(())
    }

    pub fn state(&self) -> &TruncatedSvd {
        &self.state
    }

    pub fn finish(self, k: usize) -> TruncatedSvd {
        self.state.truncate(k)
    }
}
