//! Deterministic dense SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! Slow but accurate to working precision, independent of the randomized
//! path. Used as the reference factorization in tests and for small
//! matrices.

use nalgebra::DMatrix;

use crate::error::{param_err, Result};

/// Largest `min(rows, cols)` accepted by [`dense_svd`].
pub const DENSE_SVD_MAX_DIM: usize = 512;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `a = u · diag(sigma) · vt` with `r = min(rows, cols)` terms.
/// Columns of `u` belonging to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct DenseSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub vt: DMatrix<f64>,
}

pub fn dense_svd(a: &DMatrix<f64>) -> Result<DenseSvd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(param_err!("empty matrix"));
    }
    if m.min(n) > DENSE_SVD_MAX_DIM {
        return Err(param_err!(
            "dense SVD limited to min(rows, cols) <= {DENSE_SVD_MAX_DIM}, got {m}x{n}"
        ));
    }
    if m < n {
        let t = jacobi_tall(&a.transpose());
        return Ok(DenseSvd {
            u: t.vt.transpose(),
            sigma: t.sigma,
            vt: t.u.transpose(),
        });
    }
    Ok(jacobi_tall(a))
}

/// Singular values only, in non-increasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    dense_svd(a).map(|s| s.sigma)
}

fn jacobi_tall(a: &DMatrix<f64>) -> DenseSvd {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let eps = f64::EPSILON;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut u = DMatrix::zeros(m, n);
    let mut vt = DMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            u.set_column(dst, &(w.column(src) / s));
        }
        vt.set_row(dst, &v.column(src).transpose());
    }
    DenseSvd { u, sigma, vt }
}
