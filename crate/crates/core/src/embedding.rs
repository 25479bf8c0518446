//! Embedding models: the leading left singular vectors of an encoding matrix
//! and the coordinates of encodings on them.

use nalgebra::{DMatrix, DVector};

use crate::error::{data_err, param_err, Result};
use crate::linalg::{project, truncated_svd, ColumnMatrix, SvdParams};

/// Tolerance for the basis orthonormality check on construction.
pub const BASIS_TOLERANCE: f64 = 1e-5;

/// A frozen basis mapping `input_dim`-dimensional encodings to `k`
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    basis: DMatrix<f64>,
    sigma: Vec<f64>,
    label: String,
}

impl EmbeddingModel {
    /// Validates orthonormality and the ordering of `sigma`.
    pub fn from_parts(basis: DMatrix<f64>, sigma: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if basis.ncols() != sigma.len() {
            return Err(param_err!(
                "basis has {} columns but {} singular values",
                basis.ncols(),
                sigma.len()
            ));
        }
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) || sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(data_err!("singular values must be finite, non-negative and non-increasing"));
        }
        let err = crate::linalg::TruncatedSvd {
            u: basis.clone(),
            sigma: sigma.clone(),
            vt: None,
        }
        .orthonormality_error();
        if err >= BASIS_TOLERANCE {
            return Err(data_err!("basis is not orthonormal (max deviation {err:.3e})"));
        }
        Ok(Self {
            basis,
            sigma,
            label: label.into(),
        })
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn input_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Singular values in stored (non-increasing) order.
    pub fn spectrum(&self) -> &[f64] {
        &self.sigma
    }

    /// `basisᵀ x`.
    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(param_err!(
                "encoding has dimension {}, model expects {}",
                x.len(),
                self.input_dim()
            ));
        }
        let v = DVector::from_column_slice(x);
        Ok(self.basis.tr_mul(&v).as_slice().to_vec())
    }

    /// Embeddings of every column of `x`, shape `k × cols`.
    pub fn embed_columns(&self, x: &ColumnMatrix) -> Result<DMatrix<f64>> {
        project(&self.basis, x)
    }
}

/// Factorizes `x` and keeps the top-`k` basis; returns the model and the
/// `k × n` training embeddings.
///
/// Columns are not mean-centred.
pub fn fit(x: &ColumnMatrix, k: usize, seed: u64) -> Result<(EmbeddingModel, DMatrix<f64>)> {
    fit_with(x, k, &SvdParams::with_seed(seed))
}

pub fn fit_with(
    x: &ColumnMatrix,
    k: usize,
    params: &SvdParams,
) -> Result<(EmbeddingModel, DMatrix<f64>)> {
    let svd = truncated_svd(x, k, params)?;
    let embeddings = project(&svd.u, x)?;
    let model = EmbeddingModel {
        basis: svd.u,
        sigma: svd.sigma,
        label: String::new(),
    };
    Ok((model, embeddings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::euclidean;

    #[test]
    fn identity_embeddings_are_orthonormal_points() {
        let x = ColumnMatrix::Dense(DMatrix::identity(4, 4));
        let (model, p) = fit(&x, 4, 1).unwrap();
        assert_eq!(model.k(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let d = euclidean(p.column(i).as_slice(), p.column(j).as_slice());
                let want = if i == j { 0.0 } else { 2f64.sqrt() };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn duplicate_columns_share_embedding() {
        let mut x = DMatrix::from_fn(5, 6, |i, j| ((i * 6 + j) as f64).sqrt());
        let c = x.column(1).into_owned();
        x.set_column(4, &c);
        let (_, p) = fit(&ColumnMatrix::Dense(x), 3, 7).unwrap();
        assert_eq!(p.column(1), p.column(4));
    }

    #[test]
    fn embed_basics() {
        let x = ColumnMatrix::Dense(DMatrix::from_fn(6, 9, |i, j| ((i * i + 3 * j * j + i * j) as f64 * 0.3).sin()));
        let (model, p) = fit(&x, 3, 3).unwrap();
        assert_eq!(model.embed(&[0.0; 6]).unwrap(), vec![0.0; 3]);
        let e = model.embed(model.basis().column(1).as_slice()).unwrap();
        assert!((e[0]).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12 && e[2].abs() < 1e-12);
        for j in 0..9 {
            let e = model.embed(x.column_dense(j).as_slice()).unwrap();
            for (a, b) in e.iter().zip(p.column(j).iter()) {
                assert!((a - b).abs() < 1e-8);
            }
        }
        assert!(model.embed(&[0.0; 5]).is_err());
    }

    #[test]
    fn spectrum_of_diagonal() {
        let x = ColumnMatrix::Dense(DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0])));
        let (model, _) = fit(&x, 3, 0).unwrap();
        let s = model.spectrum();
        assert!((s[0] - 3.0).abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12 && (s[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_parts_validates() {
        let basis = DMatrix::<f64>::identity(3, 2);
        assert!(EmbeddingModel::from_parts(basis.clone(), vec![2.0, 1.0], "x").is_ok());
        assert!(EmbeddingModel::from_parts(basis.clone(), vec![1.0, 2.0], "x").is_err());
        assert!(EmbeddingModel::from_parts(basis * 2.0, vec![2.0, 1.0], "x").is_err());
    }
}
