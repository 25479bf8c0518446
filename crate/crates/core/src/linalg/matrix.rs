use nalgebra::{DMatrix, DVector};

use crate::error::{data_err, param_err, Result};

/// Column-compressed sparse matrix. Row indices inside each column are
/// strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumns {
    rows: usize,
    col_ptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseColumns {
    pub fn new(
        rows: usize,
        col_ptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || col_ptr.len() < 2 {
            return Err(param_err!("sparse matrix needs at least one row and one column"));
        }
        if col_ptr[0] != 0 || *col_ptr.last().unwrap() != indices.len() {
            return Err(data_err!("column pointers do not cover the index array"));
        }
        if indices.len() != values.len() {
            return Err(data_err!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            ));
        }
        for (j, w) in col_ptr.windows(2).enumerate() {
            if w[0] > w[1] {
                return Err(data_err!("column pointers decrease at column {j}"));
            }
            let col = &indices[w[0]..w[1]];
            if let Some(&last) = col.last() {
                if last >= rows {
                    return Err(data_err!("row index {last} out of range in column {j}"));
                }
            }
            if col.windows(2).any(|p| p[0] >= p[1]) {
                return Err(data_err!(
                    "row indices in column {j} are not strictly increasing"
                ));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(data_err!("non-finite value {v}"));
        }
        Ok(Self {
            rows,
            col_ptr,
            indices,
            values,
        })
    }

    /// Builds from per-column `(row, value)` lists; entries are sorted and
    /// duplicate rows are rejected.
    pub fn from_columns<I, C>(rows: usize, columns: I) -> Result<Self>
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = (usize, f64)>,
    {
        let mut builder = SparseBuilder::new(rows);
        for col in columns {
            let mut entries: Vec<(usize, f64)> = col.into_iter().collect();
            entries.sort_by_key(|e| e.0);
            builder.push_sorted(&entries)?;
        }
        builder.finish()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Incremental column-by-column construction of [`SparseColumns`].
#[derive(Debug)]
pub struct SparseBuilder {
    rows: usize,
    col_ptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseBuilder {
    pub fn new(rows: usize) -> Self {
        Self {
            rows,
            col_ptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Appends a column whose entries are already sorted by row. Explicit
    /// zeros are dropped.
    pub fn push_sorted(&mut self, entries: &[(usize, f64)]) -> Result<()> {
        let col = self.col_ptr.len() - 1;
        let mut prev: Option<usize> = None;
        for &(i, v) in entries {
            if i >= self.rows {
                return Err(data_err!("row index {i} out of range in column {col}"));
            }
            if prev.is_some_and(|p| p >= i) {
                return Err(data_err!("duplicate or unsorted row {i} in column {col}"));
            }
            if !v.is_finite() {
                return Err(data_err!("non-finite value in column {col}"));
            }
            prev = Some(i);
            if v != 0.0 {
                self.indices.push(i);
                self.values.push(v);
            }
        }
        self.col_ptr.push(self.indices.len());
        Ok(())
    }

    /// Appends a dense column, keeping only its non-zero entries.
    pub fn push_dense(&mut self, column: &[f64]) -> Result<()> {
        if column.len() != self.rows {
            return Err(param_err!(
                "column has {} entries, expected {}",
                column.len(),
                self.rows
            ));
        }
        let col = self.col_ptr.len() - 1;
        for (i, &v) in column.iter().enumerate() {
            if !v.is_finite() {
                return Err(data_err!("non-finite value in column {col}"));
            }
            if v != 0.0 {
                self.indices.push(i);
                self.values.push(v);
            }
        }
        self.col_ptr.push(self.indices.len());
        Ok(())
    }

    pub fn cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn finish(self) -> Result<SparseColumns> {
        SparseColumns::new(self.rows, self.col_ptr, self.indices, self.values)
    }
}

/// `n` column vectors of dimension `m`, stored densely (column-major) or
/// sparsely.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnMatrix {
    Dense(DMatrix<f64>),
    Sparse(SparseColumns),
}

impl From<DMatrix<f64>> for ColumnMatrix {
    fn from(m: DMatrix<f64>) -> Self {
        ColumnMatrix::Dense(m)
    }
}

impl From<SparseColumns> for ColumnMatrix {
    fn from(m: SparseColumns) -> Self {
        ColumnMatrix::Sparse(m)
    }
}

impl ColumnMatrix {
    pub fn rows(&self) -> usize {
        match self {
            ColumnMatrix::Dense(m) => m.nrows(),
            ColumnMatrix::Sparse(s) => s.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            ColumnMatrix::Dense(m) => m.ncols(),
            ColumnMatrix::Sparse(s) => s.cols(),
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        let ok = match self {
            ColumnMatrix::Dense(m) => m.iter().all(|v| v.is_finite()),
            ColumnMatrix::Sparse(s) => s.values.iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(data_err!("matrix contains non-finite values"))
        }
    }

    /// `self · b` for a dense `b` with `self.cols()` rows.
    pub fn mul_dense(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(b.nrows(), self.cols(), "inner dimension mismatch");
        match self {
            ColumnMatrix::Dense(m) => m * b,
            ColumnMatrix::Sparse(s) => {
                let mut out = DMatrix::zeros(s.rows, b.ncols());
                for c in 0..b.ncols() {
                    let bc = b.column(c);
                    let mut oc = out.column_mut(c);
                    for j in 0..s.cols() {
                        let w = bc[j];
                        if w == 0.0 {
                            continue;
                        }
                        let (idx, val) = s.column(j);
                        for (&i, &v) in idx.iter().zip(val) {
                            oc[i] += v * w;
                        }
                    }
                }
                out
            }
        }
    }

    /// `selfᵀ · q` for a dense `q` with `self.rows()` rows.
    pub fn tr_mul_dense(&self, q: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(q.nrows(), self.rows(), "inner dimension mismatch");
        match self {
            ColumnMatrix::Dense(m) => m.tr_mul(q),
            ColumnMatrix::Sparse(s) => {
                let mut out = DMatrix::zeros(s.cols(), q.ncols());
                for c in 0..q.ncols() {
                    let qc = q.column(c);
                    for j in 0..s.cols() {
                        let (idx, val) = s.column(j);
                        out[(j, c)] = idx.iter().zip(val).map(|(&i, &v)| v * qc[i]).sum();
                    }
                }
                out
            }
        }
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        let b = DMatrix::from_column_slice(v.len(), 1, v.as_slice());
        let r = self.mul_dense(&b);
        DVector::from_column_slice(r.as_slice())
    }

    pub fn column_dense(&self, j: usize) -> DVector<f64> {
        match self {
            ColumnMatrix::Dense(m) => m.column(j).into_owned(),
            ColumnMatrix::Sparse(s) => {
                let mut v = DVector::zeros(s.rows);
                let (idx, val) = s.column(j);
                for (&i, &x) in idx.iter().zip(val) {
                    v[i] = x;
                }
                v
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            ColumnMatrix::Dense(m) => m.clone(),
            ColumnMatrix::Sparse(s) => {
                let mut out = DMatrix::zeros(s.rows, s.cols());
                for j in 0..s.cols() {
                    let (idx, val) = s.column(j);
                    for (&i, &x) in idx.iter().zip(val) {
                        out[(j * s.rows) + i] = x;
                    }
                }
                out
            }
        }
    }

    /// Columns `start..end` as a new matrix of the same storage kind.
    pub fn column_range(&self, start: usize, end: usize) -> Result<ColumnMatrix> {
        if start >= end || end > self.cols() {
            return Err(param_err!(
                "column range {start}..{end} invalid for {} columns",
                self.cols()
            ));
        }
        Ok(match self {
            ColumnMatrix::Dense(m) => ColumnMatrix::Dense(m.columns(start, end - start).into_owned()),
            ColumnMatrix::Sparse(s) => {
                let (a, b) = (s.col_ptr[start], s.col_ptr[end]);
                let col_ptr = s.col_ptr[start..=end].iter().map(|p| p - a).collect();
                ColumnMatrix::Sparse(SparseColumns {
                    rows: s.rows,
                    col_ptr,
                    indices: s.indices[a..b].to_vec(),
                    values: s.values[a..b].to_vec(),
                })
            }
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            ColumnMatrix::Dense(m) => m.norm(),
            ColumnMatrix::Sparse(s) => s.values.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    /// Squared Euclidean norm of every column.
    pub fn column_norms_sq(&self) -> Vec<f64> {
        match self {
            ColumnMatrix::Dense(m) => m.column_iter().map(|c| c.norm_squared()).collect(),
            ColumnMatrix::Sparse(s) => (0..s.cols())
                .map(|j| s.column(j).1.iter().map(|v| v * v).sum())
                .collect(),
        }
    }
}
