//! Cosine spectral transform of vector sequences and images.
//!
//! With `N` sample positions the basis is
//! `s(N, m, k) = cos(π (N − m)(k − 1) / (N − 1))` for `1 ≤ m, k ≤ N`, and a
//! sequence `x_1..x_N` maps to `f_m = Σ_k s(N, m, k) x_k`. Small `m` are the
//! high-frequency (short-span) components. No orthonormal weighting is
//! applied.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{param_err, Result};

/// Number of sample positions and the retained band `m_lo..=m_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralConfig {
    n_points: usize,
    m_lo: usize,
    m_hi: usize,
}

impl SpectralConfig {
    pub fn new(n_points: usize, m_lo: usize, m_hi: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(param_err!("need at least 2 sample positions, got {n_points}"));
        }
        if m_lo < 1 || m_lo > m_hi || m_hi > n_points {
            return Err(param_err!(
                "band {m_lo}..={m_hi} must satisfy 1 <= lo <= hi <= {n_points}"
            ));
        }
        Ok(Self {
            n_points,
            m_lo,
            m_hi,
        })
    }

    /// Every frequency `1..=n_points`.
    pub fn full(n_points: usize) -> Result<Self> {
        Self::new(n_points, 1, n_points)
    }

    /// `N = 15`, `1 ≤ m ≤ 6`: the word and sentence setting.
    pub fn high_pass_default() -> Self {
        Self {
            n_points: 15,
            m_lo: 1,
            m_hi: 6,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn m_lo(&self) -> usize {
        self.m_lo
    }

    pub fn m_hi(&self) -> usize {
        self.m_hi
    }

    /// Number of retained coefficients `m_hi − m_lo + 1`.
    pub fn bands(&self) -> usize {
        self.m_hi - self.m_lo + 1
    }

    pub fn basis_value(&self, m: usize, k: usize) -> Result<f64> {
        basis_value(self.n_points, m, k)
    }
}

/// `s(N, m, k)`, 1-based `m` and `k`.
pub fn basis_value(n: usize, m: usize, k: usize) -> Result<f64> {
    if n < 2 || m < 1 || m > n || k < 1 || k > n {
        return Err(param_err!(
            "basis index (N={n}, m={m}, k={k}) out of range"
        ));
    }
    Ok(cos_pi_ratio(((n - m) * (k - 1)) as u64, (n - 1) as u64))
}

/// `cos(π · num / den)` with exact results at multiples of π/2 and π/3.
fn cos_pi_ratio(num: u64, den: u64) -> f64 {
    let period = 2 * den;
    let mut num = num % period;
    if num > den {
        num = period - num;
    }
    // angle now in [0, π]
    let (num, sign) = if 2 * num > den {
        (den - num, -1.0)
    } else {
        (num, 1.0)
    };
    // angle now in [0, π/2]
    let value = if num == 0 {
        1.0
    } else if 2 * num == den {
        0.0
    } else if 3 * num == den {
        0.5
    } else if 4 * num > den {
        (PI * (den - 2 * num) as f64 / (2 * den) as f64).sin()
    } else {
        (PI * num as f64 / den as f64).cos()
    };
    sign * value
}

/// Ordered vectors of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSequence {
    dim: usize,
    data: Vec<f64>,
}

impl VectorSequence {
    pub fn new(dim: usize, items: Vec<Vec<f64>>) -> Result<Self> {
        if items.is_empty() {
            return Err(param_err!("sequence must contain at least one vector"));
        }
        let mut data = Vec::with_capacity(dim * items.len());
        for (i, v) in items.iter().enumerate() {
            if v.len() != dim {
                return Err(param_err!(
                    "item {i} has dimension {}, expected {dim}",
                    v.len()
                ));
            }
            data.extend_from_slice(v);
        }
        Ok(Self { dim, data })
    }

    /// From `len · dim` values laid out item after item.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(param_err!(
                "{} values do not form a non-empty sequence of dimension {dim}",
                data.len()
            ));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn item(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn items(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Pre-tabulated basis for one configuration.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    cfg: SpectralConfig,
    // bands × N, row-major
    table: Vec<f64>,
}

impl SpectralTransform {
    pub fn new(cfg: SpectralConfig) -> Self {
        let n = cfg.n_points;
        let mut table = Vec::with_capacity(cfg.bands() * n);
        for m in cfg.m_lo..=cfg.m_hi {
            for k in 1..=n {
                table.push(cos_pi_ratio(((n - m) * (k - 1)) as u64, (n - 1) as u64));
            }
        }
        Self { cfg, table }
    }

    pub fn config(&self) -> &SpectralConfig {
        &self.cfg
    }

    /// Basis row for band offset `b` (`m = m_lo + b`).
    pub fn row(&self, b: usize) -> &[f64] {
        let n = self.cfg.n_points;
        &self.table[b * n..(b + 1) * n]
    }

    /// Positions beyond `N` that a sequence of length `len` loses.
    pub fn truncated_positions(&self, len: usize) -> usize {
        len.saturating_sub(self.cfg.n_points)
    }

    /// Coefficient vectors `f_m` for `m` ascending over the band.
    pub fn transform(&self, seq: &VectorSequence) -> Vec<Vec<f64>> {
        let flat = self.transform_flat(seq);
        flat.chunks_exact(seq.dim()).map(<[f64]>::to_vec).collect()
    }

    /// Concatenation of all `f_m`, ascending `m`.
    pub fn transform_flat(&self, seq: &VectorSequence) -> Vec<f64> {
        let d = seq.dim();
        let used = seq.len().min(self.cfg.n_points);
        let mut out = vec![0.0; self.cfg.bands() * d];
        for (b, chunk) in out.chunks_exact_mut(d).enumerate() {
            let row = self.row(b);
            for (k, item) in seq.items().take(used).enumerate() {
                let s = row[k];
                for (o, x) in chunk.iter_mut().zip(item) {
                    *o += s * x;
                }
            }
        }
        out
    }

    /// `C (bands × N)` restricted to the first `cols` positions.
    fn matrix(&self, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.cfg.bands(), cols, |b, k| self.row(b)[k])
    }
}

/// `f_m = Σ_{k ≤ min(L, N)} s(N, m, k) x_k` for `m` in the configured band.
pub fn dct_sequence(cfg: &SpectralConfig, seq: &VectorSequence) -> Vec<Vec<f64>> {
    SpectralTransform::new(*cfg).transform(seq)
}

/// Separable 2D transform: rows index the first sequence axis, columns the
/// second. Rows/columns past the respective `N` are ignored.
#[derive(Debug, Clone)]
pub struct SpectralTransform2d {
    rows: DMatrix<f64>,
    cols: DMatrix<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl SpectralTransform2d {
    pub fn new(cfg_rows: SpectralConfig, cfg_cols: SpectralConfig) -> Self {
        let r = SpectralTransform::new(cfg_rows);
        let c = SpectralTransform::new(cfg_cols);
        Self {
            rows: r.matrix(cfg_rows.n_points),
            cols: c.matrix(cfg_cols.n_points),
            n_rows: cfg_rows.n_points,
            n_cols: cfg_cols.n_points,
        }
    }

    /// Coefficients, shape `(row bands, column bands)`.
    pub fn transform(&self, image: &DMatrix<f64>) -> DMatrix<f64> {
        let h = image.nrows().min(self.n_rows);
        let w = image.ncols().min(self.n_cols);
        let cr = self.rows.columns(0, h);
        let cc = self.cols.columns(0, w);
        let img = image.view((0, 0), (h, w));
        (cr * img) * cc.transpose()
    }
}

pub fn dct_2d(
    cfg_rows: &SpectralConfig,
    cfg_cols: &SpectralConfig,
    image: &DMatrix<f64>,
) -> DMatrix<f64> {
    SpectralTransform2d::new(*cfg_rows, *cfg_cols).transform(image)
}
