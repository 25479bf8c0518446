//! Supervised learning with per-cell linear maps in a joint embedding space.
//!
//! Inputs and targets are embedded separately (`Px = UxᵀX`, `Py = UyᵀY`, or
//! one-hot `Py` for class labels), stacked as `Z = [Px; α·Py]` and embedded
//! again (`Pz = UzᵀZ`). The columns of `Pz` are partitioned into cells, and
//! each cell learns `Ac` with `Pz ≈ Ac·Px`. Prediction maps `px` through every
//! cell's `Ac` and `Uz`, and keeps the cell whose reconstructed input block
//! lands closest to `px`.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{param_err, Error, Result};
use crate::linalg::{euclidean, project, truncated_svd, ColumnMatrix, SvdParams};
use crate::partition::{Cell, PartitionTree, TreeParams};

/// Residuals within this fraction of `‖px‖` of the best one count as tied.
pub const SELECTION_TOLERANCE: f64 = 1e-6;

/// Training targets.
#[derive(Debug, Clone)]
pub enum Targets {
    /// Real-valued target columns, embedded with their own basis.
    Values(ColumnMatrix),
    /// Class ids in `0..classes`, one-hot encoded with entries `scale`.
    Labels {
        labels: Vec<usize>,
        classes: usize,
        scale: f64,
    },
}

impl Targets {
    pub fn labels(labels: Vec<usize>, classes: usize) -> Self {
        Targets::Labels {
            labels,
            classes,
            scale: 1.0,
        }
    }

    fn cols(&self) -> usize {
        match self {
            Targets::Values(y) => y.cols(),
            Targets::Labels { labels, .. } => labels.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub kx: usize,
    /// Ignored for class labels (the one-hot width is the class count).
    pub ky: usize,
    pub kz: usize,
    pub alpha: Alpha,
    pub tree: TreeParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetBasis {
    Basis(DMatrix<f64>),
    OneHot { classes: usize },
}

impl TargetBasis {
    fn dim(&self) -> usize {
        match self {
            TargetBasis::Basis(u) => u.ncols(),
            TargetBasis::OneHot { classes } => *classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedCell {
    /// Cell over `Pz` columns; members are training column ids.
    pub cell: Cell,
    /// `kz × kx` map.
    pub ac: DMatrix<f64>,
    /// Empirical class probabilities (classification only).
    pub histogram: Option<Vec<f64>>,
    /// Fewer member columns than `kx`; `ac` is the minimum-norm solution.
    pub underdetermined: bool,
}

/// Everything a trained model consists of.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedParts {
    pub ux: DMatrix<f64>,
    pub target: TargetBasis,
    pub uz: DMatrix<f64>,
    pub alpha: f64,
    pub cells: Vec<SupervisedCell>,
    pub train_px: DMatrix<f64>,
    pub train_pz: DMatrix<f64>,
    pub train_labels: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedModel {
    parts: SupervisedParts,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Value(Vec<f64>),
    Label(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub output: Output,
    pub cell: usize,
    /// Class probability, or `1 / (1 + residual)` for regression.
    pub confidence: f64,
    /// `‖p′x − px‖` for the selected cell.
    pub residual: f64,
}

/// `‖Px‖_F / ‖Py‖_F`.
pub fn auto_alpha(px: &DMatrix<f64>, py: &DMatrix<f64>) -> Result<f64> {
    let ny = py.norm();
    if ny == 0.0 {
        return Err(param_err!("target embedding is zero"));
    }
    let nx = px.norm();
    if nx == 0.0 {
        return Err(param_err!("input embedding is zero"));
    }
    Ok(nx / ny)
}

/// Minimum-norm least-squares `A` with `A·px ≈ pz`.
fn solve_cell_map(px: &DMatrix<f64>, pz: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = SVD::new(px.clone(), true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(DMatrix::zeros(pz.nrows(), px.nrows()));
    }
    let eps = top * 1e-12 * px.nrows().max(px.ncols()) as f64;
    let pinv = svd
        .pseudo_inverse(eps)
        .map_err(|e| Error::Numeric(format!("pseudo-inverse failed: {e}")))?;
    Ok(pz * pinv)
}

fn gather(m: &DMatrix<f64>, ids: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), ids.len(), |r, c| m[(r, ids[c])])
}

fn histogram_of(labels: &[usize], classes: usize, ids: &[usize]) -> Vec<f64> {
    let mut h = vec![0.0; classes];
    for &i in ids {
        h[labels[i]] += 1.0;
    }
    let n = ids.len() as f64;
    h.iter_mut().for_each(|v| *v /= n);
    h
}

impl SupervisedModel {
    pub fn train(x: &ColumnMatrix, y: &Targets, params: &TrainParams) -> Result<Self> {
        let n = x.cols();
        if y.cols() != n {
            return Err(param_err!(
                "inputs have {n} columns but targets have {}",
                y.cols()
            ));
        }
        let seed = params.tree.seed;
        let svd_params = SvdParams::with_seed(seed);
        let sx = truncated_svd(x, params.kx, &svd_params)?;
        let px = project(&sx.u, x)?;

        let (target, py, train_labels) = match y {
            Targets::Values(yv) => {
                let sy = truncated_svd(yv, params.ky, &SvdParams::with_seed(seed.wrapping_add(1)))?;
                let py = project(&sy.u, yv)?;
                (TargetBasis::Basis(sy.u), py, None)
            }
            Targets::Labels {
                labels,
                classes,
                scale,
            } => {
                if *classes == 0 || labels.iter().any(|&l| l >= *classes) {
                    return Err(param_err!("labels must lie in 0..{classes}"));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(param_err!("one-hot scale must be positive"));
                }
                let mut py = DMatrix::zeros(*classes, n);
                for (j, &l) in labels.iter().enumerate() {
                    py[(l, j)] = *scale;
                }
                (TargetBasis::OneHot { classes: *classes }, py, Some(labels.clone()))
            }
        };

        let alpha = match params.alpha {
            Alpha::Auto => auto_alpha(&px, &py)?,
            Alpha::Fixed(a) if a.is_finite() && a > 0.0 => a,
            Alpha::Fixed(a) => return Err(param_err!("alpha must be positive, got {a}")),
        };

        let (kx, ky) = (px.nrows(), py.nrows());
        let mut z = DMatrix::zeros(kx + ky, n);
        z.view_mut((0, 0), (kx, n)).copy_from(&px);
        z.view_mut((kx, 0), (ky, n)).copy_from(&(&py * alpha));
        let zm = ColumnMatrix::Dense(z);
        let kz = params.kz.min(kx + ky).min(n);
        let sz = truncated_svd(&zm, kz, &SvdParams::with_seed(seed.wrapping_add(2)))?;
        let pz = project(&sz.u, &zm)?;

        let tree = PartitionTree::build(&pz, &params.tree)?;
        let mut model = SupervisedModel {
            parts: SupervisedParts {
                ux: sx.u,
                target,
                uz: sz.u,
                alpha,
                cells: Vec::new(),
                train_px: px,
                train_pz: pz,
                train_labels,
            },
        };
        let cells = tree
            .cells()
            .iter()
            .map(|c| model.fit_cell(c.clone()))
            .collect::<Result<Vec<_>>>()?;
        model.parts.cells = cells;
        Ok(model)
    }

    fn fit_cell(&self, cell: Cell) -> Result<SupervisedCell> {
        let p = &self.parts;
        let px = gather(&p.train_px, &cell.members);
        let pz = gather(&p.train_pz, &cell.members);
        let ac = solve_cell_map(&px, &pz)?;
        let histogram = match (&p.train_labels, &p.target) {
            (Some(labels), TargetBasis::OneHot { classes }) => {
                Some(histogram_of(labels, *classes, &cell.members))
            }
            _ => None,
        };
        Ok(SupervisedCell {
            underdetermined: cell.members.len() < p.train_px.nrows(),
            cell,
            ac,
            histogram,
        })
    }

    pub fn from_parts(parts: SupervisedParts) -> Result<Self> {
        let (m, kx) = parts.ux.shape();
        let kz = parts.uz.ncols();
        if m == 0 || kx == 0 {
            return Err(param_err!("input basis is empty"));
        }
        if parts.uz.nrows() != kx + parts.target.dim() {
            return Err(param_err!("joint basis has {} rows, expected {}", parts.uz.nrows(), kx + parts.target.dim()));
        }
        if !(parts.alpha.is_finite() && parts.alpha > 0.0) {
            return Err(param_err!("alpha must be positive"));
        }
        if parts.cells.is_empty() {
            return Err(param_err!("model has no cells"));
        }
        for (i, c) in parts.cells.iter().enumerate() {
            if c.ac.shape() != (kz, kx) {
                return Err(param_err!("cell {i} map has shape {:?}, expected ({kz}, {kx})", c.ac.shape()));
            }
            if let Some(h) = &c.histogram {
                if h.len() != parts.target.dim() {
                    return Err(param_err!("cell {i} histogram has wrong length"));
                }
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &SupervisedParts {
        &self.parts
    }

    pub fn into_parts(self) -> SupervisedParts {
        self.parts
    }

    pub fn alpha(&self) -> f64 {
        self.parts.alpha
    }

    pub fn cells(&self) -> &[SupervisedCell] {
        &self.parts.cells
    }

    pub fn input_dim(&self) -> usize {
        self.parts.ux.nrows()
    }

    pub fn is_classifier(&self) -> bool {
        matches!(self.parts.target, TargetBasis::OneHot { .. })
    }

    /// `(p′x, p′y)` blocks of `Uz·Ac·px`, with `p′y` divided by alpha.
    fn reconstruct(&self, cell: &SupervisedCell, px: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let kx = px.len();
        let z = &self.parts.uz * (&cell.ac * px);
        let ky = z.len() - kx;
        let pxr = z.rows(0, kx).into_owned();
        let pyr = z.rows(kx, ky) / self.parts.alpha;
        (pxr, pyr)
    }

    /// Selects the cell by residual `‖p′x − px‖`. Cells within
    /// [`SELECTION_TOLERANCE`] of the best residual are tied; the tie goes to
    /// the cell holding the training column nearest to `px`, then to the
    /// lowest cell index.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        if x.len() != self.input_dim() {
            return Err(param_err!(
                "input has dimension {}, model expects {}",
                x.len(),
                self.input_dim()
            ));
        }
        let px = self.parts.ux.tr_mul(&DVector::from_column_slice(x));
        let recon: Vec<(DVector<f64>, DVector<f64>)> =
            self.parts.cells.iter().map(|c| self.reconstruct(c, &px)).collect();
        let residuals: Vec<f64> = recon.iter().map(|(p, _)| (p - &px).norm()).collect();
        let best = residuals.iter().copied().fold(f64::INFINITY, f64::min);
        let band = best + SELECTION_TOLERANCE * px.norm().max(f64::MIN_POSITIVE);
        let tied: Vec<usize> = (0..residuals.len()).filter(|&i| residuals[i] <= band).collect();

        let chosen = if tied.len() == 1 {
            tied[0]
        } else {
            let mut pick = tied[0];
            let mut pick_d = f64::INFINITY;
            for &ci in &tied {
                let d = self.parts.cells[ci]
                    .cell
                    .members
                    .iter()
                    .map(|&m| euclidean(self.parts.train_px.column(m).as_slice(), px.as_slice()))
                    .fold(f64::INFINITY, f64::min);
                if d < pick_d {
                    pick_d = d;
                    pick = ci;
                }
            }
            pick
        };

        let cell = &self.parts.cells[chosen];
        let residual = residuals[chosen];
        match (&self.parts.target, &cell.histogram) {
            (TargetBasis::OneHot { .. }, Some(h)) => {
                let mut label = 0;
                for (i, p) in h.iter().enumerate() {
                    if *p > h[label] {
                        label = i;
                    }
                }
                Ok(Prediction {
                    output: Output::Label(label),
                    cell: chosen,
                    confidence: h[label],
                    residual,
                })
            }
            (TargetBasis::OneHot { .. }, None) => {
                Err(param_err!("classification cell {chosen} has no histogram"))
            }
            (TargetBasis::Basis(uy), _) => {
                let y = uy * &recon[chosen].1;
                Ok(Prediction {
                    output: Output::Value(y.as_slice().to_vec()),
                    cell: chosen,
                    confidence: 1.0 / (1.0 + residual),
                    residual,
                })
            }
        }
    }

    /// `sqrt(Σ_c ‖Pz_c − Ac·Px_c‖²_F)` over the training columns.
    pub fn training_residual(&self) -> f64 {
        self.parts
            .cells
            .iter()
            .map(|c| {
                let px = gather(&self.parts.train_px, &c.cell.members);
                let pz = gather(&self.parts.train_pz, &c.cell.members);
                (pz - &c.ac * px).norm_squared()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Splits cell `index` in two along its principal axis and refits both
    /// halves. Returns `false` when the cell cannot be split.
    pub fn refine_cell(&mut self, index: usize, seed: u64) -> Result<bool> {
        let Some(target) = self.parts.cells.get(index) else {
            return Err(param_err!("cell {index} does not exist"));
        };
        let members = target.cell.members.clone();
        if members.len() < 2 {
            return Ok(false);
        }
        let sub = gather(&self.parts.train_pz, &members);
        let params = TreeParams {
            max_levels: Some(1),
            min_cell: 1,
            seed,
        };
        let tree = PartitionTree::build(&sub, &params)?;
        if tree.cells().len() < 2 {
            return Ok(false);
        }
        let mut fresh = Vec::with_capacity(tree.cells().len());
        for c in tree.cells() {
            let ids: Vec<usize> = c.members.iter().map(|&i| members[i]).collect();
            let cell = Cell::from_members(c.centroid.clone(), ids, &self.parts.train_pz);
            fresh.push(self.fit_cell(cell)?);
        }
        let mut rest = fresh.into_iter();
        self.parts.cells[index] = rest.next().expect("at least two cells");
        self.parts.cells.extend(rest);
        Ok(true)
    }
}
