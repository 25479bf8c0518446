use nalgebra::DMatrix;

use crate::embedding::{fit, EmbeddingModel};
use crate::error::{param_err, Result};
use crate::linalg::ColumnMatrix;
use crate::partition::{Neighbor, PartitionTree, TreeParams};
use crate::spectral::{SpectralConfig, SpectralTransform2d};

pub const IMAGE_SIDE: usize = 28;

/// A 28×28 grayscale image stored row-major, with its class id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledImage {
    pixels: Vec<u8>,
    label: u8,
}

impl LabeledImage {
    pub fn new(pixels: Vec<u8>, label: u8) -> Result<Self> {
        if pixels.len() != IMAGE_SIDE * IMAGE_SIDE {
            return Err(param_err!(
                "image has {} pixels, expected {}",
                pixels.len(),
                IMAGE_SIDE * IMAGE_SIDE
            ));
        }
        if label > 9 {
            return Err(param_err!("label {label} outside 0..=9"));
        }
        Ok(Self { pixels, label })
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    /// Pixel `(row, col)` at matrix position `(row, col)`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(IMAGE_SIDE, IMAGE_SIDE, |r, c| self.pixels[r * IMAGE_SIDE + c] as f64)
    }
}

fn full_band() -> SpectralTransform2d {
    let cfg = SpectralConfig::full(IMAGE_SIDE).expect("valid side");
    SpectralTransform2d::new(cfg, cfg)
}

/// Full-band 2D coefficients, flattened column-major (784 values).
pub fn image_coefficients(image: &LabeledImage) -> Vec<f64> {
    full_band().transform(&image.to_matrix()).as_slice().to_vec()
}

/// Artifacts of the image pipeline.
#[derive(Debug, Clone)]
pub struct ImageIndex {
    pub model: EmbeddingModel,
    /// `k × n` training embeddings.
    pub embeddings: DMatrix<f64>,
    pub tree: PartitionTree,
    pub labels: Vec<u8>,
}

impl ImageIndex {
    pub fn embed(&self, image: &LabeledImage) -> Result<Vec<f64>> {
        self.model.embed(&image_coefficients(image))
    }
}

pub fn fit_images(train: &[LabeledImage], k: usize, tree: &TreeParams) -> Result<ImageIndex> {
    if train.is_empty() {
        return Err(param_err!("no training images"));
    }
    let transform = full_band();
    let d = IMAGE_SIDE * IMAGE_SIDE;
    let mut data = Vec::with_capacity(d * train.len());
    for img in train {
        data.extend_from_slice(transform.transform(&img.to_matrix()).as_slice());
    }
    let x = ColumnMatrix::Dense(DMatrix::from_vec(d, train.len(), data));
    let (model, embeddings) = fit(&x, k, tree.seed)?;
    let index = PartitionTree::build(&embeddings, tree)?;
    Ok(ImageIndex {
        model: model.with_label("images"),
        embeddings,
        tree: index,
        labels: train.iter().map(LabeledImage::label).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// `(training id, label, distance)`, nearest first.
    pub neighbors: Vec<(usize, u8, f64)>,
    /// The query's label is among the neighbors' labels.
    pub matched: bool,
}

pub fn classify_image(index: &ImageIndex, image: &LabeledImage, top: usize) -> Result<Classification> {
    if top == 0 {
        return Err(param_err!("top must be at least 1"));
    }
    let q = index.embed(image)?;
    let hits = index.tree.knn(&index.embeddings, &q, top)?;
    let neighbors: Vec<(usize, u8, f64)> = hits
        .iter()
        .map(|&Neighbor { id, distance }| (id, index.labels[id], distance))
        .collect();
    let matched = neighbors.iter().any(|n| n.1 == image.label());
    Ok(Classification { neighbors, matched })
}
