//! Browser bindings for the demo page in `www/`.
//!
//! Three operations are exposed: the cosine spectral basis and transform of a
//! scalar sequence, a partition-tree index over 2D points with exact kNN, and
//! spelling-based nearest words over a user-supplied word list.

use nalgebra::DMatrix;
use veob::partition::{PartitionTree, TreeParams};
use veob::pipelines::{fit_orthography, orthography_encode, tokenize, Vocabulary};
use veob::spectral::{SpectralTransform, VectorSequence};
use veob::{EmbeddingModel, SpectralConfig};
use wasm_bindgen::prelude::*;

fn js(e: veob::Error) -> String {
    e.to_string()
}

/// Basis rows `s(N, m, k)` for `m` in `m_lo..=m_hi`, row-major
/// (`bands × n`).
#[wasm_bindgen]
pub fn basis_table(n: usize, m_lo: usize, m_hi: usize) -> Result<Vec<f64>, String> {
    let t = SpectralTransform::new(SpectralConfig::new(n, m_lo, m_hi).map_err(js)?);
    Ok((0..t.config().bands()).flat_map(|b| t.row(b).to_vec()).collect())
}

/// Coefficients `f_m` of a scalar sequence, ascending `m`.
#[wasm_bindgen]
pub fn transform(values: &[f64], n: usize, m_lo: usize, m_hi: usize) -> Result<Vec<f64>, String> {
    let cfg = SpectralConfig::new(n, m_lo, m_hi).map_err(js)?;
    if values.is_empty() {
        return Ok(vec![0.0; cfg.bands()]);
    }
    let seq = VectorSequence::from_flat(1, values.to_vec()).map_err(js)?;
    Ok(SpectralTransform::new(cfg).transform_flat(&seq))
}

/// Partition tree over 2D points.
#[wasm_bindgen]
pub struct PointIndex {
    samples: DMatrix<f64>,
    tree: PartitionTree,
}

#[wasm_bindgen]
impl PointIndex {
    /// `xy` holds interleaved coordinates `x0, y0, x1, y1, ...`.
    #[wasm_bindgen(constructor)]
    pub fn new(xy: &[f64], min_cell: usize, seed: u32) -> Result<PointIndex, String> {
        if xy.is_empty() || !xy.len().is_multiple_of(2) {
            return Err("need a non-empty, even number of coordinates".into());
        }
        let samples = DMatrix::from_column_slice(2, xy.len() / 2, xy);
        let params = TreeParams {
            max_levels: None,
            min_cell: min_cell.max(1),
            seed: seed.into(),
        };
        let tree = PartitionTree::build(&samples, &params).map_err(js)?;
        Ok(Self { samples, tree })
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    pub fn cell_count(&self) -> usize {
        self.tree.cells().len()
    }

    /// Cell index of every point.
    pub fn assignment(&self) -> Vec<u32> {
        self.tree.assignment().iter().map(|&c| c as u32).collect()
    }

    /// Interleaved cell centroids.
    pub fn centroids(&self) -> Vec<f64> {
        self.tree.cells().iter().flat_map(|c| c.centroid.clone()).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.tree.cells().iter().map(|c| c.radius).collect()
    }

    /// `id, distance` pairs, nearest first.
    pub fn knn(&self, x: f64, y: f64, k: usize) -> Result<Vec<f64>, String> {
        let hits = self.tree.knn(&self.samples, &[x, y], k).map_err(js)?;
        Ok(hits.iter().flat_map(|h| [h.id as f64, h.distance]).collect())
    }
}

/// Spelling embeddings of a word list.
#[wasm_bindgen]
pub struct SpellingIndex {
    vocab: Vocabulary,
    model: EmbeddingModel,
    embeddings: DMatrix<f64>,
    tree: PartitionTree,
    cfg: SpectralConfig,
}

#[wasm_bindgen]
impl SpellingIndex {
    /// Words are taken from free text with the corpus tokenizer; `k` is
    /// clipped to the number of distinct words.
    #[wasm_bindgen(constructor)]
    pub fn new(text: &str, k: usize) -> Result<SpellingIndex, String> {
        let vocab = Vocabulary::from_tokens(tokenize(text).into_iter().flatten());
        if vocab.is_empty() {
            return Err("no words found".into());
        }
        let cfg = SpectralConfig::high_pass_default();
        let k = k.clamp(1, vocab.len());
        let (model, embeddings) = fit_orthography(vocab.tokens(), &cfg, k, 42).map_err(js)?;
        let params = TreeParams {
            min_cell: 16,
            ..TreeParams::default()
        };
        let tree = PartitionTree::build(&embeddings, &params).map_err(js)?;
        Ok(Self {
            vocab,
            model,
            embeddings,
            tree,
            cfg,
        })
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.model.k()
    }

    /// Tab-separated `word, distance` lines for the `top` nearest words.
    /// Words outside the list are embedded on the fly.
    pub fn neighbours(&self, word: &str, top: usize) -> Result<String, String> {
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            return Err("empty query".into());
        }
        let q = match self.vocab.lookup(&word) {
            Some(i) => self.embeddings.column(i).as_slice().to_vec(),
            None => self
                .model
                .embed(&orthography_encode(&word, &self.cfg).map_err(js)?)
                .map_err(js)?,
        };
        let hits = self.tree.knn(&self.embeddings, &q, top).map_err(js)?;
        Ok(hits
            .iter()
            .map(|h| format!("{}\t{:.6}", self.vocab.token(h.id), h.distance))
            .collect::<Vec<_>>()
            .join("\n"))
    }
}
