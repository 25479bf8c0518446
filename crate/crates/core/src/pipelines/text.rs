use std::collections::BTreeSet;

use nalgebra::DMatrix;

use super::Vocabulary;
use crate::embedding::{fit, EmbeddingModel};
use crate::error::{data_err, param_err, Result};
use crate::linalg::{ColumnMatrix, SparseBuilder, SparseColumns};
use crate::spectral::{SpectralConfig, SpectralTransform, VectorSequence};

/// One-hot width for letters (ASCII code points `0..127`).
pub const ALPHABET: usize = 127;

/// Longest sentence kept by [`fit_sentences`].
pub const MAX_SENTENCE_TOKENS: usize = 32;

/// One vector per letter with a 1 at the letter's code point.
pub fn encode_letters(token: &str) -> Result<VectorSequence> {
    let codes = letter_codes(token)?;
    let mut data = vec![0.0; codes.len() * ALPHABET];
    for (i, c) in codes.iter().enumerate() {
        data[i * ALPHABET + c] = 1.0;
    }
    VectorSequence::from_flat(ALPHABET, data)
}

fn letter_codes(token: &str) -> Result<Vec<usize>> {
    if token.is_empty() {
        return Err(param_err!("empty token"));
    }
    token
        .chars()
        .map(|c| {
            let code = c as usize;
            if code < ALPHABET {
                Ok(code)
            } else {
                Err(data_err!("token {token:?} has a character outside ASCII 0..127"))
            }
        })
        .collect()
}

/// Non-zero entries of the orthographic encoding, sorted by row. Exploits the
/// one-hot input: band `b`, letter `c` at position `k` adds `s(b, k)` to row
/// `b·127 + c`.
fn orthography_entries(token: &str, transform: &SpectralTransform) -> Result<Vec<(usize, f64)>> {
    let codes = letter_codes(token)?;
    let n = transform.config().n_points();
    let mut out = Vec::new();
    for b in 0..transform.config().bands() {
        let row = transform.row(b);
        let mut slot = [0.0f64; ALPHABET];
        let mut seen = [false; ALPHABET];
        for (k, &c) in codes.iter().take(n).enumerate() {
            slot[c] += row[k];
            seen[c] = true;
        }
        for c in 0..ALPHABET {
            if seen[c] {
                out.push((b * ALPHABET + c, slot[c]));
            }
        }
    }
    Ok(out)
}

/// Spectral coefficients of the letter sequence, bands concatenated in
/// ascending `m`; dimension `127 · bands`.
pub fn orthography_encode(token: &str, cfg: &SpectralConfig) -> Result<Vec<f64>> {
    let transform = SpectralTransform::new(*cfg);
    let mut out = vec![0.0; ALPHABET * cfg.bands()];
    for (i, v) in orthography_entries(token, &transform)? {
        out[i] = v;
    }
    Ok(out)
}

/// Sparse `127·bands × tokens` encoding matrix.
pub fn orthography_matrix<S: AsRef<str>>(tokens: &[S], cfg: &SpectralConfig) -> Result<SparseColumns> {
    let transform = SpectralTransform::new(*cfg);
    let mut b = SparseBuilder::new(ALPHABET * cfg.bands());
    for t in tokens {
        b.push_sorted(&orthography_entries(t.as_ref(), &transform)?)?;
    }
    b.finish()
}

pub fn fit_orthography<S: AsRef<str>>(
    tokens: &[S],
    cfg: &SpectralConfig,
    k: usize,
    seed: u64,
) -> Result<(EmbeddingModel, DMatrix<f64>)> {
    if tokens.is_empty() {
        return Err(param_err!("no tokens to fit"));
    }
    let x = ColumnMatrix::Sparse(orthography_matrix(tokens, cfg)?);
    let (model, p) = fit(&x, k, seed)?;
    Ok((model.with_label("orthography"), p))
}

/// Sparse `2V × V` matrix: column `t` counts the words found up to two
/// positions before each occurrence of `t` (rows `0..V`) and up to two
/// positions after it (rows `V..2V`). Tokens outside `vocab` are skipped.
pub fn context_matrix(sentences: &[Vec<String>], vocab: &Vocabulary) -> Result<SparseColumns> {
    let v = vocab.len();
    if v == 0 || sentences.is_empty() {
        return Err(param_err!("empty corpus"));
    }
    let mut pairs: Vec<u64> = Vec::new();
    for s in sentences {
        let ids: Vec<usize> = s.iter().filter_map(|t| vocab.lookup(t)).collect();
        for (p, &t) in ids.iter().enumerate() {
            for d in 1..=2 {
                if p >= d {
                    pairs.push(((t as u64) << 32) | ids[p - d] as u64);
                }
                if let Some(&after) = ids.get(p + d) {
                    pairs.push(((t as u64) << 32) | (v + after) as u64);
                }
            }
        }
    }
    pairs.sort_unstable();

    let mut b = SparseBuilder::new(2 * v);
    let mut entries: Vec<(usize, f64)> = Vec::new();
    let mut cursor = 0;
    for col in 0..v as u64 {
        entries.clear();
        while cursor < pairs.len() && pairs[cursor] >> 32 == col {
            let row = (pairs[cursor] & 0xFFFF_FFFF) as usize;
            match entries.last_mut() {
                Some((r, c)) if *r == row => *c += 1.0,
                _ => entries.push((row, 1.0)),
            }
            cursor += 1;
        }
        b.push_sorted(&entries)?;
    }
    b.finish()
}

pub fn fit_context_semantics(
    sentences: &[Vec<String>],
    vocab: &Vocabulary,
    k: usize,
    seed: u64,
) -> Result<(EmbeddingModel, DMatrix<f64>)> {
    let x = ColumnMatrix::Sparse(context_matrix(sentences, vocab)?);
    let (model, p) = fit(&x, k, seed)?;
    Ok((model.with_label("context"), p))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictionaryEntry {
    pub word: String,
    pub synonyms: Vec<String>,
    pub antonyms: Vec<String>,
}

impl DictionaryEntry {
    pub fn new(word: impl Into<String>, synonyms: Vec<String>, antonyms: Vec<String>) -> Result<Self> {
        let word = word.into();
        if word.is_empty() {
            return Err(param_err!("dictionary word must be non-empty"));
        }
        Ok(Self {
            word,
            synonyms,
            antonyms,
        })
    }
}

/// Column per entry: `[ortho slice; synonym one-hot; antonym one-hot]`.
/// `ortho` is `ortho_dim × entries`. Synonym and antonym slots follow the
/// lexicographic order of the distinct strings.
pub fn dictionary_matrix(entries: &[DictionaryEntry], ortho: &DMatrix<f64>) -> Result<SparseColumns> {
    if ortho.ncols() != entries.len() {
        return Err(param_err!(
            "{} orthographic columns for {} entries",
            ortho.ncols(),
            entries.len()
        ));
    }
    let syn: Vec<&str> = entries
        .iter()
        .flat_map(|e| e.synonyms.iter().map(String::as_str))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let ant: Vec<&str> = entries
        .iter()
        .flat_map(|e| e.antonyms.iter().map(String::as_str))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let d = ortho.nrows();
    let slot = |universe: &[&str], s: &str| universe.binary_search(&s).expect("collected above");

    let mut b = SparseBuilder::new(d + syn.len() + ant.len());
    let mut col: Vec<(usize, f64)> = Vec::new();
    for (j, e) in entries.iter().enumerate() {
        col.clear();
        col.extend(ortho.column(j).iter().enumerate().map(|(i, v)| (i, *v)));
        let mut s: Vec<usize> = e.synonyms.iter().map(|w| d + slot(&syn, w)).collect();
        s.sort_unstable();
        s.dedup();
        col.extend(s.into_iter().map(|i| (i, 1.0)));
        let mut a: Vec<usize> = e.antonyms.iter().map(|w| d + syn.len() + slot(&ant, w)).collect();
        a.sort_unstable();
        a.dedup();
        col.extend(a.into_iter().map(|i| (i, 1.0)));
        b.push_sorted(&col)?;
    }
    b.finish()
}

/// Orthographic embeddings of the entry words (divided by the norm of the
/// orthography model's singular values), stacked over synonym and antonym
/// one-hots, then factorized.
pub fn fit_dictionary_semantics(
    entries: &[DictionaryEntry],
    cfg: &SpectralConfig,
    ortho_dim: usize,
    k: usize,
    seed: u64,
) -> Result<(EmbeddingModel, DMatrix<f64>)> {
    if entries.is_empty() {
        return Err(param_err!("no dictionary entries"));
    }
    let words: Vec<&str> = entries.iter().map(|e| e.word.as_str()).collect();
    let (ortho_model, mut ortho) = fit_orthography(&words, cfg, ortho_dim, seed)?;
    let norm = ortho_model.spectrum().iter().map(|s| s * s).sum::<f64>().sqrt();
    if norm > 0.0 {
        ortho /= norm;
    }
    let x = ColumnMatrix::Sparse(dictionary_matrix(entries, &ortho)?);
    let (model, p) = fit(&x, k, seed)?;
    Ok((model.with_label("dictionary"), p))
}

#[derive(Debug, Clone)]
pub struct SentenceFit {
    pub model: EmbeddingModel,
    /// `k × kept.len()`.
    pub embeddings: DMatrix<f64>,
    /// Indices into the input sentence list, one per embedding column.
    pub kept: Vec<usize>,
    pub skipped_unknown: usize,
    pub skipped_long: usize,
}

/// Spectral encoding of a sentence from per-token vectors (`dim × V`,
/// columns in `vocab` order). `None` when a token is unknown.
pub fn sentence_encoding(
    sentence: &[String],
    vocab: &Vocabulary,
    word_vectors: &DMatrix<f64>,
    transform: &SpectralTransform,
) -> Result<Option<Vec<f64>>> {
    let d = word_vectors.nrows();
    let mut flat = Vec::with_capacity(sentence.len() * d);
    for t in sentence {
        match vocab.lookup(t) {
            Some(i) => flat.extend_from_slice(word_vectors.column(i).as_slice()),
            None => return Ok(None),
        }
    }
    let seq = VectorSequence::from_flat(d, flat)?;
    Ok(Some(transform.transform_flat(&seq)))
}

pub fn fit_sentences(
    sentences: &[Vec<String>],
    vocab: &Vocabulary,
    word_vectors: &DMatrix<f64>,
    cfg: &SpectralConfig,
    k: usize,
    seed: u64,
) -> Result<SentenceFit> {
    if word_vectors.ncols() != vocab.len() {
        return Err(param_err!(
            "{} word vectors for a vocabulary of {}",
            word_vectors.ncols(),
            vocab.len()
        ));
    }
    let transform = SpectralTransform::new(*cfg);
    let dim = word_vectors.nrows() * cfg.bands();
    let mut data = Vec::new();
    let mut kept = Vec::new();
    let (mut skipped_unknown, mut skipped_long) = (0, 0);
    for (i, s) in sentences.iter().enumerate() {
        if s.is_empty() {
            continue;
        }
        if s.len() > MAX_SENTENCE_TOKENS {
            skipped_long += 1;
            continue;
        }
        match sentence_encoding(s, vocab, word_vectors, &transform)? {
            Some(col) => {
                data.extend(col);
                kept.push(i);
            }
            None => skipped_unknown += 1,
        }
    }
    if kept.is_empty() {
        return Err(param_err!("no encodable sentences"));
    }
    let x = ColumnMatrix::Dense(DMatrix::from_vec(dim, kept.len(), data));
    let (model, embeddings) = fit(&x, k, seed)?;
    Ok(SentenceFit {
        model: model.with_label("sentences"),
        embeddings,
        kept,
        skipped_unknown,
        skipped_long,
    })
}
