//! Dataset readers: text corpora, dictionary JSON and IDX image files.

use std::collections::BTreeMap;
use std::path::Path;

use veob::pipelines::{tokenize, DictionaryEntry, LabeledImage, Vocabulary, IMAGE_SIDE};
use walkdir::WalkDir;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct Corpus {
    pub vocab: Vocabulary,
    pub sentences: Vec<Vec<String>>,
    pub files: usize,
    pub skipped_files: usize,
}

/// Tokenizes every regular file under `dir`, in path order.
pub fn ingest_corpus(dir: &Path) -> CliResult<Corpus> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("{} is not a directory", dir.display())));
    }
    let mut sentences = Vec::new();
    let (mut files, mut skipped_files) = (0, 0);
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let Ok(entry) = entry else {
            skipped_files += 1;
            continue;
        };
        if !entry.file_type().is_file() {
            continue;
        }
        match std::fs::read(entry.path()) {
            Ok(bytes) => {
                files += 1;
                sentences.extend(tokenize(&String::from_utf8_lossy(&bytes)));
            }
            Err(_) => skipped_files += 1,
        }
    }
    if sentences.is_empty() {
        return Err(CliError::Format(format!("no sentences found under {}", dir.display())));
    }
    let vocab = Vocabulary::from_sentences(&sentences);
    Ok(Corpus {
        vocab,
        sentences,
        files,
        skipped_files,
    })
}

#[derive(Debug, Clone)]
pub struct Dictionary {
    /// Sorted by word.
    pub entries: Vec<DictionaryEntry>,
    pub dropped_non_ascii: usize,
}

/// Reads `{word: {syn_key: [..], ant_key: [..]}}`. Words are lowercased and
/// entries that collide after lowercasing are merged.
pub fn ingest_dictionary(path: &Path, syn_key: &str, ant_key: &str) -> CliResult<Dictionary> {
    let text = std::fs::read_to_string(path)?;
    parse_dictionary(&text, syn_key, ant_key)
}

pub fn parse_dictionary(text: &str, syn_key: &str, ant_key: &str) -> CliResult<Dictionary> {
    let root: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        CliError::Format(format!(
            "dictionary JSON at line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| CliError::Format("dictionary JSON must be an object".into()))?;
    let list = |v: &serde_json::Value, key: &str| -> Vec<String> {
        v.get(key)
            .and_then(|a| a.as_array())
            .map(|a| {
                a.iter()
                    .filter_map(|s| s.as_str())
                    .map(|s| s.to_lowercase())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default()
    };
    let mut merged: BTreeMap<String, (Vec<String>, Vec<String>)> = BTreeMap::new();
    let mut dropped_non_ascii = 0;
    for (word, v) in obj {
        let w = word.to_lowercase();
        if w.is_empty() || !w.is_ascii() || w.chars().any(|c| c.is_ascii_control()) {
            dropped_non_ascii += 1;
            continue;
        }
        let e = merged.entry(w).or_default();
        e.0.extend(list(v, syn_key));
        e.1.extend(list(v, ant_key));
    }
    let entries = merged
        .into_iter()
        .map(|(w, (mut s, mut a))| {
            s.sort();
            s.dedup();
            a.sort();
            a.dedup();
            DictionaryEntry::new(w, s, a)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dictionary {
        entries,
        dropped_non_ascii,
    })
}

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(b: &[u8], at: usize) -> CliResult<u32> {
    b.get(at..at + 4)
        .map(|s| u32::from_be_bytes(s.try_into().expect("4 bytes")))
        .ok_or_else(|| CliError::Format("IDX header is truncated".into()))
}

pub fn parse_idx_images(bytes: &[u8]) -> CliResult<Vec<Vec<u8>>> {
    if be_u32(bytes, 0)? != IMAGES_MAGIC {
        return Err(CliError::Format("IDX images magic mismatch".into()));
    }
    let count = be_u32(bytes, 4)? as usize;
    let (rows, cols) = (be_u32(bytes, 8)? as usize, be_u32(bytes, 12)? as usize);
    if rows != IMAGE_SIDE || cols != IMAGE_SIDE {
        return Err(CliError::Format(format!("IDX images are {rows}x{cols}, expected 28x28")));
    }
    let size = rows * cols;
    let body = &bytes[16..];
    if body.len() != count * size {
        return Err(CliError::Format(format!(
            "IDX images payload has {} bytes, header implies {}",
            body.len(),
            count * size
        )));
    }
    Ok(body.chunks_exact(size).map(<[u8]>::to_vec).collect())
}

pub fn parse_idx_labels(bytes: &[u8]) -> CliResult<Vec<u8>> {
    if be_u32(bytes, 0)? != LABELS_MAGIC {
        return Err(CliError::Format("IDX labels magic mismatch".into()));
    }
    let count = be_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(CliError::Format(format!(
            "IDX labels payload has {} bytes, header implies {count}",
            body.len()
        )));
    }
    Ok(body.to_vec())
}

pub fn ingest_mnist(images: &Path, labels: &Path) -> CliResult<Vec<LabeledImage>> {
    let px = parse_idx_images(&std::fs::read(images)?)?;
    let lb = parse_idx_labels(&std::fs::read(labels)?)?;
    if px.len() != lb.len() {
        return Err(CliError::Format(format!(
            "{} images but {} labels",
            px.len(),
            lb.len()
        )));
    }
    px.into_iter()
        .zip(lb)
        .map(|(p, l)| LabeledImage::new(p, l).map_err(|e| CliError::Format(e.to_string())))
        .collect()
}

/// Serializes images and labels in IDX form (used for fixtures).
pub fn write_idx(images: &[LabeledImage]) -> (Vec<u8>, Vec<u8>) {
    let mut px = Vec::with_capacity(16 + images.len() * 784);
    px.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    px.extend_from_slice(&(images.len() as u32).to_be_bytes());
    px.extend_from_slice(&(IMAGE_SIDE as u32).to_be_bytes());
    px.extend_from_slice(&(IMAGE_SIDE as u32).to_be_bytes());
    let mut lb = Vec::with_capacity(8 + images.len());
    lb.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    lb.extend_from_slice(&(images.len() as u32).to_be_bytes());
    for img in images {
        px.extend_from_slice(img.pixels());
        lb.push(img.label());
    }
    (px, lb)
}
