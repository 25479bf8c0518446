use nalgebra::DMatrix;
use veob::partition::PartitionTree;
use veob::pipelines::{
    fit_context_semantics, fit_dictionary_semantics, fit_images, fit_orthography, fit_sentences, LabeledImage,
};

use super::{SpectralOpts, TreeOpts};
use crate::bundle::Bundle;
use crate::error::CliResult;
use crate::ingest::{Corpus, Dictionary};
use crate::report::RunReport;

fn base_bundle(kind: &str, report: &RunReport) -> Bundle {
    let mut b = Bundle::new();
    b.put_text("kind", kind);
    b.put_text(
        "params",
        &serde_json::to_string(&report.parameters).expect("parameters serialize"),
    );
    b
}

fn index(
    b: &mut Bundle,
    report: &mut RunReport,
    embeddings: &DMatrix<f64>,
    tree: &TreeOpts,
    seed: u64,
) -> CliResult<()> {
    let t = PartitionTree::build(embeddings, &tree.params(seed))?;
    report.count("cells", t.cells().len());
    b.put_matrix("embeddings", embeddings);
    b.put_tree("tree", &t);
    report.stage("index");
    Ok(())
}

fn tree_params(report: &mut RunReport, tree: &TreeOpts) {
    report.param("min_cell", tree.min_cell).param("max_levels", tree.max_levels.0);
}

fn corpus_counts(report: &mut RunReport, c: &Corpus) {
    report
        .count("files", c.files)
        .count("skipped_files", c.skipped_files)
        .count("sentences", c.sentences.len())
        .count("tokens", c.vocab.len());
}

pub fn embed_words(
    corpus: &Corpus,
    k: usize,
    spectral: &SpectralOpts,
    tree: &TreeOpts,
    seed: u64,
) -> CliResult<(Bundle, RunReport)> {
    let mut r = RunReport::new("embed-words");
    r.param("k", k)
        .param("dct_n", spectral.dct_n)
        .param("dct_m", spectral.dct_m)
        .param("seed", seed);
    tree_params(&mut r, tree);
    corpus_counts(&mut r, corpus);
    let cfg = spectral.config()?;
    let tokens = corpus.vocab.tokens();
    let truncated = tokens.iter().filter(|t| t.len() > spectral.dct_n).count();
    r.count("truncated_tokens", truncated);
    let (model, p) = fit_orthography(tokens, &cfg, k, seed)?;
    r.stage("fit");
    let mut b = base_bundle("words", &r);
    b.put_model("model", &model);
    b.put_strings("tokens", tokens);
    index(&mut b, &mut r, &p, tree, seed)?;
    Ok((b, r))
}

pub fn embed_context(corpus: &Corpus, k: usize, tree: &TreeOpts, seed: u64) -> CliResult<(Bundle, RunReport)> {
    let mut r = RunReport::new("embed-context");
    r.param("k", k).param("seed", seed);
    tree_params(&mut r, tree);
    corpus_counts(&mut r, corpus);
    let (model, p) = fit_context_semantics(&corpus.sentences, &corpus.vocab, k, seed)?;
    r.stage("fit");
    let mut b = base_bundle("context", &r);
    b.put_model("model", &model);
    b.put_strings("tokens", corpus.vocab.tokens());
    index(&mut b, &mut r, &p, tree, seed)?;
    Ok((b, r))
}

pub fn embed_dict(
    dict: &Dictionary,
    k: usize,
    ortho_dim: usize,
    spectral: &SpectralOpts,
    tree: &TreeOpts,
    seed: u64,
) -> CliResult<(Bundle, RunReport)> {
    let mut r = RunReport::new("embed-dict");
    r.param("k", k)
        .param("ortho_dim", ortho_dim)
        .param("dct_n", spectral.dct_n)
        .param("dct_m", spectral.dct_m)
        .param("seed", seed);
    tree_params(&mut r, tree);
    r.count("entries", dict.entries.len())
        .count("dropped_non_ascii", dict.dropped_non_ascii);
    let cfg = spectral.config()?;
    let (model, p) = fit_dictionary_semantics(&dict.entries, &cfg, ortho_dim, k, seed)?;
    r.stage("fit");
    let words: Vec<&str> = dict.entries.iter().map(|e| e.word.as_str()).collect();
    let mut b = base_bundle("dictionary", &r);
    b.put_model("model", &model);
    b.put_strings("tokens", &words);
    index(&mut b, &mut r, &p, tree, seed)?;
    Ok((b, r))
}

pub fn embed_sentences(
    corpus: &Corpus,
    k: usize,
    word_k: usize,
    spectral: &SpectralOpts,
    tree: &TreeOpts,
    seed: u64,
) -> CliResult<(Bundle, RunReport)> {
    let mut r = RunReport::new("embed-sentences");
    r.param("k", k)
        .param("word_k", word_k)
        .param("dct_n", spectral.dct_n)
        .param("dct_m", spectral.dct_m)
        .param("seed", seed);
    tree_params(&mut r, tree);
    corpus_counts(&mut r, corpus);
    let cfg = spectral.config()?;
    let (word_model, words) = fit_context_semantics(&corpus.sentences, &corpus.vocab, word_k, seed)?;
    r.stage("fit-words");
    let fit = fit_sentences(&corpus.sentences, &corpus.vocab, &words, &cfg, k, seed)?;
    r.count("kept_sentences", fit.kept.len())
        .count("skipped_unknown", fit.skipped_unknown)
        .count("skipped_long", fit.skipped_long)
        .count(
            "truncated_sentences",
            fit.kept
                .iter()
                .filter(|&&i| corpus.sentences[i].len() > spectral.dct_n)
                .count(),
        );
    r.stage("fit-sentences");
    let text: Vec<String> = fit.kept.iter().map(|&i| corpus.sentences[i].join(" ")).collect();
    let mut b = base_bundle("sentences", &r);
    b.put_model("model", &fit.model);
    b.put_strings("sentences", &text);
    b.put_model("word_model", &word_model);
    b.put_strings("word_tokens", corpus.vocab.tokens());
    b.put_matrix("word_vectors", &words);
    index(&mut b, &mut r, &fit.embeddings, tree, seed)?;
    Ok((b, r))
}

pub fn embed_images(images: &[LabeledImage], k: usize, tree: &TreeOpts, seed: u64) -> CliResult<(Bundle, RunReport)> {
    let mut r = RunReport::new("embed-images");
    r.param("k", k).param("seed", seed).param("dct_n", 28);
    tree_params(&mut r, tree);
    r.count("images", images.len());
    let idx = fit_images(images, k, &tree.params(seed))?;
    r.count("cells", idx.tree.cells().len());
    r.stage("fit");
    let mut b = base_bundle("images", &r);
    b.put_model("model", &idx.model);
    let labels: Vec<u32> = idx.labels.iter().map(|&l| l as u32).collect();
    b.put_u32s("labels", &labels);
    b.put_matrix("embeddings", &idx.embeddings);
    b.put_tree("tree", &idx.tree);
    r.stage("store");
    Ok((b, r))
}
