use std::fmt::Write as _;

use nalgebra::DMatrix;
use veob::pipelines::{
    classify_image, image_coefficients, orthography_encode, sentence_encoding, tokenize, ImageIndex, LabeledImage,
    Vocabulary,
};
use veob::spectral::SpectralTransform;
use veob::{PartitionTree, SpectralConfig};

use crate::bundle::Bundle;
use crate::error::{CliError, CliResult};

/// `index,sigma` rows, index starting at 1.
pub fn spectrum_csv(bundle: &Bundle) -> CliResult<String> {
    let model = bundle.model("model")?;
    let mut out = String::from("index,sigma\n");
    for (i, s) in model.spectrum().iter().enumerate() {
        writeln!(out, "{},{s}", i + 1).expect("string write");
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum QueryTarget {
    Token(String),
    Sentence(String),
    StoredImage(usize),
    ExternalImage(Vec<LabeledImage>, usize),
}

fn indexed(bundle: &Bundle) -> CliResult<(DMatrix<f64>, PartitionTree)> {
    let samples = bundle.matrix("embeddings")?;
    let tree = bundle.tree("tree", &samples)?;
    Ok((samples, tree))
}

fn spectral_config(bundle: &Bundle) -> CliResult<SpectralConfig> {
    let params: serde_json::Value = serde_json::from_str(&bundle.text("params")?)
        .map_err(|e| CliError::Format(format!("bundle parameters: {e}")))?;
    let get = |k: &str| {
        params
            .get(k)
            .and_then(|v| v.as_u64())
            .map(|v| v as usize)
            .ok_or_else(|| CliError::Format(format!("bundle parameters lack {k}")))
    };
    Ok(SpectralConfig::new(get("dct_n")?, 1, get("dct_m")?)?)
}

fn stored_column(samples: &DMatrix<f64>, i: usize) -> CliResult<Vec<f64>> {
    if i >= samples.ncols() {
        return Err(CliError::Usage(format!(
            "index {i} out of range for {} stored items",
            samples.ncols()
        )));
    }
    Ok(samples.column(i).as_slice().to_vec())
}

/// Ranked `(item, distance)` pairs. Stored items are looked up by their
/// stored embedding, so a stored item finds itself at distance 0.
pub fn query(bundle: &Bundle, target: &QueryTarget, top: usize) -> CliResult<Vec<(String, f64)>> {
    let kind = bundle.text("kind")?;
    let (samples, tree) = indexed(bundle)?;
    let (q, names): (Vec<f64>, Vec<String>) = match (kind.as_str(), target) {
        ("words" | "context" | "dictionary", QueryTarget::Token(t)) => {
            let tokens = bundle.strings("tokens")?;
            let t = t.to_lowercase();
            let q = match tokens.binary_search(&t) {
                Ok(i) => stored_column(&samples, i)?,
                Err(_) if kind == "words" => {
                    let model = bundle.model("model")?;
                    model.embed(&orthography_encode(&t, &spectral_config(bundle)?)?)?
                }
                Err(_) => return Err(CliError::Usage(format!("token {t:?} is not in the bundle"))),
            };
            (q, tokens)
        }
        ("sentences", QueryTarget::Sentence(s)) => {
            let words: Vec<String> = tokenize(s).into_iter().flatten().collect();
            let text = words.join(" ");
            let sentences = bundle.strings("sentences")?;
            let q = match sentences.iter().position(|x| *x == text) {
                Some(i) => stored_column(&samples, i)?,
                None => {
                    let vocab = Vocabulary::from_tokens(bundle.strings("word_tokens")?);
                    let vectors = bundle.matrix("word_vectors")?;
                    let transform = SpectralTransform::new(spectral_config(bundle)?);
                    let enc = sentence_encoding(&words, &vocab, &vectors, &transform)?
                        .ok_or_else(|| CliError::Usage("sentence has words outside the vocabulary".into()))?;
                    bundle.model("model")?.embed(&enc)?
                }
            };
            (q, sentences)
        }
        ("images", QueryTarget::StoredImage(i)) | ("images", QueryTarget::ExternalImage(_, i)) => {
            let labels = bundle.u32s("labels")?;
            let q = match target {
                QueryTarget::ExternalImage(images, _) => {
                    let img = images
                        .get(*i)
                        .ok_or_else(|| CliError::Usage(format!("image index {i} out of range")))?;
                    bundle.model("model")?.embed(&image_coefficients(img))?
                }
                _ => stored_column(&samples, *i)?,
            };
            let names = labels
                .iter()
                .enumerate()
                .map(|(id, l)| format!("#{id} label={l}"))
                .collect();
            (q, names)
        }
        (kind, _) => {
            return Err(CliError::Usage(format!(
                "this query type does not apply to a {kind:?} bundle"
            )))
        }
    };
    let hits = tree.knn(&samples, &q, top)?;
    Ok(hits
        .into_iter()
        .map(|h| (names[h.id].clone(), h.distance))
        .collect())
}

pub fn load_image_index(bundle: &Bundle) -> CliResult<ImageIndex> {
    let kind = bundle.text("kind")?;
    if kind != "images" {
        return Err(CliError::Usage(format!("expected an images bundle, got {kind:?}")));
    }
    let model = bundle.model("model")?;
    let (embeddings, tree) = indexed(bundle)?;
    let labels = bundle
        .u32s("labels")?
        .into_iter()
        .map(|l| u8::try_from(l).map_err(|_| CliError::Format("label out of range".into())))
        .collect::<CliResult<Vec<u8>>>()?;
    Ok(ImageIndex {
        model,
        embeddings,
        tree,
        labels,
    })
}

/// `(matches, total)` over `images`.
pub fn eval_images(index: &ImageIndex, images: &[LabeledImage], top: usize) -> CliResult<(usize, usize)> {
    let mut hits = 0;
    for img in images {
        if classify_image(index, img, top)?.matched {
            hits += 1;
        }
    }
    Ok((hits, images.len()))
}
