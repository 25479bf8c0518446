//! Subcommand definitions and dispatch.

mod embed;
mod lookup;
mod learn;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use veob::partition::TreeParams;
use veob::supervised::Alpha;
use veob::SpectralConfig;

pub use embed::{embed_context, embed_dict, embed_images, embed_sentences, embed_words};
pub use learn::{predict, read_features, read_labels, train, Target};
pub use lookup::{eval_images, load_image_index, query, spectrum_csv, QueryTarget};

use crate::bundle::Bundle;
use crate::error::{CliError, CliResult};
use crate::ingest;
use crate::report::RunReport;

#[derive(Debug, Parser)]
#[command(name = "veob", version, about = "SVD-basis embeddings, spectral transforms and partition-tree search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Tree depth limit; `None` derives it from the sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Levels(pub Option<usize>);

fn parse_levels(s: &str) -> Result<Levels, String> {
    if s == "auto" {
        return Ok(Levels(None));
    }
    s.parse()
        .map(|v| Levels(Some(v)))
        .map_err(|_| format!("expected `auto` or a count, got {s:?}"))
}

fn parse_alpha(s: &str) -> Result<Alpha, String> {
    if s == "auto" {
        return Ok(Alpha::Auto);
    }
    match s.parse::<f64>() {
        Ok(a) if a.is_finite() && a > 0.0 => Ok(Alpha::Fixed(a)),
        _ => Err(format!("expected `auto` or a positive number, got {s:?}")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct TreeOpts {
    #[arg(long, default_value_t = 64)]
    pub min_cell: usize,
    #[arg(long, default_value = "auto", value_parser = parse_levels)]
    pub max_levels: Levels,
}

impl TreeOpts {
    pub fn params(&self, seed: u64) -> TreeParams {
        TreeParams {
            max_levels: self.max_levels.0,
            min_cell: self.min_cell,
            seed,
        }
    }
}

impl Default for TreeOpts {
    fn default() -> Self {
        Self {
            min_cell: 64,
            max_levels: Levels(None),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectralOpts {
    /// Number of sequence points N.
    #[arg(long, default_value_t = 15)]
    pub dct_n: usize,
    /// Highest kept band; bands 1..=m are used.
    #[arg(long, default_value_t = 6)]
    pub dct_m: usize,
}

impl SpectralOpts {
    pub fn config(&self) -> CliResult<SpectralConfig> {
        Ok(SpectralConfig::new(self.dct_n, 1, self.dct_m)?)
    }
}

impl Default for SpectralOpts {
    fn default() -> Self {
        Self { dct_n: 15, dct_m: 6 }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spelling embeddings of every corpus token.
    EmbedWords {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        k: usize,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[command(flatten)]
        tree: TreeOpts,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Before/after context-count embeddings of every corpus token.
    EmbedContext {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[command(flatten)]
        tree: TreeOpts,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Spelling plus synonym/antonym embeddings of dictionary words.
    EmbedDict {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 300)]
        k: usize,
        #[arg(long, default_value_t = 30)]
        ortho_dim: usize,
        #[arg(long, default_value = "SYNONYMS")]
        syn_key: String,
        #[arg(long, default_value = "ANTONYMS")]
        ant_key: String,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[command(flatten)]
        tree: TreeOpts,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Sentence embeddings from spectral coefficients of context word vectors.
    EmbedSentences {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        word_k: usize,
        #[command(flatten)]
        spectral: SpectralOpts,
        #[command(flatten)]
        tree: TreeOpts,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Image embeddings from 2D spectral coefficients, indexed for search.
    EmbedImages {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        k: usize,
        #[command(flatten)]
        tree: TreeOpts,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Singular values of a bundle's model as `index,sigma` CSV.
    Spectrum {
        #[arg(long)]
        bundle: PathBuf,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nearest stored items to a token, sentence or image.
    Query {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, group = "target")]
        token: Option<String>,
        #[arg(long, group = "target")]
        sentence: Option<String>,
        #[arg(long, group = "target")]
        image_index: Option<usize>,
        /// IDX images to take `--image-index` from (default: stored training set).
        #[arg(long, requires = "image_index")]
        images: Option<PathBuf>,
        #[arg(long, requires = "images")]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Fit a cell-wise linear model from CSV features and targets or labels.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, group = "y")]
        targets: Option<PathBuf>,
        /// One integer class id per line.
        #[arg(long, group = "y")]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        kx: usize,
        #[arg(long, default_value_t = 1)]
        ky: usize,
        #[arg(long)]
        kz: usize,
        #[arg(long, default_value = "auto", value_parser = parse_alpha)]
        alpha: Alpha,
        #[command(flatten)]
        tree: TreeOpts,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Predict every row of a features CSV.
    Predict {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Top-N label accuracy of an image bundle over an IDX test set.
    EvalImages {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 3)]
        top: usize,
    },
}

fn finish(bundle: Bundle, report: RunReport, out: &Path, stdout: &mut dyn Write) -> CliResult<()> {
    bundle.save(out)?;
    writeln!(stdout, "{}", report.to_json())?;
    Ok(())
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::EmbedWords {
            corpus,
            out,
            k,
            spectral,
            tree,
            seed,
        } => {
            let c = ingest::ingest_corpus(&corpus)?;
            let (b, r) = embed_words(&c, k, &spectral, &tree, seed)?;
            finish(b, r, &out, stdout)
        }
        Command::EmbedContext {
            corpus,
            out,
            k,
            tree,
            seed,
        } => {
            let c = ingest::ingest_corpus(&corpus)?;
            let (b, r) = embed_context(&c, k, &tree, seed)?;
            finish(b, r, &out, stdout)
        }
        Command::EmbedDict {
            dict,
            out,
            k,
            ortho_dim,
            syn_key,
            ant_key,
            spectral,
            tree,
            seed,
        } => {
            let d = ingest::ingest_dictionary(&dict, &syn_key, &ant_key)?;
            let (b, r) = embed_dict(&d, k, ortho_dim, &spectral, &tree, seed)?;
            finish(b, r, &out, stdout)
        }
        Command::EmbedSentences {
            corpus,
            out,
            k,
            word_k,
            spectral,
            tree,
            seed,
        } => {
            let c = ingest::ingest_corpus(&corpus)?;
            let (b, r) = embed_sentences(&c, k, word_k, &spectral, &tree, seed)?;
            finish(b, r, &out, stdout)
        }
        Command::EmbedImages {
            images,
            labels,
            out,
            k,
            tree,
            seed,
        } => {
            let imgs = ingest::ingest_mnist(&images, &labels)?;
            let (b, r) = embed_images(&imgs, k, &tree, seed)?;
            finish(b, r, &out, stdout)
        }
        Command::Spectrum { bundle, out } => {
            let csv = spectrum_csv(&Bundle::load(&bundle)?)?;
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => stdout.write_all(csv.as_bytes())?,
            }
            Ok(())
        }
        Command::Query {
            bundle,
            token,
            sentence,
            image_index,
            images,
            labels,
            top,
        } => {
            let target = match (token, sentence, image_index) {
                (Some(t), None, None) => QueryTarget::Token(t),
                (None, Some(s), None) => QueryTarget::Sentence(s),
                (None, None, Some(i)) => match (images, labels) {
                    (Some(im), Some(lb)) => QueryTarget::ExternalImage(ingest::ingest_mnist(&im, &lb)?, i),
                    (None, None) => QueryTarget::StoredImage(i),
                    _ => return Err(CliError::Usage("--images and --labels go together".into())),
                },
                _ => {
                    return Err(CliError::Usage(
                        "give exactly one of --token, --sentence, --image-index".into(),
                    ))
                }
            };
            let rows = query(&Bundle::load(&bundle)?, &target, top)?;
            for (rank, (item, d)) in rows.iter().enumerate() {
                writeln!(stdout, "{}\t{item}\t{d}", rank + 1)?;
            }
            Ok(())
        }
        Command::Train {
            features,
            targets,
            labels,
            out,
            kx,
            ky,
            kz,
            alpha,
            tree,
            seed,
        } => {
            let x = read_features(&features)?;
            let y = match (targets, labels) {
                (Some(t), None) => learn::Target::Values(read_features(&t)?),
                (None, Some(l)) => learn::Target::Labels(read_labels(&l)?),
                _ => return Err(CliError::Usage("give exactly one of --targets, --labels".into())),
            };
            let (b, r) = train(&x, &y, kx, ky, kz, alpha, &tree, seed)?;
            finish(b, r, &out, stdout)
        }
        Command::Predict { bundle, features } => {
            let x = read_features(&features)?;
            predict(&Bundle::load(&bundle)?, &x, stdout)
        }
        Command::EvalImages {
            bundle,
            images,
            labels,
            top,
        } => {
            let index = load_image_index(&Bundle::load(&bundle)?)?;
            let imgs = ingest::ingest_mnist(&images, &labels)?;
            let (hits, n) = eval_images(&index, &imgs, top)?;
            writeln!(
                stdout,
                "top-{top} accuracy: {:.4} ({hits}/{n})",
                hits as f64 / n.max(1) as f64
            )?;
            Ok(())
        }
    }
}
