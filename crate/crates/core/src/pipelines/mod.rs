//! Encoders and fit flows for words, contexts, dictionary entries, sentences
//! and images.

mod images;
mod text;

pub use images::{classify_image, fit_images, image_coefficients, Classification, ImageIndex, LabeledImage, IMAGE_SIDE};
pub use text::{
    context_matrix, dictionary_matrix, encode_letters, fit_context_semantics, fit_dictionary_semantics,
    fit_orthography, fit_sentences, orthography_encode, orthography_matrix, sentence_encoding, DictionaryEntry, SentenceFit,
    ALPHABET, MAX_SENTENCE_TOKENS,
};

use std::collections::{BTreeSet, HashMap};

/// Lowercases, splits sentences on `.`, `!` and `?`, and tokens on any
/// non-alphanumeric character. Tokens containing digits or non-ASCII
/// characters are dropped, and so are sentences left empty.
pub fn tokenize(text: &str) -> Vec<Vec<String>> {
    let lower = text.to_lowercase();
    lower
        .split(['.', '!', '?'])
        .map(|s| {
            s.split(|c: char| !c.is_alphanumeric())
                .filter(|t| !t.is_empty() && t.chars().all(|c| c.is_ascii_lowercase()))
                .map(str::to_owned)
                .collect::<Vec<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Distinct tokens in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = tokens.into_iter().map(Into::into).collect();
        let tokens: Vec<String> = set.into_iter().collect();
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, index }
    }

    pub fn from_sentences(sentences: &[Vec<String>]) -> Self {
        Self::from_tokens(sentences.iter().flatten().cloned())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn lookup(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_rules() {
        let s = tokenize("A cat. A dog!  Is it 2nd? Café au lait... x-ray");
        assert_eq!(
            s,
            vec![
                vec!["a", "cat"],
                vec!["a", "dog"],
                vec!["is", "it"],
                vec!["au", "lait"],
                vec!["x", "ray"],
            ]
        );
    }

    #[test]
    fn vocabulary_is_sorted_and_dense() {
        let v = Vocabulary::from_tokens(["dog", "a", "cat", "a"]);
        assert_eq!(v.tokens(), &["a", "cat", "dog"]);
        for i in 0..v.len() {
            assert_eq!(v.lookup(v.token(i)), Some(i));
        }
        assert_eq!(v.lookup("emu"), None);
    }
}
