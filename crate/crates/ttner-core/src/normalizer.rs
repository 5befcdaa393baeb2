//! Pluggable token normalization: a stand-in interface for external
//! social-media normalizers, with identity, lexicon-lookup and
//! ASCII-deasciification implementations.

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fs;
use std::path::Path;

/// A total, deterministic token→token rewrite. Shipped implementations
/// are idempotent.
pub trait Normalizer: Send + Sync {
    fn name(&self) -> &str;
    fn normalize(&self, token: &str) -> String;
}

/// Leaves every token unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityNormalizer;

impl Normalizer for IdentityNormalizer {
    fn name(&self) -> &str {
        "none"
    }

    fn normalize(&self, token: &str) -> String {
        token.to_string()
    }
}

/// Exact-match replacement from an ill-formed→normalized lexicon; tokens
/// absent from the lexicon pass through.
#[derive(Debug, Clone)]
pub struct LexiconNormalizer {
    name: String,
    map: HashMap<String, String>,
}

static DEASCIIFY_DATA: &str = include_str!("../data/deasciify_lexicon.tsv");

impl LexiconNormalizer {
    pub fn from_str(text: &str, name: &str) -> Result<LexiconNormalizer> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(from), Some(to), None) if !from.is_empty() && !to.is_empty() => {
                    map.insert(from.to_string(), to.to_string());
                }
                _ => {
                    return Err(Error::MalformedLine {
                        line: i + 1,
                        msg: format!("expected \"illformed<TAB>normalized\", got {line:?}"),
                    })
                }
            }
        }
        Ok(LexiconNormalizer {
            name: name.to_string(),
            map,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<LexiconNormalizer> {
        LexiconNormalizer::from_str(&fs::read_to_string(path)?, "lexicon")
    }

    /// The embedded Turkish deasciification lexicon (cok→çok, icin→için,
    /// ...).
    pub fn deasciify() -> LexiconNormalizer {
        LexiconNormalizer::from_str(DEASCIIFY_DATA, "deasciify")
            .expect("embedded lexicon is well-formed")
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl Normalizer for LexiconNormalizer {
    fn name(&self) -> &str {
        &self.name
    }

    fn normalize(&self, token: &str) -> String {
        match self.map.get(token) {
            Some(normalized) => normalized.clone(),
            None => token.to_string(),
        }
    }
}

/// Looks a plugin up by CLI name. "lexicon" requires a lexicon path.
pub fn plugin_by_name(name: &str, lexicon: Option<&Path>) -> Result<Box<dyn Normalizer>> {
    match name {
        "none" => Ok(Box::new(IdentityNormalizer)),
        "deasciify" => Ok(Box::new(LexiconNormalizer::deasciify())),
        "lexicon" => match lexicon {
            Some(path) => Ok(Box::new(LexiconNormalizer::from_path(path)?)),
            None => Err(Error::UnknownPlugin {
                name: "lexicon (no lexicon file given)".to_string(),
            }),
        },
        other => Err(Error::UnknownPlugin {
            name: other.to_string(),
        }),
    }
}

/// Applies the plugin to every token's processed form; surface forms and
/// length are preserved.
pub fn normalize_sentence(sentence: &Sentence, plugin: &dyn Normalizer) -> Sentence {
    let mut out = sentence.clone();
    for token in &mut out.tokens {
        token.processed = plugin.normalize(&token.processed);
    }
    out
}

pub fn normalize_sentences(sentences: &[Sentence], plugin: &dyn Normalizer) -> Vec<Sentence> {
    sentences
        .iter()
        .map(|s| normalize_sentence(s, plugin))
        .collect()
}
