//! Text ingestion and preprocessing: tokenization, Twitter keyword
//! substitution, Turkish-aware lowercasing, numeric normalization, CoNLL
//! reading and writing, and heuristic language filtering.

use crate::encoding::{bilou_to_spans, bio_to_bilou, EntitySpan, Tag, TagScheme};
use crate::error::{Error, Result};
use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

pub const MENTION_KEYWORD: &str = "<MENTION>";
pub const HASHTAG_KEYWORD: &str = "<HASHTAG>";
pub const SMILEY_KEYWORD: &str = "<SMILEY>";
pub const URL_KEYWORD: &str = "<URL>";

/// Keywords that preprocessing inserts; later passes leave them untouched.
pub const RESERVED_KEYWORDS: [&str; 4] = [
    MENTION_KEYWORD,
    HASHTAG_KEYWORD,
    SMILEY_KEYWORD,
    URL_KEYWORD,
];

static SMILEY_DATA: &str = include_str!("../data/smileys.txt");

fn smileys() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| SMILEY_DATA.lines().filter(|l| !l.is_empty()).collect())
}

/// A single token: the original surface form plus its preprocessed view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub processed: String,
    pub index: usize,
}

/// One tweet (or sentence): tokens plus optional gold BILOU labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub labels: Option<Vec<Tag>>,
}

impl Sentence {
    /// Builds an unlabeled sentence, running the full per-token
    /// preprocessing chain to fill the processed forms.
    pub fn from_surfaces<S: AsRef<str>>(surfaces: &[S]) -> Sentence {
        let tokens = surfaces
            .iter()
            .enumerate()
            .map(|(index, s)| Token {
                surface: s.as_ref().to_string(),
                processed: preprocess_token(s.as_ref()),
                index,
            })
            .collect();
        Sentence {
            tokens,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<Tag>) -> Sentence {
        assert_eq!(labels.len(), self.tokens.len());
        self.labels = Some(labels);
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Entity spans decoded from the gold labels, if present.
    pub fn gold_spans(&self) -> Option<Vec<EntitySpan>> {
        self.labels.as_deref().map(bilou_to_spans)
    }
}

/// Maps a token to its reserved keyword when it is a mention, hashtag,
/// URL or smiley; `None` for ordinary tokens.
pub fn twitter_keyword(token: &str) -> Option<&'static str> {
    if is_mention(token) {
        Some(MENTION_KEYWORD)
    } else if is_hashtag(token) {
        Some(HASHTAG_KEYWORD)
    } else if is_url(token) {
        Some(URL_KEYWORD)
    } else if smileys().contains(token) {
        Some(SMILEY_KEYWORD)
    } else {
        None
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_mention(s: &str) -> bool {
    match s.strip_prefix('@') {
        Some(rest) => !rest.is_empty() && rest.chars().all(is_word_char),
        None => false,
    }
}

fn is_hashtag(s: &str) -> bool {
    match s.strip_prefix('#') {
        Some(rest) => !rest.is_empty() && rest.chars().all(is_word_char),
        None => false,
    }
}

fn is_url(s: &str) -> bool {
    let lower = s.to_ascii_lowercase();
    if lower.starts_with("www.") && s.len() > 4 {
        return true;
    }
    match lower.find("://") {
        Some(pos) if pos > 0 && s.len() > pos + 3 => {
            let mut scheme = lower[..pos].chars();
            let first = scheme.next().unwrap();
            first.is_ascii_alphabetic()
                && scheme.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '.' | '-'))
        }
        _ => false,
    }
}

const APOSTROPHES: [char; 3] = ['\'', '\u{02BC}', '\u{2019}'];

// Non-ASCII punctuation we also detach. A documented approximation; the
// right single quote U+2019 is deliberately absent (treated as an
// apostrophe), as is every other apostrophe form.
const EXTRA_PUNCT: &str = "«»„“”‘…—–¡¿·";

fn is_detachable_punct(c: char) -> bool {
    if APOSTROPHES.contains(&c) {
        return false;
    }
    c.is_ascii_punctuation() || EXTRA_PUNCT.contains(c)
}

// Splits one whitespace chunk by peeling detachable punctuation off both
// ends, one character per token. If some peel sequence uncovers a Twitter
// atom (so "(#secim)" frees "#secim" even though '#' itself is
// punctuation), the peel stops there; among such cores the least-peeled
// one wins. Otherwise both ends are peeled fully.
fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    // byte offsets reachable by stripping 0, 1, 2, ... detachable chars
    let mut starts = vec![0usize];
    for (off, c) in chunk.char_indices() {
        if off == *starts.last().unwrap() && is_detachable_punct(c) {
            starts.push(off + c.len_utf8());
        } else {
            break;
        }
    }
    let mut ends = vec![chunk.len()];
    for (off, c) in chunk.char_indices().rev() {
        if off + c.len_utf8() == *ends.last().unwrap() && is_detachable_punct(c) {
            ends.push(off);
        } else {
            break;
        }
    }

    let mut best: Option<(usize, usize, usize)> = None; // (cost, a, b)
    for (i, &a) in starts.iter().enumerate() {
        for (j, &b) in ends.iter().enumerate() {
            if a < b && twitter_keyword(&chunk[a..b]).is_some() {
                let cost = i + j;
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, a, b));
                }
            }
        }
    }
    let (a, b) = match best {
        Some((_, a, b)) => (a, b),
        None => {
            let a = *starts.last().unwrap();
            let b = *ends.last().unwrap();
            if a >= b {
                // nothing but punctuation: each char is its own token
                out.extend(chunk.chars().map(String::from));
                return;
            }
            (a, b)
        }
    };
    out.extend(chunk[..a].chars().map(String::from));
    out.push(chunk[a..b].to_string());
    out.extend(chunk[b..].chars().map(String::from));
}

/// Whitespace tokenization with leading/trailing punctuation detached.
/// Mentions, hashtags, URLs and smileys stay atomic; apostrophes are kept
/// inside tokens ("Ankara'da" stays one token).
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut surfaces = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut surfaces);
    }
    surfaces
        .into_iter()
        .enumerate()
        .map(|(index, surface)| Token {
            processed: surface.clone(),
            surface,
            index,
        })
        .collect()
}

/// Replaces the processed form of mentions, hashtags, URLs and smileys
/// with their reserved keywords. Matching is done on the surface form.
pub fn twitter_process(tokens: &[Token]) -> Vec<Token> {
    tokens
        .iter()
        .map(|t| {
            let mut t = t.clone();
            if let Some(kw) = twitter_keyword(&t.surface) {
                t.processed = kw.to_string();
            }
            t
        })
        .collect()
}

/// Lowercases with Turkish casing rules: 'I' → 'ı' and 'İ' → 'i'; all
/// other characters use standard Unicode lowercasing.
pub fn turkish_lowercase(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            'I' => out.push('ı'),
            'İ' => out.push('i'),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out
}

/// Replaces every numeric character with '0' (digit-classing abstraction).
pub fn normalize_numbers(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_numeric() { '0' } else { c })
        .collect()
}

/// The full per-token preprocessing chain: keyword substitution, else
/// Turkish lowercasing plus numeric normalization.
pub fn preprocess_token(surface: &str) -> String {
    match twitter_keyword(surface) {
        Some(kw) => kw.to_string(),
        None => normalize_numbers(&turkish_lowercase(surface)),
    }
}

fn is_reserved(processed: &str) -> bool {
    RESERVED_KEYWORDS.contains(&processed)
}

/// Lowercases the processed forms, leaving reserved keywords untouched.
pub fn lowercase_tokens(tokens: &[Token]) -> Vec<Token> {
    tokens
        .iter()
        .map(|t| {
            let mut t = t.clone();
            if !is_reserved(&t.processed) {
                t.processed = turkish_lowercase(&t.processed);
            }
            t
        })
        .collect()
}

/// Replaces digits with '0' in the processed forms, leaving reserved
/// keywords untouched.
pub fn normalize_number_tokens(tokens: &[Token]) -> Vec<Token> {
    tokens
        .iter()
        .map(|t| {
            let mut t = t.clone();
            if !is_reserved(&t.processed) {
                t.processed = normalize_numbers(&t.processed);
            }
            t
        })
        .collect()
}

/// Tokenizes raw text and applies the full preprocessing chain.
pub fn preprocess(text: &str) -> Sentence {
    let tokens = tokenize(text);
    let tokens = twitter_process(&tokens);
    let tokens = lowercase_tokens(&tokens);
    let tokens = normalize_number_tokens(&tokens);
    Sentence {
        tokens,
        labels: None,
    }
}

/// Parses two-column CoNLL text: token TAB tag, blank line between
/// sentences. The tag scheme (BIO or BILOU) is autodetected over the whole
/// input; BIO input is converted to BILOU.
pub fn read_conll_str(text: &str) -> Result<Vec<Sentence>> {
    let mut raw: Vec<Vec<(String, Tag)>> = Vec::new();
    let mut current: Vec<(String, Tag)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            if !current.is_empty() {
                raw.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut parts = line.split('\t');
        let (surface, tag) = match (parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(t), None) if !s.is_empty() => (s, t),
            _ => {
                return Err(Error::MalformedLine {
                    line: lineno,
                    msg: format!("expected \"token<TAB>tag\", got {line:?}"),
                })
            }
        };
        let tag = Tag::parse(tag).ok_or_else(|| Error::UnknownTag {
            line: lineno,
            tag: tag.to_string(),
        })?;
        current.push((surface.to_string(), tag));
    }
    if !current.is_empty() {
        raw.push(current);
    }

    let scheme = TagScheme::detect(raw.iter().flatten().map(|(_, t)| t));
    raw.into_iter()
        .map(|pairs| {
            let surfaces: Vec<String> = pairs.iter().map(|(s, _)| s.clone()).collect();
            let tags: Vec<Tag> = pairs.iter().map(|(_, t)| *t).collect();
            let tags = match scheme {
                TagScheme::Bio => bio_to_bilou(&tags)?,
                TagScheme::Bilou => tags,
            };
            Ok(Sentence::from_surfaces(&surfaces).with_labels(tags))
        })
        .collect()
}

pub fn read_conll(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    read_conll_str(&fs::read_to_string(path)?)
}

/// Renders labeled sentences in the two-column CoNLL format, ending each
/// sentence (including the last) with a blank line.
pub fn conll_to_string(sentences: &[Sentence]) -> Result<String> {
    let mut out = String::new();
    for (i, sentence) in sentences.iter().enumerate() {
        let labels = sentence
            .labels
            .as_ref()
            .ok_or(Error::UnlabeledInput { sentence: i })?;
        if labels.len() != sentence.tokens.len() {
            return Err(Error::InvalidLabel {
                msg: format!(
                    "sentence {i} has {} labels for {} tokens",
                    labels.len(),
                    sentence.tokens.len()
                ),
            });
        }
        for (token, tag) in sentence.tokens.iter().zip(labels) {
            out.push_str(&token.surface);
            out.push('\t');
            out.push_str(tag.as_str());
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_conll(sentences: &[Sentence], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, conll_to_string(sentences)?)?;
    Ok(())
}

/// Span, token and sentence counts over a labeled dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DatasetStats {
    pub persons: usize,
    pub locations: usize,
    pub organizations: usize,
    pub total_spans: usize,
    pub tokens: usize,
    pub sentences: usize,
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Person       {:>6}", self.persons)?;
        writeln!(f, "Location     {:>6}", self.locations)?;
        writeln!(f, "Organization {:>6}", self.organizations)?;
        writeln!(f, "Total PLOs   {:>6}", self.total_spans)?;
        writeln!(f, "Sentences    {:>6}", self.sentences)?;
        write!(f, "Tokens       {:>6}", self.tokens)
    }
}

pub fn dataset_stats(sentences: &[Sentence]) -> Result<DatasetStats> {
    let mut stats = DatasetStats {
        sentences: sentences.len(),
        ..DatasetStats::default()
    };
    for (i, sentence) in sentences.iter().enumerate() {
        stats.tokens += sentence.len();
        let spans = sentence
            .gold_spans()
            .ok_or(Error::UnlabeledInput { sentence: i })?;
        for span in spans {
            match span.etype {
                crate::encoding::EntityType::Per => stats.persons += 1,
                crate::encoding::EntityType::Loc => stats.locations += 1,
                crate::encoding::EntityType::Org => stats.organizations += 1,
            }
            stats.total_spans += 1;
        }
    }
    Ok(stats)
}

/// Loads a one-word-per-line wordlist, storing Turkish-lowercased forms.
pub fn load_wordlist(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(turkish_lowercase)
        .collect())
}

/// Splits sentences into (kept, removed) by a wordlist heuristic: a
/// sentence is removed iff the fraction of its alphabetic tokens found in
/// the wordlist is below `theta`. Sentences with no alphabetic tokens are
/// kept (no evidence either way). Lookup is on the Turkish-lowercased
/// surface form.
pub fn filter_non_turkish(
    sentences: &[Sentence],
    wordlist: &HashSet<String>,
    theta: f64,
) -> (Vec<Sentence>, Vec<Sentence>) {
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for sentence in sentences {
        let alphabetic: Vec<&Token> = sentence
            .tokens
            .iter()
            .filter(|t| !t.surface.is_empty() && t.surface.chars().all(char::is_alphabetic))
            .collect();
        let keep = if alphabetic.is_empty() {
            true
        } else {
            let known = alphabetic
                .iter()
                .filter(|t| wordlist.contains(&turkish_lowercase(&t.surface)))
                .count();
            known as f64 / alphabetic.len() as f64 >= theta
        };
        if keep {
            kept.push(sentence.clone());
        } else {
            removed.push(sentence.clone());
        }
    }
    (kept, removed)
}
