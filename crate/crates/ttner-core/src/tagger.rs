//! The supervised stage: local feature extraction and an averaged
//! multiclass perceptron with greedy left-to-right BILOU decoding.
//!
//! Feature families (all local): context words in a ±2 window,
//! capitalization of window tokens, word-type flags, prefixes (length
//! 3–4) and suffixes (length 1–4) of the current token, the previous two
//! predicted tags, and embedding components of window tokens.

use crate::corpus::Sentence;
use crate::embeddings::Embeddings;
use crate::encoding::{bilou_tags, bilou_to_spans, EntitySpan, Tag};
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Boundary padding used for context and history features.
pub const PAD: &str = "<PAD>";

/// Context half-width: features look this many tokens left and right.
pub const WINDOW: isize = 2;

/// Sparse feature map with insertion order preserved (keys never repeat,
/// so a vector doubles as a deterministic iteration order).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    items: Vec<(String, f64)>,
}

impl FeatureVector {
    pub fn push(&mut self, key: String, value: f64) {
        debug_assert!(
            self.items.iter().all(|(k, _)| k != &key),
            "duplicate feature key {key}"
        );
        debug_assert!(value.is_finite());
        self.items.push((key, value));
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.items.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.items.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

/// The five word-type flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordType {
    pub all_caps: bool,
    pub init_cap: bool,
    pub all_digits: bool,
    pub has_apostrophe: bool,
    pub alphanumeric: bool,
}

impl WordType {
    /// Compact T/F form used as a feature value, e.g. "TTFFT".
    pub fn signature(self) -> String {
        [
            self.all_caps,
            self.init_cap,
            self.all_digits,
            self.has_apostrophe,
            self.alphanumeric,
        ]
        .iter()
        .map(|&b| if b { 'T' } else { 'F' })
        .collect()
    }
}

const APOSTROPHES: [char; 3] = ['\'', '\u{02BC}', '\u{2019}'];

pub fn word_type(token: &str) -> WordType {
    let mut cased = 0usize;
    let mut cased_upper = 0usize;
    for c in token.chars() {
        if c.is_uppercase() || c.is_lowercase() {
            cased += 1;
            if c.is_uppercase() {
                cased_upper += 1;
            }
        }
    }
    WordType {
        all_caps: cased > 0 && cased == cased_upper,
        init_cap: token.chars().next().is_some_and(char::is_uppercase),
        all_digits: !token.is_empty() && token.chars().all(char::is_numeric),
        has_apostrophe: token.chars().any(|c| APOSTROPHES.contains(&c)),
        alphanumeric: !token.is_empty() && token.chars().all(char::is_alphanumeric),
    }
}

/// Prefixes of length 3–4 and suffixes of length 1–4, emitted only when
/// strictly shorter than the token (in Unicode scalars).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Affixes {
    pub prefixes: Vec<String>,
    pub suffixes: Vec<String>,
}

pub fn affixes(token: &str) -> Affixes {
    let chars: Vec<char> = token.chars().collect();
    let mut out = Affixes::default();
    for len in [3usize, 4] {
        if chars.len() > len {
            out.prefixes.push(chars[..len].iter().collect());
        }
    }
    for len in 1usize..=4 {
        if chars.len() > len {
            out.suffixes
                .push(chars[chars.len() - len..].iter().collect());
        }
    }
    out
}

/// The previous two predicted tags; `None` beyond the sentence start.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TagHistory {
    pub prev1: Option<Tag>,
    pub prev2: Option<Tag>,
}

impl TagHistory {
    pub fn at(predictions: &[Tag], i: usize) -> TagHistory {
        TagHistory {
            prev1: i.checked_sub(1).map(|p| predictions[p]),
            prev2: i.checked_sub(2).map(|p| predictions[p]),
        }
    }
}

fn history_str(tag: Option<Tag>) -> &'static str {
    tag.map_or(PAD, Tag::as_str)
}

/// Feature-template switches.
#[derive(Debug, Clone, Copy)]
pub struct FeatureOptions {
    /// Emit capitalization features (computed on surface forms).
    pub cap: bool,
    /// Multiplier applied to embedding components.
    pub emb_scale: f64,
}

impl Default for FeatureOptions {
    fn default() -> FeatureOptions {
        FeatureOptions {
            cap: true,
            emb_scale: 1.0,
        }
    }
}

/// Extracts the feature vector for position `index`. Context, word-type,
/// affix and embedding features read the processed forms; capitalization
/// reads the surface forms (preprocessing lowercases the processed view).
/// Embedding features appear only when `embeddings` is given; unknown
/// words act as zero vectors (their components are simply not emitted).
pub fn extract_features(
    sentence: &Sentence,
    index: usize,
    history: &TagHistory,
    embeddings: Option<&Embeddings>,
    options: &FeatureOptions,
) -> Result<FeatureVector> {
    let len = sentence.tokens.len();
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let at = |d: isize| -> Option<&crate::corpus::Token> {
        let j = index as isize + d;
        if (0..len as isize).contains(&j) {
            Some(&sentence.tokens[j as usize])
        } else {
            None
        }
    };

    let mut fv = FeatureVector::default();

    for d in -WINDOW..=WINDOW {
        let word = at(d).map_or(PAD, |t| t.processed.as_str());
        fv.push(format!("ctx[{d}]={word}"), 1.0);
    }

    if options.cap {
        for d in -WINDOW..=WINDOW {
            if let Some(token) = at(d) {
                let cap = token.surface.chars().next().is_some_and(char::is_uppercase);
                fv.push(format!("cap[{d}]={}", if cap { 'T' } else { 'F' }), 1.0);
            }
        }
    }

    for d in -WINDOW..=WINDOW {
        if let Some(token) = at(d) {
            fv.push(
                format!("wt[{d}]={}", word_type(&token.processed).signature()),
                1.0,
            );
        }
    }

    let current = &sentence.tokens[index].processed;
    let aff = affixes(current);
    for p in &aff.prefixes {
        fv.push(format!("pre[{}]={p}", p.chars().count()), 1.0);
    }
    for s in &aff.suffixes {
        fv.push(format!("suf[{}]={s}", s.chars().count()), 1.0);
    }

    let p1 = history_str(history.prev1);
    let p2 = history_str(history.prev2);
    fv.push(format!("pt[-1]={p1}"), 1.0);
    fv.push(format!("pt[-2]={p2}"), 1.0);
    fv.push(format!("pt[-2,-1]={p2}/{p1}"), 1.0);

    if let Some(emb) = embeddings {
        for d in -WINDOW..=WINDOW {
            let Some(token) = at(d) else { continue };
            let Some(vector) = emb.lookup(&token.processed) else {
                continue;
            };
            for (j, &component) in vector.iter().enumerate() {
                let value = component * options.emb_scale;
                if value != 0.0 {
                    fv.push(format!("emb[{d}][{j}]"), value);
                }
            }
        }
    }

    Ok(fv)
}

// index of a tag within bilou_tags() order
fn tag_index(tag: Tag) -> usize {
    bilou_tags().iter().position(|&t| t == tag).unwrap()
}

fn argmax_label(scores: &[f64], labels: &[Tag]) -> Tag {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    labels[best]
}

/// Tagger hyperparameters. The embeddings switch is implied by whether
/// vectors are passed to [`train`].
#[derive(Debug, Clone)]
pub struct TaggerConfig {
    pub epochs: usize,
    pub seed: u64,
    pub cap: bool,
    pub emb_scale: f64,
}

impl Default for TaggerConfig {
    fn default() -> TaggerConfig {
        TaggerConfig {
            epochs: 10,
            seed: 1,
            cap: true,
            emb_scale: 1.0,
        }
    }
}

/// Switches and counters recorded in a trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub epochs: usize,
    pub seed: u64,
    pub cap: bool,
    pub emb: bool,
    pub emb_dim: usize,
    pub emb_scale: f64,
    /// Token steps seen in training: the averaging denominator.
    pub steps: u64,
}

/// A finalized averaged perceptron: per-label sparse weights over the 13
/// BILOU labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronModel {
    labels: Vec<Tag>,
    weights: Vec<HashMap<String, f64>>,
    config: ModelConfig,
}

impl PerceptronModel {
    pub fn labels(&self) -> &[Tag] {
        &self.labels
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn weight(&self, label: Tag, feature: &str) -> f64 {
        self.weights[tag_index(label)]
            .get(feature)
            .copied()
            .unwrap_or(0.0)
    }

    /// Per-label scores in label order; unseen feature keys contribute 0.
    pub fn scores(&self, fv: &FeatureVector) -> Vec<(Tag, f64)> {
        self.labels
            .iter()
            .zip(&self.weights)
            .map(|(&label, w)| {
                let s = fv
                    .iter()
                    .map(|(k, v)| w.get(k).copied().unwrap_or(0.0) * v)
                    .sum();
                (label, s)
            })
            .collect()
    }

    /// Argmax over labels; ties break toward the lexicographically least
    /// tag ("B-LOC" when all scores are equal).
    pub fn predict(&self, fv: &FeatureVector) -> Tag {
        let scores: Vec<f64> = self.scores(fv).into_iter().map(|(_, s)| s).collect();
        argmax_label(&scores, &self.labels)
    }
}

// One weight entry during training. `summed` accumulates per-step
// snapshots of `value` up to step `flushed` (lazy averaging).
#[derive(Debug, Clone, Copy, Default)]
struct TrainCell {
    value: f64,
    summed: f64,
    flushed: u64,
}

struct TrainState {
    cells: Vec<HashMap<String, TrainCell>>,
}

impl TrainState {
    fn new(labels: usize) -> TrainState {
        TrainState {
            cells: vec![HashMap::new(); labels],
        }
    }

    fn scores(&self, fv: &FeatureVector) -> Vec<f64> {
        self.cells
            .iter()
            .map(|w| {
                fv.iter()
                    .map(|(k, v)| w.get(k).map_or(0.0, |c| c.value) * v)
                    .sum()
            })
            .collect()
    }

    // Applies `sign * fv` to a label's weights at 1-based step `step`,
    // first crediting the old value for the steps it was live.
    fn update(&mut self, label: usize, fv: &FeatureVector, sign: f64, step: u64) {
        for (key, value) in fv.iter() {
            let cell = self.cells[label].entry(key.to_string()).or_default();
            cell.summed += cell.value * (step - 1 - cell.flushed) as f64;
            cell.flushed = step - 1;
            cell.value += sign * value;
        }
    }

    // Flushes every entry to `total` steps and divides: the result is the
    // exact mean of the weight snapshots after steps 1..=total.
    fn finalize(self, total: u64) -> Vec<HashMap<String, f64>> {
        self.cells
            .into_iter()
            .map(|cells| {
                cells
                    .into_iter()
                    .map(|(key, cell)| {
                        let sum = cell.summed + cell.value * (total - cell.flushed) as f64;
                        (key, sum / total as f64)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Trains the averaged perceptron. Each epoch shuffles sentence order
/// (seeded); decoding is greedy left-to-right using the model's own
/// predictions as tag history; a mistake at a position adds the feature
/// vector to the gold label's weights and subtracts it from the predicted
/// label's. Finalized weights are the average of the weight snapshots
/// after every token step, which regularizes the classic perceptron.
pub fn train(
    sentences: &[Sentence],
    config: &TaggerConfig,
    embeddings: Option<&Embeddings>,
) -> Result<PerceptronModel> {
    let mut total_tokens = 0usize;
    for (i, sentence) in sentences.iter().enumerate() {
        let labels = sentence
            .labels
            .as_ref()
            .ok_or_else(|| Error::InvalidLabel {
                msg: format!("sentence {i} has no labels"),
            })?;
        if labels.len() != sentence.tokens.len() {
            return Err(Error::InvalidLabel {
                msg: format!(
                    "sentence {i} has {} labels for {} tokens",
                    labels.len(),
                    sentence.tokens.len()
                ),
            });
        }
        total_tokens += sentence.tokens.len();
    }
    if total_tokens == 0 {
        return Err(Error::EmptyTrainingSet);
    }

    let labels: Vec<Tag> = bilou_tags().to_vec();
    let options = FeatureOptions {
        cap: config.cap,
        emb_scale: config.emb_scale,
    };
    let mut state = TrainState::new(labels.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut step = 0u64;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let sentence = &sentences[si];
            let gold = sentence.labels.as_ref().unwrap();
            let mut predictions: Vec<Tag> = Vec::with_capacity(sentence.len());
            for (i, &gold_tag) in gold.iter().enumerate() {
                step += 1;
                let history = TagHistory::at(&predictions, i);
                let fv = extract_features(sentence, i, &history, embeddings, &options)
                    .expect("index in range");
                let predicted = argmax_label(&state.scores(&fv), &labels);
                if predicted != gold_tag {
                    state.update(tag_index(gold_tag), &fv, 1.0, step);
                    state.update(tag_index(predicted), &fv, -1.0, step);
                }
                predictions.push(predicted);
            }
        }
    }

    let weights = if step == 0 {
        vec![HashMap::new(); labels.len()]
    } else {
        state.finalize(step)
    };
    Ok(PerceptronModel {
        labels,
        config: ModelConfig {
            epochs: config.epochs,
            seed: config.seed,
            cap: config.cap,
            emb: embeddings.is_some(),
            emb_dim: embeddings.map_or(0, Embeddings::dim),
            emb_scale: config.emb_scale,
            steps: step,
        },
        weights,
    })
}

/// Greedy left-to-right tagging; the tag sequence is decoded to spans via
/// the repairing BILOU decoder, so the spans are always well-formed.
pub fn tag(
    model: &PerceptronModel,
    sentence: &Sentence,
    embeddings: Option<&Embeddings>,
) -> (Vec<Tag>, Vec<EntitySpan>) {
    let options = FeatureOptions {
        cap: model.config.cap,
        emb_scale: model.config.emb_scale,
    };
    let embeddings = if model.config.emb { embeddings } else { None };
    let mut predictions: Vec<Tag> = Vec::with_capacity(sentence.len());
    for i in 0..sentence.len() {
        let history = TagHistory::at(&predictions, i);
        let fv =
            extract_features(sentence, i, &history, embeddings, &options).expect("index in range");
        predictions.push(model.predict(&fv));
    }
    let spans = bilou_to_spans(&predictions);
    (predictions, spans)
}

const MODEL_HEADER: &str = "TTNER-MODEL v1";

/// Renders the model file: version header, one key=value config line,
/// then sorted "label TAB feature TAB weight" rows (zero weights
/// omitted) with 9-significant-digit scientific decimals.
pub fn model_to_string(model: &PerceptronModel) -> String {
    let c = &model.config;
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_HEADER}");
    let _ = writeln!(
        out,
        "epochs={} seed={} cap={} emb={} emb_dim={} emb_scale={} steps={}",
        c.epochs,
        c.seed,
        if c.cap { "on" } else { "off" },
        if c.emb { "on" } else { "off" },
        c.emb_dim,
        c.emb_scale,
        c.steps
    );
    let mut rows: Vec<(&str, &str, f64)> = Vec::new();
    for (label, weights) in model.labels.iter().zip(&model.weights) {
        for (key, &w) in weights {
            if w != 0.0 {
                rows.push((label.as_str(), key, w));
            }
        }
    }
    rows.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.cmp(b.1)));
    for (label, key, w) in rows {
        let _ = writeln!(out, "{label}\t{key}\t{w:.8e}");
    }
    out
}

pub fn save_model(model: &PerceptronModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn model_from_str(text: &str) -> Result<PerceptronModel> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == MODEL_HEADER => {}
        other => {
            return Err(Error::VersionMismatch {
                expected: MODEL_HEADER.to_string(),
                found: other.map(|(_, h)| h.to_string()).unwrap_or_default(),
            })
        }
    }
    let (_, config_line) = lines.next().ok_or(Error::MalformedLine {
        line: 2,
        msg: "missing config line".to_string(),
    })?;

    let mut config = ModelConfig {
        epochs: 0,
        seed: 0,
        cap: true,
        emb: false,
        emb_dim: 0,
        emb_scale: 1.0,
        steps: 0,
    };
    let mut seen = 0;
    for pair in config_line.split_whitespace() {
        let bad = || Error::MalformedLine {
            line: 2,
            msg: format!("bad config entry {pair:?}"),
        };
        let (key, value) = pair.split_once('=').ok_or_else(bad)?;
        let flag = |v: &str| match v {
            "on" => Ok(true),
            "off" => Ok(false),
            _ => Err(bad()),
        };
        match key {
            "epochs" => config.epochs = value.parse().map_err(|_| bad())?,
            "seed" => config.seed = value.parse().map_err(|_| bad())?,
            "cap" => config.cap = flag(value)?,
            "emb" => config.emb = flag(value)?,
            "emb_dim" => config.emb_dim = value.parse().map_err(|_| bad())?,
            "emb_scale" => config.emb_scale = value.parse().map_err(|_| bad())?,
            "steps" => config.steps = value.parse().map_err(|_| bad())?,
            _ => return Err(bad()),
        }
        seen += 1;
    }
    if seen != 7 {
        return Err(Error::MalformedLine {
            line: 2,
            msg: format!("expected 7 config entries, got {seen}"),
        });
    }

    let labels: Vec<Tag> = bilou_tags().to_vec();
    let mut weights: Vec<HashMap<String, f64>> = vec![HashMap::new(); labels.len()];
    for (i, line) in lines {
        let lineno = i + 1;
        let mut parts = line.split('\t');
        let (label, key, weight) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(l), Some(k), Some(w), None) => (l, k, w),
            _ => {
                return Err(Error::MalformedLine {
                    line: lineno,
                    msg: format!("expected \"label<TAB>feature<TAB>weight\", got {line:?}"),
                })
            }
        };
        let label = Tag::parse(label).ok_or_else(|| Error::UnknownTag {
            line: lineno,
            tag: label.to_string(),
        })?;
        let weight: f64 = weight.parse().map_err(|_| Error::MalformedLine {
            line: lineno,
            msg: format!("bad weight {weight:?}"),
        })?;
        weights[tag_index(label)].insert(key.to_string(), weight);
    }

    Ok(PerceptronModel {
        labels,
        weights,
        config,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PerceptronModel> {
    model_from_str(&fs::read_to_string(path)?)
}
