//! Strict phrase-level scoring and k-fold cross-validation.
//!
//! A predicted span counts as a true positive only when a gold span with
//! the same (start, end, type) triple exists in the same sentence; any
//! partial overlap is both a false positive and a false negative. The
//! overall score micro-averages by summing counts over the three types.

use crate::corpus::Sentence;
use crate::embeddings::Embeddings;
use crate::encoding::{EntitySpan, EntityType};
use crate::error::{Error, Result};
use crate::tagger::{tag, train, PerceptronModel, TaggerConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Match counts with the precision/recall/F1 conventions fixed as
/// 0/0 = 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrfScore {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl PrfScore {
    fn ratio(num: usize, den: usize) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn precision(&self) -> f64 {
        PrfScore::ratio(
            self.true_positives,
            self.true_positives + self.false_positives,
        )
    }

    pub fn recall(&self) -> f64 {
        PrfScore::ratio(
            self.true_positives,
            self.true_positives + self.false_negatives,
        )
    }

    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    fn add(&mut self, other: PrfScore) {
        self.true_positives += other.true_positives;
        self.false_positives += other.false_positives;
        self.false_negatives += other.false_negatives;
    }
}

/// Per-type and micro-averaged overall scores. `per_type` always holds
/// all three entity types so reports have a fixed shape.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreReport {
    pub per_type: BTreeMap<EntityType, PrfScore>,
    pub overall: PrfScore,
}

impl ScoreReport {
    fn new() -> ScoreReport {
        let mut per_type = BTreeMap::new();
        for t in [EntityType::Loc, EntityType::Org, EntityType::Per] {
            per_type.insert(t, PrfScore::default());
        }
        ScoreReport {
            per_type,
            overall: PrfScore::default(),
        }
    }

    /// Unweighted mean of the three per-type F1 scores (diagnostic only;
    /// acceptance always reads the micro-averaged overall score).
    pub fn macro_f1(&self) -> f64 {
        let sum: f64 = self.per_type.values().map(PrfScore::f1).sum();
        sum / self.per_type.len() as f64
    }
}

// Exact-match counts for one sentence: every predicted span matching a
// not-yet-consumed identical gold span is a TP; leftovers are FP/FN.
fn match_sentence(gold: &[EntitySpan], pred: &[EntitySpan], report: &mut ScoreReport) {
    let mut unmatched: Vec<&EntitySpan> = gold.iter().collect();
    for p in pred {
        let entry = report
            .per_type
            .get_mut(&p.etype)
            .expect("all types present");
        if let Some(at) = unmatched.iter().position(|g| *g == p) {
            unmatched.swap_remove(at);
            entry.true_positives += 1;
        } else {
            entry.false_positives += 1;
        }
    }
    for g in unmatched {
        report
            .per_type
            .get_mut(&g.etype)
            .expect("all types present")
            .false_negatives += 1;
    }
}

/// Scores predicted span sets against gold sentences. Inputs must be
/// aligned: one span set per gold sentence, spans within token range.
pub fn conll_score(gold: &[Sentence], pred: &[Vec<EntitySpan>]) -> Result<ScoreReport> {
    if gold.len() != pred.len() {
        return Err(Error::AlignmentError {
            msg: format!(
                "gold has {} sentences but predictions cover {}",
                gold.len(),
                pred.len()
            ),
        });
    }
    let mut report = ScoreReport::new();
    for (i, (sentence, spans)) in gold.iter().zip(pred).enumerate() {
        let gold_spans = sentence
            .gold_spans()
            .ok_or(Error::UnlabeledInput { sentence: i })?;
        for span in spans {
            if span.end >= sentence.len() {
                return Err(Error::AlignmentError {
                    msg: format!(
                        "sentence {i}: predicted span ends at {} but sentence has {} tokens",
                        span.end,
                        sentence.len()
                    ),
                });
            }
        }
        match_sentence(&gold_spans, spans, &mut report);
    }
    let mut overall = PrfScore::default();
    for score in report.per_type.values() {
        overall.add(*score);
    }
    report.overall = overall;
    Ok(report)
}

/// Scores one labeled corpus against another (same sentences, different
/// labels), e.g. a gold file versus a tagged file.
pub fn score_tagged(gold: &[Sentence], pred: &[Sentence]) -> Result<ScoreReport> {
    if gold.len() != pred.len() {
        return Err(Error::AlignmentError {
            msg: format!(
                "gold has {} sentences but predictions have {}",
                gold.len(),
                pred.len()
            ),
        });
    }
    let mut spans = Vec::with_capacity(pred.len());
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(Error::AlignmentError {
                msg: format!(
                    "sentence {i}: gold has {} tokens but prediction has {}",
                    g.len(),
                    p.len()
                ),
            });
        }
        spans.push(
            p.gold_spans()
                .ok_or(Error::UnlabeledInput { sentence: i })?,
        );
    }
    conll_score(gold, &spans)
}

/// Aligned plain-text score table (per-type rows plus the micro ALL row).
pub fn report_table(report: &ScoreReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<5} {:>9} {:>9} {:>9} {:>6} {:>6} {:>6}",
        "Type", "P", "R", "F1", "TP", "FP", "FN"
    );
    let mut row = |name: &str, s: &PrfScore| {
        let _ = writeln!(
            out,
            "{:<5} {:>9.4} {:>9.4} {:>9.4} {:>6} {:>6} {:>6}",
            name,
            s.precision(),
            s.recall(),
            s.f1(),
            s.true_positives,
            s.false_positives,
            s.false_negatives
        );
    };
    for (t, s) in &report.per_type {
        row(t.as_str(), s);
    }
    row("ALL", &report.overall);
    out
}

/// Machine-readable key=value lines for the same report.
pub fn report_kv(report: &ScoreReport) -> String {
    let mut out = String::new();
    for (t, s) in &report.per_type {
        let name = t.as_str().to_lowercase();
        let _ = writeln!(out, "{name}_precision={:.6}", s.precision());
        let _ = writeln!(out, "{name}_recall={:.6}", s.recall());
        let _ = writeln!(out, "{name}_f1={:.6}", s.f1());
    }
    let s = &report.overall;
    let _ = writeln!(out, "overall_precision={:.6}", s.precision());
    let _ = writeln!(out, "overall_recall={:.6}", s.recall());
    let _ = writeln!(out, "overall_f1={:.6}", s.f1());
    let _ = writeln!(out, "overall_tp={}", s.true_positives);
    let _ = writeln!(out, "overall_fp={}", s.false_positives);
    let _ = writeln!(out, "overall_fn={}", s.false_negatives);
    let _ = writeln!(out, "macro_f1={:.6}", report.macro_f1());
    out
}

/// Test-fold index sets: a seeded shuffle of `0..n` cut into `k`
/// contiguous chunks whose sizes differ by at most one (the first
/// `n % k` folds take the extra element).
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::TooFewSentences { have: k, need: 2 });
    }
    if n < k {
        return Err(Error::TooFewSentences { have: n, need: k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(order[at..at + size].to_vec());
        at += size;
    }
    Ok(folds)
}

/// Materialized (train, test) sentence pairs for each fold.
pub fn kfold_split(
    sentences: &[Sentence],
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<Sentence>, Vec<Sentence>)>> {
    let folds = kfold_indices(sentences.len(), k, seed)?;
    Ok(folds
        .into_iter()
        .map(|test_idx| {
            let mut in_test = vec![false; sentences.len()];
            for &i in &test_idx {
                in_test[i] = true;
            }
            let train: Vec<Sentence> = sentences
                .iter()
                .enumerate()
                .filter(|(i, _)| !in_test[*i])
                .map(|(_, s)| s.clone())
                .collect();
            let test: Vec<Sentence> = test_idx.iter().map(|&i| sentences[i].clone()).collect();
            (train, test)
        })
        .collect())
}

/// Per-fold reports plus the unweighted mean of the fold-level overall
/// F1 scores.
#[derive(Debug, Clone)]
pub struct CrossValReport {
    pub folds: Vec<ScoreReport>,
    pub mean_f1: f64,
}

/// Trains on each fold complement and scores on the held-out fold.
pub fn cross_validate(
    sentences: &[Sentence],
    k: usize,
    config: &TaggerConfig,
    embeddings: Option<&Embeddings>,
) -> Result<CrossValReport> {
    let mut folds = Vec::with_capacity(k);
    for (train_set, test_set) in kfold_split(sentences, k, config.seed)? {
        let model = train(&train_set, config, embeddings)?;
        folds.push(score_sentences(&model, &test_set, embeddings)?);
    }
    let mean_f1 = folds.iter().map(|r| r.overall.f1()).sum::<f64>() / folds.len() as f64;
    Ok(CrossValReport { folds, mean_f1 })
}

/// Tags every sentence with the model and scores against its labels.
pub fn score_sentences(
    model: &PerceptronModel,
    sentences: &[Sentence],
    embeddings: Option<&Embeddings>,
) -> Result<ScoreReport> {
    let spans: Vec<Vec<EntitySpan>> = sentences
        .iter()
        .map(|s| tag(model, s, embeddings).1)
        .collect();
    conll_score(sentences, &spans)
}
