//! Skip-gram word embeddings with negative sampling: vocabulary
//! construction, SGD training (optionally multi-worker, lock-free),
//! similarity queries, and the word2vec text format.

use crate::error::{Error, Result};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

/// Dense word→id map with per-id frequency counts. Ids are assigned by
/// descending count, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    min_count: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Counts words over the corpus and keeps those with count ≥ `min_count`.
pub fn build_vocab(corpus: &[Vec<String>], min_count: u64) -> Result<Vocabulary> {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for sentence in corpus {
        for word in sentence {
            *freq.entry(word).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let words: Vec<String> = kept.iter().map(|(w, _)| w.to_string()).collect();
    let counts: Vec<u64> = kept.iter().map(|&(_, c)| c).collect();
    let index = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    Ok(Vocabulary {
        words,
        index,
        counts,
        min_count,
    })
}

/// Paired input/output vector tables, row-major, V×dim each. The input
/// vectors are the word embeddings served to consumers.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    input: Vec<f64>,
    output: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.input.len() / self.dim
    }

    pub fn input_row(&self, id: usize) -> &[f64] {
        &self.input[id * self.dim..(id + 1) * self.dim]
    }

    pub fn output_row(&self, id: usize) -> &[f64] {
        &self.output[id * self.dim..(id + 1) * self.dim]
    }
}

/// Skip-gram training hyperparameters.
#[derive(Debug, Clone)]
pub struct SgnsConfig {
    pub dim: usize,
    /// Context half-width: this many previous and next words.
    pub window: usize,
    /// Negative samples per (center, context) pair.
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to `alpha0 * 1e-4`.
    pub alpha0: f64,
    pub min_count: u64,
    pub seed: u64,
    /// Frequent-word subsampling threshold; `None` disables (default).
    pub subsample: Option<f64>,
    /// Worker threads. One worker is bit-deterministic; more trade
    /// determinism for speed (lock-free shared updates, races tolerated).
    pub workers: usize,
}

impl Default for SgnsConfig {
    fn default() -> SgnsConfig {
        SgnsConfig {
            dim: 200,
            window: 2,
            negatives: 5,
            epochs: 5,
            alpha0: 0.025,
            min_count: 5,
            seed: 1,
            subsample: None,
            workers: 1,
        }
    }
}

/// Gradients of the negative-sampling loss for one (center, context,
/// negatives) instance.
#[derive(Debug, Clone)]
pub struct SgnsGradients {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

// ln(1 + e^x) without overflow; -ln σ(x) = softplus(-x).
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Loss and exact analytic gradients of the skip-gram negative-sampling
/// objective: −log σ(u_ctx·v_c) − Σ_neg log σ(−u_neg·v_c). `center` is the
/// input vector of the center word, `context` and `negatives` are output
/// vectors.
pub fn sgns_loss_and_grads(
    center: &[f64],
    context: &[f64],
    negatives: &[&[f64]],
) -> Result<SgnsGradients> {
    let dim = center.len();
    let check = |v: &[f64]| {
        if v.len() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            })
        }
    };
    check(context)?;
    for neg in negatives {
        check(neg)?;
    }

    let pos_dot = dot(center, context);
    let mut loss = softplus(-pos_dot);
    // d loss / d pos_dot
    let pos_g = sigmoid(pos_dot) - 1.0;

    let mut grad_center: Vec<f64> = context.iter().map(|u| pos_g * u).collect();
    let grad_context: Vec<f64> = center.iter().map(|v| pos_g * v).collect();

    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for neg in negatives {
        let neg_dot = dot(center, neg);
        loss += softplus(neg_dot);
        let neg_g = sigmoid(neg_dot);
        for (gc, u) in grad_center.iter_mut().zip(*neg) {
            *gc += neg_g * u;
        }
        grad_negatives.push(center.iter().map(|v| neg_g * v).collect());
    }

    Ok(SgnsGradients {
        loss,
        center: grad_center,
        context: grad_context,
        negatives: grad_negatives,
    })
}

/// Draws negative-sample word ids from the unigram^(3/4) distribution.
pub struct NegativeSampler {
    dist: WeightedIndex<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary) -> NegativeSampler {
        let weights = (0..vocab.len()).map(|id| (vocab.count(id) as f64).powf(0.75));
        NegativeSampler {
            // counts are ≥ 1 by construction, so weights are valid
            dist: WeightedIndex::new(weights).expect("non-empty positive weights"),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        self.dist.sample(rng)
    }
}

// f64 cell updated without locking; concurrent read-modify-write races are
// tolerated by the training contract, and single-threaded use is exact.
struct LossyCell(AtomicU64);

impl LossyCell {
    fn new(v: f64) -> LossyCell {
        LossyCell(AtomicU64::new(v.to_bits()))
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn add(&self, delta: f64) {
        self.0
            .store((self.get() + delta).to_bits(), Ordering::Relaxed);
    }
}

struct SharedMatrix {
    input: Vec<LossyCell>,
    output: Vec<LossyCell>,
}

impl SharedMatrix {
    fn copy_row(cells: &[LossyCell], dim: usize, id: usize, out: &mut Vec<f64>) {
        out.clear();
        out.extend(cells[id * dim..(id + 1) * dim].iter().map(LossyCell::get));
    }

    fn add_row(cells: &[LossyCell], dim: usize, id: usize, grad: &[f64], scale: f64) {
        for (cell, g) in cells[id * dim..(id + 1) * dim].iter().zip(grad) {
            cell.add(scale * g);
        }
    }
}

/// A trained model: the embeddings plus the mean per-pair loss of each
/// epoch (merged over workers).
#[derive(Debug, Clone)]
pub struct SkipgramModel {
    pub embeddings: Embeddings,
    pub epoch_loss: Vec<f64>,
}

/// Trains skip-gram embeddings with negative sampling. Input vectors start
/// uniform in [−0.5/dim, +0.5/dim) from the seed, output vectors at zero.
/// With `workers == 1` the result is bit-reproducible for a given seed.
pub fn train_skipgram(corpus: &[Vec<String>], config: &SgnsConfig) -> Result<SkipgramModel> {
    assert!(config.dim > 0 && config.window >= 1 && config.epochs > 0);
    let vocab = build_vocab(corpus, config.min_count)?;
    let ids: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|w| vocab.id(w)).collect())
        .filter(|s: &Vec<usize>| !s.is_empty())
        .collect();
    let dim = config.dim;
    let vsize = vocab.len();

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let input: Vec<LossyCell> = (0..vsize * dim)
        .map(|_| LossyCell::new((init_rng.random::<f64>() - 0.5) / dim as f64))
        .collect();
    let output: Vec<LossyCell> = (0..vsize * dim).map(|_| LossyCell::new(0.0)).collect();
    let matrix = SharedMatrix { input, output };

    let sampler = NegativeSampler::new(&vocab);
    let tokens_per_epoch: u64 = ids.iter().map(|s| s.len() as u64).sum();
    let total_tokens = (tokens_per_epoch * config.epochs as u64).max(1);
    let done_tokens = AtomicU64::new(0);
    let total_count = vocab.total_count();

    let workers = config.workers.max(1);
    let shards: Vec<Vec<&[usize]>> = (0..workers)
        .map(|w| {
            ids.iter()
                .skip(w)
                .step_by(workers)
                .map(Vec::as_slice)
                .collect()
        })
        .collect();

    let run_worker = |worker: usize, shard: &[&[usize]]| -> Vec<(f64, u64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(worker as u64 + 1);
        let mut center_vec = Vec::with_capacity(dim);
        let mut context_vec = Vec::with_capacity(dim);
        let mut epoch_loss = vec![(0.0, 0u64); config.epochs];
        let mut kept = Vec::new();

        for slot in &mut epoch_loss {
            for &sentence in shard {
                let done = done_tokens.fetch_add(sentence.len() as u64, Ordering::Relaxed);
                let alpha = config.alpha0 * (1.0 - done as f64 / total_tokens as f64).max(1e-4);

                kept.clear();
                kept.extend_from_slice(sentence);
                if let Some(t) = config.subsample {
                    kept.retain(|&id| {
                        let f = vocab.count(id) as f64 / total_count as f64;
                        let keep = (t / f).sqrt() + t / f;
                        rng.random::<f64>() < keep
                    });
                }

                for c in 0..kept.len() {
                    let lo = c.saturating_sub(config.window);
                    let hi = (c + config.window).min(kept.len() - 1);
                    for x in lo..=hi {
                        if x == c {
                            continue;
                        }
                        let center = kept[c];
                        let context = kept[x];
                        SharedMatrix::copy_row(&matrix.input, dim, center, &mut center_vec);
                        SharedMatrix::copy_row(&matrix.output, dim, context, &mut context_vec);
                        let mut neg_ids = Vec::with_capacity(config.negatives);
                        for _ in 0..config.negatives {
                            let neg = sampler.sample(&mut rng);
                            // a draw that hits the positive context word is
                            // skipped, not redrawn
                            if neg != context {
                                neg_ids.push(neg);
                            }
                        }
                        let neg_vecs: Vec<Vec<f64>> = neg_ids
                            .iter()
                            .map(|&id| {
                                matrix.output[id * dim..(id + 1) * dim]
                                    .iter()
                                    .map(LossyCell::get)
                                    .collect()
                            })
                            .collect();
                        let neg_refs: Vec<&[f64]> = neg_vecs.iter().map(Vec::as_slice).collect();

                        let grads = sgns_loss_and_grads(&center_vec, &context_vec, &neg_refs)
                            .expect("dimensions agree by construction");

                        SharedMatrix::add_row(&matrix.input, dim, center, &grads.center, -alpha);
                        SharedMatrix::add_row(&matrix.output, dim, context, &grads.context, -alpha);
                        for (&id, grad) in neg_ids.iter().zip(&grads.negatives) {
                            SharedMatrix::add_row(&matrix.output, dim, id, grad, -alpha);
                        }
                        slot.0 += grads.loss;
                        slot.1 += 1;
                    }
                }
            }
        }
        epoch_loss
    };

    let per_worker: Vec<Vec<(f64, u64)>> = if workers == 1 {
        vec![run_worker(0, &shards[0])]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = shards
                .iter()
                .enumerate()
                .map(|(w, shard)| scope.spawn(move || run_worker(w, shard)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    };

    let epoch_loss = (0..config.epochs)
        .map(|e| {
            let (sum, n) = per_worker
                .iter()
                .fold((0.0, 0u64), |(s, n), w| (s + w[e].0, n + w[e].1));
            if n == 0 {
                0.0
            } else {
                sum / n as f64
            }
        })
        .collect();

    let embeddings = Embeddings {
        vocab,
        matrix: EmbeddingMatrix {
            dim,
            input: matrix.input.iter().map(LossyCell::get).collect(),
            output: matrix.output.iter().map(LossyCell::get).collect(),
        },
    };
    Ok(SkipgramModel {
        embeddings,
        epoch_loss,
    })
}

/// Cosine similarity; errors on a zero-norm input.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot(a, b) / (na * nb))
}

/// A queryable vocabulary + vector table pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    vocab: Vocabulary,
    matrix: EmbeddingMatrix,
}

impl Embeddings {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn matrix(&self) -> &EmbeddingMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    /// The word's embedding (input vector), or `None` for out-of-vocabulary
    /// words; callers substitute a zero vector where needed.
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.vocab.id(word).map(|id| self.matrix.input_row(id))
    }

    /// The `n` nearest vocabulary words by cosine, self excluded, ties
    /// broken by ascending word id.
    pub fn nearest_neighbors(&self, word: &str, n: usize) -> Result<Vec<(String, f64)>> {
        let id = self.vocab.id(word).ok_or_else(|| Error::UnknownWord {
            word: word.to_string(),
        })?;
        let query = self.matrix.input_row(id);
        let mut scored: Vec<(usize, f64)> = Vec::with_capacity(self.vocab.len());
        for other in 0..self.vocab.len() {
            if other == id {
                continue;
            }
            match cosine(query, self.matrix.input_row(other)) {
                Ok(sim) => scored.push((other, sim)),
                Err(Error::ZeroVector) => continue,
                Err(e) => return Err(e),
            }
        }
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        Ok(scored
            .into_iter()
            .take(n)
            .map(|(id, sim)| (self.vocab.word(id).to_string(), sim))
            .collect())
    }

    /// Renders the word2vec text format: "V dim" header, then one word per
    /// line with its input vector to six decimal places.
    pub fn to_w2v_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.vocab.len(), self.matrix.dim);
        for id in 0..self.vocab.len() {
            out.push_str(self.vocab.word(id));
            for v in self.matrix.input_row(id) {
                let _ = write!(out, " {v:.6}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save_w2v_text(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_w2v_string())?;
        Ok(())
    }

    pub fn from_w2v_str(text: &str) -> Result<Embeddings> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::FormatError {
            line: 1,
            msg: "empty vector file".to_string(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (vsize, dim) = match fields.as_slice() {
            [v, d] => match (v.parse::<usize>(), d.parse::<usize>()) {
                (Ok(v), Ok(d)) if d > 0 => (v, d),
                _ => {
                    return Err(Error::FormatError {
                        line: 1,
                        msg: format!("bad header {header:?}, expected \"V dim\""),
                    })
                }
            },
            _ => {
                return Err(Error::FormatError {
                    line: 1,
                    msg: format!("bad header {header:?}, expected \"V dim\""),
                })
            }
        };

        let mut words = Vec::with_capacity(vsize);
        let mut index = HashMap::with_capacity(vsize);
        let mut input = Vec::with_capacity(vsize * dim);
        for (i, line) in lines {
            let lineno = i + 1;
            if words.len() == vsize {
                return Err(Error::FormatError {
                    line: lineno,
                    msg: format!("more than the declared {vsize} rows"),
                });
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().ok_or_else(|| Error::FormatError {
                line: lineno,
                msg: "empty row".to_string(),
            })?;
            let mut row = Vec::with_capacity(dim);
            for field in fields {
                let v: f64 = field.parse().map_err(|_| Error::FormatError {
                    line: lineno,
                    msg: format!("bad float {field:?}"),
                })?;
                row.push(v);
            }
            if row.len() != dim {
                return Err(Error::FormatError {
                    line: lineno,
                    msg: format!("expected {dim} components, got {}", row.len()),
                });
            }
            if index.insert(word.to_string(), words.len()).is_some() {
                return Err(Error::FormatError {
                    line: lineno,
                    msg: format!("duplicate word {word:?}"),
                });
            }
            words.push(word.to_string());
            input.extend(row);
        }
        if words.len() != vsize {
            return Err(Error::FormatError {
                line: words.len() + 1,
                msg: format!("expected {vsize} rows, got {}", words.len()),
            });
        }

        let counts = vec![0; words.len()];
        Ok(Embeddings {
            vocab: Vocabulary {
                words,
                index,
                counts,
                min_count: 0,
            },
            matrix: EmbeddingMatrix {
                dim,
                output: vec![0.0; input.len()],
                input,
            },
        })
    }

    pub fn load_w2v_text(path: impl AsRef<Path>) -> Result<Embeddings> {
        Embeddings::from_w2v_str(&fs::read_to_string(path)?)
    }
}
