//! Deterministic generators for the synthetic fixture corpora shipped
//! with the crate: a two-group corpus for embedding sanity checks, a
//! lexically separable NER corpus, an embedding-sensitive benchmark
//! where test entities are unseen surface forms, and labeled datasets
//! with pinned entity counts for the stats tooling.
//!
//! Everything is a pure function of its seed, so the committed data
//! files can be verified against the generators byte for byte.

use crate::corpus::Sentence;
use crate::embeddings::Embeddings;
use crate::encoding::{spans_to_bilou, EntitySpan, EntityType};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::fmt::Write as _;

const SYLLABLES: [&str; 40] = [
    "ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du", "ka", "ke", "ki", "ko", "ku", "la",
    "le", "li", "lo", "lu", "ma", "me", "mi", "mo", "mu", "na", "ne", "ni", "no", "nu", "ra", "re",
    "ri", "ro", "ru", "sa", "se", "si", "so", "su",
];

// Pseudo-word factory: three-syllable words (six letters) whose
// five-letter prefixes are unique, so the "drop the final letter"
// ill-formed variants collide with nothing.
struct WordFactory {
    rng: ChaCha8Rng,
    prefixes: HashSet<String>,
}

impl WordFactory {
    fn new(seed: u64) -> WordFactory {
        WordFactory {
            rng: ChaCha8Rng::seed_from_u64(seed),
            prefixes: HashSet::new(),
        }
    }

    fn word(&mut self) -> String {
        loop {
            let w: String = (0..3)
                .map(|_| *SYLLABLES.choose(&mut self.rng).unwrap())
                .collect();
            if self.prefixes.insert(w[..5].to_string()) {
                return w;
            }
        }
    }

    fn words(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.word()).collect()
    }
}

// The shortened spelling a sloppy writer might use; the normalization
// lexicon maps it back.
fn ill_formed(word: &str) -> String {
    word[..word.len() - 1].to_string()
}

/// Unlabeled corpus of two word groups, each appearing only inside its
/// own group's context frames; words within a group are distributionally
/// interchangeable, words across groups never share a context.
#[derive(Debug, Clone)]
pub struct TwoGroupCorpus {
    pub sentences: Vec<Vec<String>>,
    pub group_a: Vec<String>,
    pub group_b: Vec<String>,
}

/// Generates roughly `tokens` tokens (three per sentence).
pub fn two_group_corpus(seed: u64, tokens: usize) -> TwoGroupCorpus {
    let mut factory = WordFactory::new(seed ^ 0x7477_6f67);
    let group_a = factory.words(10);
    let group_b = factory.words(10);
    let frames_a = factory.words(6);
    let frames_b = factory.words(6);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sentences = Vec::new();
    for _ in 0..tokens.div_ceil(3) {
        let (group, frames) = if rng.random::<f64>() < 0.5 {
            (&group_a, &frames_a)
        } else {
            (&group_b, &frames_b)
        };
        sentences.push(vec![
            frames.choose(&mut rng).unwrap().clone(),
            group.choose(&mut rng).unwrap().clone(),
            frames.choose(&mut rng).unwrap().clone(),
        ]);
    }
    TwoGroupCorpus {
        sentences,
        group_a,
        group_b,
    }
}

const FILLERS: [&str; 24] = [
    "bugün",
    "yarın",
    "dün",
    "sonra",
    "önce",
    "yine",
    "çok",
    "az",
    "hemen",
    "belki",
    "gerçekten",
    "sadece",
    "artık",
    "bile",
    "kadar",
    "için",
    "gibi",
    "ama",
    "ve",
    "ise",
    "diye",
    "daha",
    "neden",
    "şimdi",
];

const VERBS: [&str; 10] = [
    "geldi", "gitti", "gördü", "dedi", "sordu", "anlattı", "yazdı", "okudu", "buldu", "verdi",
];

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Labeled corpus where entity surfaces come from three disjoint
/// per-type lexicons and every other token comes from a fixed filler
/// pool, so token identity alone separates the classes perfectly.
pub fn separable_ner_corpus(seed: u64, sentences: usize) -> Vec<Sentence> {
    let mut factory = WordFactory::new(seed ^ 0x7365_7061);
    let first_names: Vec<String> = factory.words(20).iter().map(|w| capitalize(w)).collect();
    let last_names: Vec<String> = factory.words(20).iter().map(|w| capitalize(w)).collect();
    let places: Vec<String> = factory.words(25).iter().map(|w| capitalize(w)).collect();
    let org_names: Vec<String> = factory.words(20).iter().map(|w| capitalize(w)).collect();
    let org_suffixes = ["Holding", "Grubu", "Vakfı", "Partisi"];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let mut surfaces: Vec<String> = Vec::new();
        let mut spans: Vec<EntitySpan> = Vec::new();
        for _ in 0..rng.random_range(0..=2usize) {
            surfaces.push(FILLERS.choose(&mut rng).unwrap().to_string());
        }
        let entities = if rng.random::<f64>() < 0.2 { 2 } else { 1 };
        for e in 0..entities {
            let start = surfaces.len();
            let etype = match rng.random_range(0..3u8) {
                0 => {
                    surfaces.push(first_names.choose(&mut rng).unwrap().clone());
                    if rng.random::<f64>() < 0.5 {
                        surfaces.push(last_names.choose(&mut rng).unwrap().clone());
                    }
                    EntityType::Per
                }
                1 => {
                    surfaces.push(places.choose(&mut rng).unwrap().clone());
                    EntityType::Loc
                }
                _ => {
                    surfaces.push(org_names.choose(&mut rng).unwrap().clone());
                    if rng.random::<f64>() < 0.5 {
                        surfaces.push(org_suffixes.choose(&mut rng).unwrap().to_string());
                    }
                    EntityType::Org
                }
            };
            spans.push(EntitySpan::new(start, surfaces.len() - 1, etype));
            if e + 1 < entities {
                surfaces.push(FILLERS.choose(&mut rng).unwrap().to_string());
            }
        }
        surfaces.push(VERBS.choose(&mut rng).unwrap().to_string());
        let tags =
            spans_to_bilou(&spans, surfaces.len()).expect("spans are disjoint by construction");
        out.push(Sentence::from_surfaces(&surfaces).with_labels(tags));
    }
    out
}

/// The embedding-sensitive benchmark: every test entity surface is
/// unseen in training, and entity and distractor sentences share the
/// same context frames, so context features are uninformative and only
/// the embedding neighborhood identifies test entities. A fraction of
/// test entity tokens additionally use an ill-formed spelling (absent
/// from the vectors too) that the bundled normalization lexicon repairs.
#[derive(Debug, Clone)]
pub struct EmbeddingBenchmark {
    pub train: Vec<Sentence>,
    pub test: Vec<Sentence>,
    /// Word2vec text with one cluster per entity type, one for
    /// distractors and one for frame words.
    pub vectors_text: String,
    /// Tab-separated ill-formed → canonical rows.
    pub norm_lexicon_text: String,
}

impl EmbeddingBenchmark {
    pub fn vectors(&self) -> Embeddings {
        Embeddings::from_w2v_str(&self.vectors_text).expect("generated vectors are well-formed")
    }
}

pub fn embedding_benchmark(seed: u64) -> EmbeddingBenchmark {
    const DIM: usize = 16;
    const TRAIN_WORDS: usize = 18;
    const TEST_WORDS: usize = 9;

    let mut factory = WordFactory::new(seed ^ 0x6265_6e63);
    let types = [EntityType::Per, EntityType::Loc, EntityType::Org];
    // per-type lexicons, split into train-visible and test-only surfaces
    let lexicons: Vec<Vec<String>> = (0..3)
        .map(|_| factory.words(TRAIN_WORDS + TEST_WORDS))
        .collect();
    let distractors = factory.words(40);
    let unseen_distractors = factory.words(10);
    let frame_pairs: Vec<(String, String)> =
        (0..6).map(|_| (factory.word(), factory.word())).collect();

    // Clustered vectors: blocks of four dimensions carry each cluster.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7665_6373);
    let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
    let add_cluster = |words: &[String],
                       block: usize,
                       sign: f64,
                       rng: &mut ChaCha8Rng,
                       entries: &mut Vec<(String, Vec<f64>)>| {
        for w in words {
            let v: Vec<f64> = (0..DIM)
                .map(|d| {
                    let base = if d / 4 == block { sign * 0.6 } else { 0.0 };
                    base + rng.random_range(-0.08..0.08)
                })
                .collect();
            entries.push((w.clone(), v));
        }
    };
    for (block, lexicon) in lexicons.iter().enumerate() {
        add_cluster(lexicon, block, 1.0, &mut rng, &mut entries);
    }
    add_cluster(&distractors, 3, 1.0, &mut rng, &mut entries);
    add_cluster(&unseen_distractors, 3, 1.0, &mut rng, &mut entries);
    let frame_words: Vec<String> = frame_pairs
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    add_cluster(&frame_words, 3, -1.0, &mut rng, &mut entries);

    let mut vectors_text = format!("{} {}\n", entries.len(), DIM);
    for (w, v) in &entries {
        vectors_text.push_str(w);
        for c in v {
            let _ = write!(vectors_text, " {c:.6}");
        }
        vectors_text.push('\n');
    }

    let mut norm_lexicon_text = String::new();
    for lexicon in &lexicons {
        for w in &lexicon[TRAIN_WORDS..] {
            let _ = writeln!(norm_lexicon_text, "{}\t{w}", ill_formed(w));
        }
    }

    // One frame sentence per line: [left, middle, right]; the middle
    // token is an entity half the time.
    let sentence = |rng: &mut ChaCha8Rng, test: bool| -> Sentence {
        let (left, right) = frame_pairs.choose(rng).unwrap();
        let mut spans = Vec::new();
        let middle = if rng.random::<f64>() < 0.5 {
            let t = rng.random_range(0..3usize);
            let pool = if test {
                &lexicons[t][TRAIN_WORDS..]
            } else {
                &lexicons[t][..TRAIN_WORDS]
            };
            let word = pool.choose(rng).unwrap().clone();
            spans.push(EntitySpan::new(1, 1, types[t]));
            if test && rng.random::<f64>() < 0.15 {
                ill_formed(&word)
            } else {
                word
            }
        } else if test && rng.random::<f64>() < 0.3 {
            unseen_distractors.choose(rng).unwrap().clone()
        } else {
            distractors.choose(rng).unwrap().clone()
        };
        let surfaces = vec![left.clone(), middle, right.clone()];
        let tags = spans_to_bilou(&spans, 3).expect("span fits the frame");
        Sentence::from_surfaces(&surfaces).with_labels(tags)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = (0..600).map(|_| sentence(&mut rng, false)).collect();
    let test = (0..300).map(|_| sentence(&mut rng, true)).collect();

    EmbeddingBenchmark {
        train,
        test,
        vectors_text,
        norm_lexicon_text,
    }
}

// Labeled tweets hitting exact per-type span quotas, with light social
// media texture (mentions, hashtags) in the filler tokens.
fn quota_fixture(seed: u64, mut quotas: [usize; 3]) -> Vec<Sentence> {
    let mut factory = WordFactory::new(seed ^ 0x7477_7464);
    let names: Vec<Vec<String>> = (0..3)
        .map(|_| factory.words(30).iter().map(|w| capitalize(w)).collect())
        .collect();
    let types = [EntityType::Per, EntityType::Loc, EntityType::Org];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while quotas.iter().sum::<usize>() > 0 {
        let mut surfaces: Vec<String> = Vec::new();
        let mut spans: Vec<EntitySpan> = Vec::new();
        let filler = |surfaces: &mut Vec<String>, rng: &mut ChaCha8Rng| {
            let roll = rng.random::<f64>();
            if roll < 0.06 {
                surfaces.push(format!("@kszn{}", rng.random_range(10..100)));
            } else if roll < 0.12 {
                surfaces.push(format!("#{}", FILLERS.choose(rng).unwrap()));
            } else {
                surfaces.push(FILLERS.choose(rng).unwrap().to_string());
            }
        };
        filler(&mut surfaces, &mut rng);
        let entities = rng.random_range(1..=3usize).min(quotas.iter().sum());
        for _ in 0..entities {
            // draw the type with the largest remaining quota at random,
            // proportionally, so all three run out together
            let total: usize = quotas.iter().sum();
            if total == 0 {
                break;
            }
            let mut pick = rng.random_range(0..total);
            let mut t = 0;
            for (i, &q) in quotas.iter().enumerate() {
                if pick < q {
                    t = i;
                    break;
                }
                pick -= q;
            }
            quotas[t] -= 1;
            let start = surfaces.len();
            surfaces.push(names[t].choose(&mut rng).unwrap().clone());
            if rng.random::<f64>() < 0.3 {
                surfaces.push(names[t].choose(&mut rng).unwrap().clone());
            }
            spans.push(EntitySpan::new(start, surfaces.len() - 1, types[t]));
            filler(&mut surfaces, &mut rng);
        }
        surfaces.push(VERBS.choose(&mut rng).unwrap().to_string());
        let tags = spans_to_bilou(&spans, surfaces.len()).expect("spans are sequential");
        out.push(Sentence::from_surfaces(&surfaces).with_labels(tags));
    }
    out
}

/// Labeled fixture with exactly 676 person, 241 location and 419
/// organization spans (1336 total).
pub fn twtds1_fixture() -> Vec<Sentence> {
    quota_fixture(1001, [676, 241, 419])
}

/// Labeled fixture with exactly 457 person, 282 location and 241
/// organization spans (980 total).
pub fn twtds2_fixture() -> Vec<Sentence> {
    quota_fixture(1002, [457, 282, 241])
}

/// The generated data files shipped under `data/`, as (relative path,
/// content) pairs. A unit test keeps the committed copies in sync.
pub fn fixture_files() -> Vec<(&'static str, String)> {
    let conll = |sentences: &[Sentence]| {
        crate::corpus::conll_to_string(sentences).expect("generated sentences are labeled")
    };
    let b = embedding_benchmark(41);
    vec![
        ("synth/train.conll", conll(&b.train)),
        ("synth/test.conll", conll(&b.test)),
        ("synth/synth.vec", b.vectors_text),
        ("synth/norm_lexicon.tsv", b.norm_lexicon_text),
        ("twtds1.conll", conll(&twtds1_fixture())),
        ("twtds2.conll", conll(&twtds2_fixture())),
    ]
}
