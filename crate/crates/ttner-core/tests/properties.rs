//! Property tests for the invariants the rest of the pipeline leans on:
//! encode/decode identity, repair totality, serialization fixed points,
//! and structure preservation through normalization and fold splitting.

use proptest::prelude::*;
use ttner_core::corpus::{conll_to_string, read_conll_str, tokenize, turkish_lowercase, Sentence};
use ttner_core::encoding::{
    bilou_tags, bilou_to_spans, spans_to_bilou, EntitySpan, EntityType, Tag,
};
use ttner_core::eval::kfold_indices;
use ttner_core::normalizer::{normalize_sentence, LexiconNormalizer};
use ttner_core::tagger::{affixes, model_from_str, model_to_string, tag, train, TaggerConfig};

fn tag_strategy() -> impl Strategy<Value = Tag> {
    (0..bilou_tags().len()).prop_map(|i| bilou_tags()[i])
}

fn token_strategy() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-zA-Z0-9çğışöüÇĞİŞÖÜ'@#.,:/_-]{1,12}").unwrap()
}

fn text_strategy() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-zA-Z0-9çğışöüÇĞİŞÖÜ'@#.,:()!?/ ]{0,60}").unwrap()
}

proptest! {
    /// Decoding any tag sequence yields ordered, disjoint, in-range spans,
    /// and those spans re-encode and decode back to themselves.
    #[test]
    fn bilou_decode_encode_decode_is_stable(tags in proptest::collection::vec(tag_strategy(), 1..16)) {
        let spans = bilou_to_spans(&tags);
        for w in spans.windows(2) {
            prop_assert!(w[0].end < w[1].start);
        }
        for s in &spans {
            prop_assert!(s.start <= s.end && s.end < tags.len());
        }
        let encoded = spans_to_bilou(&spans, tags.len()).unwrap();
        prop_assert_eq!(encoded.len(), tags.len());
        prop_assert_eq!(bilou_to_spans(&encoded), spans);
    }

    /// Overlapping spans are rejected by the encoder.
    #[test]
    fn overlapping_spans_fail_to_encode(start in 0usize..8, len_a in 1usize..4, len_b in 1usize..4) {
        let a = EntitySpan::new(start, start + len_a - 1, EntityType::Per);
        let b = EntitySpan::new(start + len_a - 1, start + len_a - 1 + len_b - 1, EntityType::Loc);
        let length = start + len_a + len_b + 2;
        prop_assert!(spans_to_bilou(&[a, b], length).is_err());
    }

    /// CoNLL text survives a write → read → write cycle byte for byte.
    #[test]
    fn conll_round_trip(
        sentences in proptest::collection::vec(
            proptest::collection::vec(token_strategy(), 1..8), 1..6),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tags = bilou_tags();
        let built: Vec<Sentence> = sentences
            .iter()
            .map(|surfaces| {
                // labels valid by construction: decode a random sequence,
                // then re-encode the repaired spans
                let raw: Vec<Tag> = (0..surfaces.len())
                    .map(|_| tags[rng.random_range(0..tags.len())])
                    .collect();
                let labels = spans_to_bilou(&bilou_to_spans(&raw), surfaces.len()).unwrap();
                Sentence::from_surfaces(surfaces).with_labels(labels)
            })
            .collect();
        let text = conll_to_string(&built).unwrap();
        let parsed = read_conll_str(&text).unwrap();
        prop_assert_eq!(parsed.len(), built.len());
        for (a, b) in built.iter().zip(&parsed) {
            let sa: Vec<&str> = a.tokens.iter().map(|t| t.surface.as_str()).collect();
            let sb: Vec<&str> = b.tokens.iter().map(|t| t.surface.as_str()).collect();
            prop_assert_eq!(sa, sb);
            prop_assert_eq!(&a.labels, &b.labels);
        }
        prop_assert_eq!(conll_to_string(&parsed).unwrap(), text);
    }

    /// Tokenization is a fixed point: joining the surfaces and tokenizing
    /// again reproduces the same surface sequence.
    #[test]
    fn tokenize_is_idempotent(text in text_strategy()) {
        let once: Vec<String> = tokenize(&text).into_iter().map(|t| t.surface).collect();
        for surface in &once {
            prop_assert!(!surface.is_empty());
            prop_assert!(!surface.chars().any(char::is_whitespace));
        }
        let twice: Vec<String> = tokenize(&once.join(" ")).into_iter().map(|t| t.surface).collect();
        prop_assert_eq!(once, twice);
    }

    /// Turkish lowercasing is idempotent over the alphabet we process.
    #[test]
    fn turkish_lowercase_is_idempotent(text in text_strategy()) {
        let once = turkish_lowercase(&text);
        prop_assert_eq!(turkish_lowercase(&once), once.clone());
        prop_assert!(!once.contains('I') && !once.contains('İ'));
    }

    /// Affixes are strictly shorter than the word, measured in chars.
    #[test]
    fn affixes_are_strictly_shorter(word in token_strategy()) {
        let n = word.chars().count();
        let a = affixes(&word);
        for p in a.prefixes.iter().chain(&a.suffixes) {
            let len = p.chars().count();
            prop_assert!(len < n, "affix {p:?} not shorter than {word:?}");
        }
        prop_assert_eq!(a.prefixes.len(), [3, 4].iter().filter(|&&l| n > l).count());
        prop_assert_eq!(a.suffixes.len(), (1..=4).filter(|&l| n > l).count());
    }

    /// Normalization rewrites processed forms only: token count, surfaces,
    /// and labels all pass through unchanged.
    #[test]
    fn normalization_preserves_structure(
        surfaces in proptest::collection::vec(token_strategy(), 1..8),
        rewrite_mask in proptest::collection::vec(any::<bool>(), 8),
    ) {
        let sentence = Sentence::from_surfaces(&surfaces)
            .with_labels(vec![Tag::Outside; surfaces.len()]);
        let rewritten: std::collections::HashSet<&str> = sentence
            .tokens
            .iter()
            .zip(&rewrite_mask)
            .filter(|(_, &m)| m)
            .map(|(t, _)| t.processed.as_str())
            .collect();
        let lexicon: String = rewritten
            .iter()
            .map(|form| format!("{form}\tREPLACED\n"))
            .collect();
        let plugin = LexiconNormalizer::from_str(&lexicon, "test").unwrap();
        let out = normalize_sentence(&sentence, &plugin);
        prop_assert_eq!(out.len(), sentence.len());
        prop_assert_eq!(&out.labels, &sentence.labels);
        for (a, b) in sentence.tokens.iter().zip(&out.tokens) {
            prop_assert_eq!(&a.surface, &b.surface);
            if rewritten.contains(a.processed.as_str()) {
                prop_assert_eq!(b.processed.as_str(), "REPLACED");
            } else {
                prop_assert_eq!(&a.processed, &b.processed);
            }
        }
    }

    /// Fold indices form a partition of 0..n into k contiguous-size blocks
    /// whose sizes differ by at most one.
    #[test]
    fn kfold_is_a_partition(n in 2usize..200, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let k = 2 + ((n - 2) as f64 * k_frac) as usize;
        let folds = kfold_indices(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        prop_assert!(sizes[k - 1] - sizes[0] <= 1);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// A trained model survives serialization: identical predictions on
    /// its own training sentences.
    #[test]
    fn model_text_round_trip_preserves_predictions(
        surfaces in proptest::collection::vec(token_strategy(), 2..6),
        epochs in 1usize..4,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tags = bilou_tags();
        let raw: Vec<Tag> = (0..surfaces.len())
            .map(|_| tags[rng.random_range(0..tags.len())])
            .collect();
        let labels = spans_to_bilou(&bilou_to_spans(&raw), surfaces.len()).unwrap();
        let corpus = vec![Sentence::from_surfaces(&surfaces).with_labels(labels)];
        let config = TaggerConfig { epochs, seed, ..TaggerConfig::default() };
        let model = train(&corpus, &config, None).unwrap();
        let loaded = model_from_str(&model_to_string(&model)).unwrap();
        prop_assert_eq!(loaded.config(), model.config());
        for sentence in &corpus {
            prop_assert_eq!(tag(&loaded, sentence, None), tag(&model, sentence, None));
        }
    }
}
