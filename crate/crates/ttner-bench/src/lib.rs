//! Shared inputs for the criterion benches; the crate ships no runtime code.

use ttner_core::corpus::Sentence;
use ttner_core::synth::{separable_ner_corpus, two_group_corpus};

pub fn embedding_corpus(tokens: usize) -> Vec<Vec<String>> {
    two_group_corpus(1, tokens).sentences
}

pub fn tagging_corpus(sentences: usize) -> Vec<Sentence> {
    separable_ner_corpus(1, sentences)
}
