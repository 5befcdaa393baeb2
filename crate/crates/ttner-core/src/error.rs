use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Display strings lead with the
/// variant name so CLI diagnostics and tests can match on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("MalformedLine: line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },

    #[error("UnknownTag: line {line}: {tag:?} is not a BIO/BILOU tag")]
    UnknownTag { line: usize, tag: String },

    #[error("UnlabeledInput: sentence {sentence} carries no tags")]
    UnlabeledInput { sentence: usize },

    #[error("OverlappingSpans: [{0}, {1}] overlaps [{2}, {3}]", .first.0, .first.1, .second.0, .second.1)]
    OverlappingSpans {
        first: (usize, usize),
        second: (usize, usize),
    },

    #[error("SpanOutOfRange: span [{start}, {end}] does not fit a {len}-token sentence")]
    SpanOutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("EmptyVocabulary: no word survived the frequency cutoff")]
    EmptyVocabulary,

    #[error("DimensionMismatch: expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ZeroVector: cosine similarity is undefined for a zero-norm vector")]
    ZeroVector,

    #[error("UnknownWord: {word:?} is not in the vocabulary")]
    UnknownWord { word: String },

    #[error("FormatError: line {line}: {msg}")]
    FormatError { line: usize, msg: String },

    #[error("UnknownPlugin: no normalizer named {name:?}")]
    UnknownPlugin { name: String },

    #[error("IndexOutOfRange: token {index} in a {len}-token sentence")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("EmptyTrainingSet: no labeled tokens to train on")]
    EmptyTrainingSet,

    #[error("InvalidLabel: {msg}")]
    InvalidLabel { msg: String },

    #[error("VersionMismatch: expected header {expected:?}, found {found:?}")]
    VersionMismatch { expected: String, found: String },

    #[error("AlignmentError: {msg}")]
    AlignmentError { msg: String },

    #[error("TooFewSentences: {have} sentences cannot fill {need} folds")]
    TooFewSentences { have: usize, need: usize },

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
}
