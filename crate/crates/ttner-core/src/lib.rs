//! Two-stage semi-supervised named-entity recognition for noisy Turkish
//! microblog text.
//!
//! Stage one ([`embeddings`]) learns skip-gram word vectors with negative
//! sampling from an unlabeled corpus. Stage two ([`tagger`]) trains an
//! averaged multiclass perceptron over local features (context words,
//! capitalization, word shape, affixes, previous tags, and the stage-one
//! embeddings) with BILOU-encoded labels ([`encoding`]). Results are
//! scored with the strict phrase-level CoNLL metric ([`eval`]), and
//! [`harness`] runs experiment grids over feature/normalizer
//! configurations. [`corpus`] handles tweet preprocessing and file
//! formats; [`normalizer`] hosts pluggable token normalization; [`synth`]
//! generates the deterministic fixture datasets shipped with the crate.

pub mod corpus;
pub mod embeddings;
pub mod encoding;
pub mod error;
pub mod eval;
pub mod harness;
pub mod normalizer;
pub mod synth;
pub mod tagger;

pub use corpus::{DatasetStats, Sentence, Token};
pub use embeddings::{Embeddings, SgnsConfig, SkipgramModel, Vocabulary};
pub use encoding::{EntitySpan, EntityType, Tag, TagScheme};
pub use error::{Error, Result};
pub use eval::{CrossValReport, PrfScore, ScoreReport};
pub use normalizer::{IdentityNormalizer, LexiconNormalizer, Normalizer};
pub use tagger::{FeatureOptions, PerceptronModel, TaggerConfig};
