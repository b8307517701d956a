//! Bias exploration for word embeddings and sentence scorers.
//!
//! The crate is organised around the workflow of an audit:
//!
//! - [`corpus`] indexes a collection-tagged corpus and serves word
//!   frequencies and seeded concordance samples;
//! - [`embedding`] loads word vectors and answers similarity, neighbour
//!   and projection queries;
//! - [`trainer`] infers a PPMI-SVD embedding from an indexed corpus;
//! - [`bias`] builds bias spaces from two opposed seed lists
//!   ([`lexicon`]) and scores words against one or two of them;
//! - [`lm`] probes sentence scorers with fill-the-blank templates and
//!   stereotype/antistereotype pairs;
//! - [`report`] turns results into CSV tables and reproducible reports.

pub mod bias;
pub mod corpus;
pub mod embedding;
pub mod lexicon;
pub mod lm;
pub mod report;
pub mod sparse;
pub mod svd;
pub mod text;
pub mod trainer;

pub use bias::{BiasError, BiasScore, BiasSpace, CentroidMode, SpaceConfig, SpaceMethod};
pub use corpus::{ConcordanceQuery, Corpus, CorpusError, CorpusIndex, Document};
pub use embedding::{EmbeddingError, EmbeddingStore, LoadOptions, Neighbor, Projection2D};
pub use lexicon::{LexiconError, ResolvedList, WordList};
pub use lm::{LmError, NgramConfig, NgramLM, SentenceScorer};
pub use text::{Normalizer, Tokenizer};
pub use trainer::{TrainError, TrainerConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
