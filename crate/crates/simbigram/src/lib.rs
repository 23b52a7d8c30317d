//! Bigram language modeling with Katz-style back-off and similarity-based
//! redistribution of the probability mass reserved for unseen bigrams.
//!
//! The crate builds sparse bigram counts from tokenized text ([`corpus`]),
//! fits a Good-Turing discounted back-off model ([`backoff`]), and offers
//! three schemes for redistributing leftover mass across unseen successor
//! words: the classic unigram scheme, a KL-divergence nearest-neighbor
//! weighted average ([`similarity`]), and confusion-probability smoothing
//! ([`cooc`]). Evaluation utilities ([`eval`]) measure perplexity with a
//! seen/unseen decomposition and run parameter grid searches; [`lattice`]
//! rescores word lattices and counts model disagreements against reference
//! transcripts. [`synth`] generates class-structured corpora and confusable
//! lattices for controlled experiments.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod backoff;
pub mod cooc;
pub mod corpus;
pub mod eval;
pub mod lattice;
pub mod similarity;
pub mod synth;

pub use backoff::{BackoffConfig, BackoffModel, Estimator, RedistributionScheme};
pub use corpus::{build_counts, CountTable, Vocabulary, WordId};
pub use similarity::{NeighborSet, SimilarityParams};
