//! Noun-class discovery for low-resource languages.
//!
//! The pipeline works on precomputed word embeddings:
//!
//! 1. [`corpus`] pulls candidate word types out of raw target-language text.
//! 2. [`transfer`] labels target words by KNN vote against a labeled
//!    related-language lexicon.
//! 3. [`reduce`] and [`kmeans`] partition target embeddings; [`prefix`]
//!    names each cluster by its dominant word-initial prefix and reports
//!    productive prefixes the inventory does not know.
//! 4. [`ensemble`] merges the two label sources by weighted vote.
//! 5. [`report`] summarizes a run; [`pipeline`] chains the stages over a
//!    workspace directory.
//!
//! [`synth`] generates synthetic language pairs with planted classes and
//! innovations for testing every stage against ground truth.

pub mod class;
pub mod corpus;
pub mod embedding;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod kmeans;
pub mod pipeline;
pub mod prediction;
pub mod prefix;
pub mod reduce;
pub mod report;
pub mod synth;
pub mod transfer;
#[cfg(feature = "umap")]
mod umap;

pub use class::{ClassUniverse, NounClass};
pub use embedding::{cosine, EmbeddingStore, LabeledIndex, LabeledParadigmSet, WordEmbedding};
pub use error::{Error, Result};
pub use prediction::{Method, Prediction};
