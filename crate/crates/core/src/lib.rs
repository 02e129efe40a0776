//! Corpus preprocessing and word-embedding evaluation.
//!
//! The crate covers the path from raw text to evaluation reports:
//!
//! * [`corpus`]: sentence segmentation, rule-based tokenization and the
//!   one-sentence-per-line format.
//! * [`dedup`]: shingle-based near-duplicate removal over paragraphs or
//!   sentences.
//! * [`vocab`]: token counting and frequency-thresholded vocabularies.
//! * [`embstore`]: static vector files, contextual token-embedding records
//!   and occurrence averaging.
//! * [`analogy`]: word-analogy evaluation by vector arithmetic over static
//!   vectors, and by template sentences scored with cosine or CSLS.
//! * [`ner`]: NER datasets, label statistics, splits and macro-F1 scoring.
//! * [`report`] and [`pipeline`]: report emission and staged, manifest-backed
//!   pipeline runs.

pub mod analogy;
pub mod cli;
pub mod corpus;
pub mod dedup;
pub mod embstore;
mod error;
pub mod ner;
pub mod pipeline;
pub mod report;
pub mod vocab;

pub use error::{Error, Result};
