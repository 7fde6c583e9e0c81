//! Morpheme-aware subword tokenization for Ge'ez-script languages.
//!
//! The crate is organised around the stages of the pipeline:
//!
//! - [`pretok`]: NFC normalization and word/punctuation pre-tokenization.
//! - [`corpus`]: plain corpora, gold segmentations, annotation formats and
//!   a deterministic synthetic corpus generator.
//! - [`bpe`]: the baseline byte-pair-encoding trainer and encoder.
//! - [`vocab`]: morpheme extraction and hybrid (morpheme + BPE) vocabulary
//!   construction.
//! - [`segmenter`]: boundary-constrained BPE training, two-stage encoding,
//!   decoding and model serialization.
//! - [`metrics`]: MorphScore, boundary precision/recall and Rényi entropy.
//! - [`pipeline`]: the end-to-end vocabulary and model build.
//!
//! Offsets are always Unicode scalar offsets, never byte offsets.

pub mod bpe;
pub mod corpus;
mod error;
pub mod metrics;
pub mod pipeline;
pub mod pretok;
pub mod segmenter;
mod trie;
pub mod vocab;

pub use error::{Error, Result};

/// Toolkit version, recorded in models and run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Substring by scalar offsets `[start, end)`.
pub(crate) fn char_slice(s: &str, start: usize, end: usize) -> &str {
    let mut indices = s
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(s.len()));
    let from = indices.nth(start).unwrap_or(s.len());
    let to = if end > start {
        indices.nth(end - start - 1).unwrap_or(s.len())
    } else {
        from
    };
    &s[from..to]
}
