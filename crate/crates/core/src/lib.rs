//! Corpus curation and selective masking for implication-aware pretraining.
//!
//! The pipeline: split raw documents into sentences, tag them, keep the ones
//! that contain an implication keyword, label them by keyword polarity, encode
//! with WordPiece, choose masking targets among words with selected tags, and
//! write deterministic JSONL shards plus a manifest.

pub mod config;
pub mod curator;
pub mod error;
pub mod lexicon;
pub mod masker;
pub mod pipeline;
pub mod segmenter;
pub mod shards;
pub mod stats;
pub mod tagger;
pub mod tokenizer;
pub mod toyloss;

pub use curator::{curate, CategoryFilter, CuratedSentence, Label, LabelSource};
pub use error::{Error, ErrorClass, Result};
pub use lexicon::{builtin_lexicon, KeywordEntry, KeywordLexicon, KeywordMatch, Polarity};
pub use masker::{ActionProbs, MaskAction, MaskPolicy, MaskingPlan, PolicyKind};
pub use segmenter::{RawDocument, SegmentedSentence, Word};
pub use shards::{ShardManifest, ShardSet, TrainingRecord};
pub use stats::{ReportFormat, RunReport};
pub use tagger::{PosTag, TaggerModel};
pub use tokenizer::{EncodedSentence, SubwordVocab};
pub use toyloss::{JointLossValue, TinyEncoderParams};
