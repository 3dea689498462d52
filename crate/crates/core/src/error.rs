use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("lexicon line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("malformed lexicon entry: {0}")]
    Malformed(String),
    #[error("duplicate lexicon phrase {0:?}")]
    Duplicate(String),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("document {doc_id}: invalid UTF-8 at byte offset {offset}")]
    Utf8 { doc_id: u64, offset: usize },
    #[error("{path} line {line}: {reason}")]
    Record { path: PathBuf, line: usize, reason: String },
    #[error("duplicate document id {0}")]
    DuplicateId(u64),
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("epochs must be positive")]
    ZeroEpochs,
    #[error("training data contains no sentences")]
    EmptyTraining,
    #[error("CoNLL-U line {line}: {reason}")]
    Conllu { line: usize, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("not a tagger model: expected magic {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("unsupported tagger model version {found} (this build reads version {expected})")]
    Version { expected: u16, found: u16 },
    #[error("tagger model truncated or corrupt: {0}")]
    Corrupt(String),
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("cannot read vocab {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("vocab is missing special token {0}")]
    MissingSpecial(&'static str),
    #[error("vocab line {line}: duplicate token {token:?}")]
    Duplicate { token: String, line: usize },
    #[error("vocab line {line}: empty token")]
    EmptyToken { line: usize },
    #[error("token id {id} out of range for vocab of size {size}")]
    IdOutOfRange { id: u32, size: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("cannot encode an empty word sequence")]
    Empty,
    #[error("encoded length {len} exceeds the {max}-token limit")]
    OverLength { len: usize, max: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid mask policy: {0}")]
pub struct PolicyError(pub String);

#[derive(Debug, Error)]
pub enum ShardError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error("unsupported shard format version {found} (expected {expected})")]
    Version { expected: u32, found: u32 },
    #[error("{path} record {line}: {reason}")]
    Invariant { path: PathBuf, line: usize, reason: String },
    #[error("manifest inconsistent: {0}")]
    Manifest(String),
    #[error("{what} digest mismatch: manifest has {found}, expected {expected}")]
    DigestMismatch { what: &'static str, expected: String, found: String },
    #[error("{path} truncated: {reason}")]
    Truncated { path: PathBuf, reason: String },
}

impl ShardError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        ShardError::Io { path: path.into(), source }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot merge reports from different configurations ({left} vs {right})")]
pub struct ReportMismatch {
    pub left: String,
    pub right: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error("token id {id} at position {pos} out of range for vocab size {vocab}")]
    TokenOutOfRange { id: u32, pos: usize, vocab: usize },
    #[error("sequence of {len} tokens exceeds {max} positions")]
    TooLong { len: usize, max: usize },
    #[error("record has no s-MLM targets")]
    NoTargets,
    #[error("target/input length mismatch ({inputs} inputs, {targets} targets)")]
    Shape { inputs: usize, targets: usize },
    #[error("no training records in shards")]
    EmptyShards,
}

#[derive(Debug, Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

/// Coarse failure classes used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Input,
    Invariant,
    Io,
}

impl ErrorClass {
    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::Config => "config-error",
            ErrorClass::Input => "input-error",
            ErrorClass::Invariant => "invariant-violation",
            ErrorClass::Io => "io-error",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Input => 3,
            ErrorClass::Invariant => 4,
            ErrorClass::Io => 5,
        }
    }
}

/// Any pipeline failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Tagger(#[from] TaggerError),
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Shard(#[from] ShardError),
    #[error(transparent)]
    Report(#[from] ReportMismatch),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    NotFound(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Policy(_) | Error::Report(_) => ErrorClass::Config,
            Error::Lexicon(LexiconError::Io { .. }) => ErrorClass::Io,
            Error::Lexicon(_) => ErrorClass::Config,
            Error::Ingest(IngestError::Io { .. }) => ErrorClass::Io,
            Error::Ingest(_) => ErrorClass::Input,
            Error::Tagger(TaggerError::Io { .. }) => ErrorClass::Io,
            Error::Tagger(_) => ErrorClass::Input,
            Error::Vocab(VocabError::Io { .. }) => ErrorClass::Io,
            Error::Vocab(_) => ErrorClass::Input,
            Error::Shard(ShardError::Io { .. }) => ErrorClass::Io,
            Error::Shard(ShardError::Version { .. }) => ErrorClass::Input,
            Error::Shard(_) => ErrorClass::Invariant,
            Error::Loss(LossError::EmptyShards) => ErrorClass::Input,
            Error::Loss(_) => ErrorClass::Invariant,
            Error::Io { .. } => ErrorClass::Io,
            Error::NotFound(_) => ErrorClass::Input,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
