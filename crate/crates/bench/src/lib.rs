//! Fixtures shared by the benchmarks.

use std::path::{Path, PathBuf};

use logiprep_core::config::RunConfig;
use logiprep_core::pipeline::Resources;
use logiprep_core::segmenter::{read_corpus, CorpusFormat, RawDocument};

pub fn mini_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini")
}

pub fn mini_config() -> RunConfig {
    let text = std::fs::read_to_string(mini_dir().join("pack.toml")).expect("pack.toml");
    RunConfig::parse(&text, &mini_dir()).expect("valid config")
}

pub fn mini_resources() -> Resources {
    Resources::load(&mini_config()).expect("mini resources")
}

pub fn mini_docs() -> Vec<RawDocument> {
    read_corpus(&mini_dir().join("corpus.jsonl"), CorpusFormat::Jsonl).expect("mini corpus")
}
