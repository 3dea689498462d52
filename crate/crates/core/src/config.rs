//! Run configuration: a flat TOML file, command-line overrides on top, and
//! `LOGIPREP_SEED` over everything.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curator::CategoryFilter;
use crate::error::ConfigError;
use crate::masker::{ablation_policy, ActionProbs, MaskPolicy, PolicyKind, DEFAULT_MASK_RATE};
use crate::segmenter::CorpusFormat;
use crate::tagger::PosTag;

pub const SEED_ENV: &str = "LOGIPREP_SEED";
pub const DEFAULT_RECORDS_PER_SHARD: usize = 1000;

/// Everything `pack` needs. Paths are kept as written; relative ones resolve
/// against [`RunConfig::base_dir`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    #[serde(default = "default_format")]
    pub format: CorpusFormat,
    /// `"builtin"` or a lexicon file.
    #[serde(default = "default_lexicon")]
    pub lexicon: String,
    pub tagger: PathBuf,
    pub vocab: PathBuf,
    #[serde(default = "default_policy")]
    pub policy: PolicyKind,
    /// Overrides the policy's tag set when present.
    #[serde(default)]
    pub candidate_tags: Option<Vec<PosTag>>,
    #[serde(default)]
    pub include_aux: bool,
    #[serde(default = "default_rate")]
    pub mask_rate: f64,
    #[serde(default)]
    pub action_probs: ActionProbs,
    #[serde(default)]
    pub category_filter: CategoryFilter,
    #[serde(default = "default_records_per_shard")]
    pub records_per_shard: usize,
    #[serde(default)]
    pub seed: u64,
    // The two fields below do not affect output and stay out of the manifest.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_workers", skip_serializing)]
    pub workers: usize,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_format() -> CorpusFormat {
    CorpusFormat::Jsonl
}
fn default_lexicon() -> String {
    "builtin".into()
}
fn default_policy() -> PolicyKind {
    PolicyKind::Base
}
fn default_rate() -> f64 {
    DEFAULT_MASK_RATE
}
fn default_records_per_shard() -> usize {
    DEFAULT_RECORDS_PER_SHARD
}
fn default_workers() -> usize {
    1
}

/// Command-line values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub policy: Option<PolicyKind>,
    pub category_filter: Option<CategoryFilter>,
    pub records_per_shard: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Self::parse(&text, &base).map_err(|ConfigError(m)| ConfigError(format!("{}: {m}", path.display())))
    }

    /// Applies overrides, then the seed environment variable.
    pub fn resolve(mut self, o: &Overrides) -> Result<Self, ConfigError> {
        // command-line paths are relative to the working directory, not the file
        let cwd = |p: &PathBuf| std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.clone());
        if let Some(p) = &o.input {
            self.input = cwd(p);
        }
        if let Some(p) = &o.output {
            self.output = Some(cwd(p));
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = o.policy {
            self.policy = p;
        }
        if let Some(f) = o.category_filter {
            self.category_filter = f;
        }
        if let Some(r) = o.records_per_shard {
            self.records_per_shard = r;
        }
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| ConfigError(format!("{SEED_ENV}={v:?} is not a u64")))?;
        }
        Ok(self)
    }

    pub fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn lexicon_path(&self) -> Option<PathBuf> {
        (self.lexicon != "builtin").then(|| self.path(Path::new(&self.lexicon)))
    }

    pub fn mask_policy(&self) -> Result<MaskPolicy, ConfigError> {
        let tags: Vec<PosTag> = match &self.candidate_tags {
            Some(t) => t.clone(),
            None => ablation_policy(self.policy, 0).candidate_tags().iter().copied().collect(),
        };
        let p = MaskPolicy::new(tags, self.mask_rate, self.action_probs, self.seed).map_err(|e| ConfigError(e.0))?;
        Ok(if self.include_aux { p.with_aux() } else { p })
    }

    /// Checks that every referenced file exists and the numbers make sense.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut files = vec![("input", self.path(&self.input)), ("tagger", self.path(&self.tagger)), ("vocab", self.path(&self.vocab))];
        if let Some(l) = self.lexicon_path() {
            files.push(("lexicon", l));
        }
        for (what, p) in files {
            if !p.exists() {
                return Err(ConfigError(format!("{what} {} does not exist", p.display())));
            }
        }
        if self.records_per_shard == 0 {
            return Err(ConfigError("records_per_shard must be positive".into()));
        }
        if self.workers == 0 {
            return Err(ConfigError("workers must be positive".into()));
        }
        self.mask_policy()?;
        Ok(())
    }

    /// The configuration as embedded in the manifest.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().to_string().as_bytes()))
    }
}
