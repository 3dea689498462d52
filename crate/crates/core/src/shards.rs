//! Versioned JSON-lines shard format for finished training records.
//!
//! A shard directory holds `shard-00000.jsonl`, `shard-00001.jsonl`, ... and a
//! `manifest.json`. Each line is one record with integer-only keys `ids`,
//! `tgt`, `cls`, `doc`, `sent`, `kwm`; `tgt` uses -1 for positions outside the
//! s-MLM loss. Records are sorted by (doc, sent) and the manifest pins every
//! shard's SHA-256, so identical inputs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ShardError;
use crate::tokenizer::{SpecialIds, MAX_SEQ_LEN};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
/// Target value for positions excluded from the s-MLM loss.
pub const IGNORE: i64 = -1;

pub fn shard_file_name(index: usize) -> String {
    format!("shard-{index:05}.jsonl")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingRecord {
    #[serde(rename = "ids")]
    pub input_ids: Vec<u32>,
    #[serde(rename = "tgt")]
    pub mlm_targets: Vec<i64>,
    /// 1 entailment, 0 contradiction.
    #[serde(rename = "cls")]
    pub cls_label: u8,
    #[serde(rename = "doc")]
    pub doc_id: u64,
    #[serde(rename = "sent")]
    pub sent_idx: u32,
    #[serde(rename = "kwm", with = "bool_as_int")]
    pub keyword_masked: bool,
}

mod bool_as_int {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            n => Err(D::Error::custom(format!("kwm must be 0 or 1, got {n}"))),
        }
    }
}

/// What a reader needs to check records without the vocab itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordSchema {
    pub vocab_size: usize,
    pub specials: SpecialIds,
}

impl TrainingRecord {
    pub fn num_targets(&self) -> usize {
        self.mlm_targets.iter().filter(|&&t| t != IGNORE).count()
    }

    /// Checks every record invariant, describing the first violation.
    pub fn validate(&self, schema: &RecordSchema) -> Result<(), String> {
        let n = self.input_ids.len();
        if n != self.mlm_targets.len() {
            return Err(format!("{} ids but {} targets", n, self.mlm_targets.len()));
        }
        if !(2..=MAX_SEQ_LEN).contains(&n) {
            return Err(format!("length {n} outside 2..={MAX_SEQ_LEN}"));
        }
        let sp = schema.specials;
        if self.input_ids[0] != sp.cls || self.input_ids[n - 1] != sp.sep {
            return Err("sequence must start with [CLS] and end with [SEP]".into());
        }
        if self.mlm_targets[0] != IGNORE || self.mlm_targets[n - 1] != IGNORE {
            return Err("[CLS]/[SEP] positions must carry the ignore target".into());
        }
        if let Some(p) = self.input_ids.iter().position(|&id| id as usize >= schema.vocab_size) {
            return Err(format!("input id {} at position {p} out of vocab range", self.input_ids[p]));
        }
        for (p, &t) in self.mlm_targets.iter().enumerate() {
            if t != IGNORE && (t < 0 || t as usize >= schema.vocab_size) {
                return Err(format!("target {t} at position {p} is neither -1 nor a vocab id"));
            }
        }
        if self.num_targets() == 0 {
            return Err("no s-MLM target (all positions are -1)".into());
        }
        if let Some(p) = (0..n).find(|&p| self.input_ids[p] == sp.mask && self.mlm_targets[p] == IGNORE) {
            return Err(format!("[MASK] at position {p} has no target"));
        }
        if self.cls_label > 1 {
            return Err(format!("cls label {} is not 0 or 1", self.cls_label));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShardEntry {
    pub file: String,
    pub records: u64,
    pub sha256: String,
}

/// Creation parameters embedded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestConfig {
    pub schema: RecordSchema,
    pub records_per_shard: usize,
    pub shards: Vec<ShardEntry>,
    /// Resolved run configuration, free-form.
    pub run: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShardManifest {
    pub version: u32,
    pub vocab_sha256: String,
    pub policy_sha256: String,
    pub n_records: u64,
    pub n_entailment: u64,
    pub n_contradiction: u64,
    pub config: ManifestConfig,
}

/// Digests and schema stamped into a new manifest.
#[derive(Debug, Clone)]
pub struct ShardMeta {
    pub vocab_sha256: String,
    pub policy_sha256: String,
    pub schema: RecordSchema,
    pub run: serde_json::Value,
}

/// Sorts records by (doc, sent), validates them and writes shard files plus a
/// manifest into `out_dir` (created if missing).
pub fn write_shards(
    mut records: Vec<TrainingRecord>,
    out_dir: &Path,
    records_per_shard: usize,
    meta: ShardMeta,
) -> Result<ShardManifest, ShardError> {
    if records_per_shard == 0 {
        return Err(ShardError::Manifest("records_per_shard must be positive".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| ShardError::io(out_dir, e))?;
    records.sort_by_key(|r| (r.doc_id, r.sent_idx));

    let mut shards = Vec::new();
    let (mut n_entailment, mut n_contradiction) = (0, 0);
    for (i, chunk) in records.chunks(records_per_shard).enumerate() {
        let file = shard_file_name(i);
        let path = out_dir.join(&file);
        let mut bytes = Vec::new();
        for (line, r) in chunk.iter().enumerate() {
            r.validate(&meta.schema).map_err(|reason| ShardError::Invariant {
                path: path.clone(),
                line: line + 1,
                reason,
            })?;
            if r.cls_label == 1 {
                n_entailment += 1;
            } else {
                n_contradiction += 1;
            }
            serde_json::to_writer(&mut bytes, r).expect("record serializes");
            bytes.push(b'\n');
        }
        fs::write(&path, &bytes).map_err(|e| ShardError::io(&path, e))?;
        shards.push(ShardEntry { file, records: chunk.len() as u64, sha256: hex::encode(Sha256::digest(&bytes)) });
    }

    let manifest = ShardManifest {
        version: FORMAT_VERSION,
        vocab_sha256: meta.vocab_sha256,
        policy_sha256: meta.policy_sha256,
        n_records: records.len() as u64,
        n_entailment,
        n_contradiction,
        config: ManifestConfig { schema: meta.schema, records_per_shard, shards, run: meta.run },
    };
    let path = out_dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| ShardError::io(&path, e))?;
    Ok(manifest)
}

/// An opened shard directory whose manifest has been checked for internal
/// consistency.
#[derive(Debug, Clone)]
pub struct ShardSet {
    dir: PathBuf,
    manifest: ShardManifest,
}

impl ShardSet {
    pub fn open(dir: &Path) -> Result<Self, ShardError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| ShardError::io(&path, e))?;
        let raw: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| ShardError::Parse { path: path.clone(), line: e.line(), reason: e.to_string() })?;
        let version = raw.get("version").and_then(serde_json::Value::as_u64);
        if version != Some(u64::from(FORMAT_VERSION)) {
            return Err(ShardError::Version { expected: FORMAT_VERSION, found: version.unwrap_or(0) as u32 });
        }
        let manifest: ShardManifest = serde_json::from_value(raw)
            .map_err(|e| ShardError::Parse { path: path.clone(), line: 0, reason: e.to_string() })?;
        if manifest.n_records != manifest.n_entailment + manifest.n_contradiction {
            return Err(ShardError::Manifest(format!(
                "n_records {} != n_entailment {} + n_contradiction {}",
                manifest.n_records, manifest.n_entailment, manifest.n_contradiction
            )));
        }
        let listed: u64 = manifest.config.shards.iter().map(|s| s.records).sum();
        if listed != manifest.n_records {
            return Err(ShardError::Manifest(format!(
                "n_records {} but shard entries list {listed}",
                manifest.n_records
            )));
        }
        for (i, s) in manifest.config.shards.iter().enumerate() {
            if s.file != shard_file_name(i) {
                return Err(ShardError::Manifest(format!("shard {i} is named {:?}", s.file)));
            }
        }
        Ok(ShardSet { dir: dir.to_path_buf(), manifest })
    }

    pub fn manifest(&self) -> &ShardManifest {
        &self.manifest
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn num_shards(&self) -> usize {
        self.manifest.config.shards.len()
    }

    /// Rejects a manifest produced under a different vocab or policy.
    pub fn check_digests(&self, vocab_sha256: Option<&str>, policy_sha256: Option<&str>) -> Result<(), ShardError> {
        for (what, expected, found) in [
            ("vocab", vocab_sha256, &self.manifest.vocab_sha256),
            ("policy", policy_sha256, &self.manifest.policy_sha256),
        ] {
            if let Some(expected) = expected {
                if expected != found {
                    return Err(ShardError::DigestMismatch {
                        what,
                        expected: expected.to_owned(),
                        found: found.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Reads and validates one shard: every record, its line count and its
    /// digest.
    pub fn read_shard(&self, index: usize) -> Result<Vec<TrainingRecord>, ShardError> {
        let entry = &self.manifest.config.shards[index];
        let path = self.dir.join(&entry.file);
        let bytes = fs::read(&path).map_err(|e| ShardError::io(&path, e))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| ShardError::Parse {
            path: path.clone(),
            line: bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
            reason: "invalid UTF-8".into(),
        })?;
        let schema = &self.manifest.config.schema;
        let mut records = Vec::with_capacity(entry.records as usize);
        for (i, line) in text.split_terminator('\n').enumerate() {
            let record: TrainingRecord = serde_json::from_str(line).map_err(|e| ShardError::Parse {
                path: path.clone(),
                line: i + 1,
                reason: e.to_string(),
            })?;
            record.validate(schema).map_err(|reason| ShardError::Invariant { path: path.clone(), line: i + 1, reason })?;
            records.push(record);
        }
        if !bytes.is_empty() && bytes.last() != Some(&b'\n') {
            return Err(ShardError::Truncated { path, reason: "last record is not LF-terminated".into() });
        }
        if (records.len() as u64) < entry.records {
            return Err(ShardError::Truncated {
                path,
                reason: format!("{} records, manifest lists {}", records.len(), entry.records),
            });
        }
        if records.len() as u64 != entry.records {
            return Err(ShardError::Manifest(format!(
                "{} holds {} records, manifest lists {}",
                entry.file,
                records.len(),
                entry.records
            )));
        }
        let digest = hex::encode(Sha256::digest(&bytes));
        if digest != entry.sha256 {
            return Err(ShardError::DigestMismatch { what: "shard", expected: entry.sha256.clone(), found: digest });
        }
        Ok(records)
    }

    /// Records in manifest order, shard by shard.
    pub fn records(&self) -> impl Iterator<Item = Result<TrainingRecord, ShardError>> + '_ {
        (0..self.num_shards()).flat_map(move |i| match self.read_shard(i) {
            Ok(rs) => rs.into_iter().map(Ok).collect::<Vec<_>>(),
            Err(e) => vec![Err(e)],
        })
    }

    /// Reads everything and checks the cross-shard invariants: global
    /// (doc, sent) order and the manifest's label counts.
    pub fn read_all(&self) -> Result<Vec<TrainingRecord>, ShardError> {
        let mut out: Vec<TrainingRecord> = Vec::with_capacity(self.manifest.n_records as usize);
        for i in 0..self.num_shards() {
            let path = self.dir.join(&self.manifest.config.shards[i].file);
            for (line, r) in self.read_shard(i)?.into_iter().enumerate() {
                if let Some(prev) = out.last() {
                    if (prev.doc_id, prev.sent_idx) >= (r.doc_id, r.sent_idx) {
                        return Err(ShardError::Invariant {
                            path,
                            line: line + 1,
                            reason: format!("record ({}, {}) out of order", r.doc_id, r.sent_idx),
                        });
                    }
                }
                out.push(r);
            }
        }
        let entailment = out.iter().filter(|r| r.cls_label == 1).count() as u64;
        if entailment != self.manifest.n_entailment {
            return Err(ShardError::Manifest(format!(
                "{entailment} entailment records, manifest says {}",
                self.manifest.n_entailment
            )));
        }
        Ok(out)
    }
}

/// Opens `dir` and returns every record after full validation.
pub fn read_shards(dir: &Path) -> Result<Vec<TrainingRecord>, ShardError> {
    ShardSet::open(dir)?.read_all()
}
