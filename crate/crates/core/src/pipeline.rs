//! End-to-end packing: documents in, shards and a run report out.
//!
//! Documents are processed independently on a worker pool; results come back
//! in input order and the shard writer sorts by (doc, sent), so the output
//! bytes do not depend on the worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::curator::{curate, CategoryFilter, CuratedSentence, LabelSource};
use crate::error::{ConfigError, Error, Result};
use crate::lexicon::{builtin_lexicon, KeywordLexicon, KeywordMatch, Polarity};
use crate::masker::{self, MaskPolicy, MaskingPlan};
use crate::segmenter::{read_corpus, split_sentences, RawDocument, SegmentedSentence};
use crate::shards::{write_shards, RecordSchema, ShardManifest, ShardMeta, TrainingRecord};
use crate::stats::{ReportFormat, RunReport};
use crate::tagger::{PosTag, TaggerModel};
use crate::tokenizer::{EncodedSentence, SubwordVocab};

pub const REPORT_FILE: &str = "report.json";

/// Loaded, read-only inputs shared by every worker.
#[derive(Debug, Clone)]
pub struct Resources {
    pub lexicon: KeywordLexicon,
    pub tagger: TaggerModel,
    pub vocab: SubwordVocab,
    pub policy: MaskPolicy,
    pub category_filter: CategoryFilter,
    pub config_sha256: String,
}

impl Resources {
    pub fn load(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let lexicon = match cfg.lexicon_path() {
            Some(p) => KeywordLexicon::load(&p)?,
            None => builtin_lexicon(),
        };
        Ok(Resources {
            lexicon,
            tagger: TaggerModel::load(&cfg.path(&cfg.tagger))?,
            vocab: SubwordVocab::load(&cfg.path(&cfg.vocab))?,
            policy: cfg.mask_policy()?,
            category_filter: cfg.category_filter,
            config_sha256: cfg.sha256(),
        })
    }

    pub fn schema(&self) -> RecordSchema {
        RecordSchema { vocab_size: self.vocab.len(), specials: self.vocab.specials() }
    }
}

/// Where one sentence ended up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    DroppedLength,
    DroppedNoKeyword,
    DroppedCategory,
    DroppedOverLength,
    DroppedNoCandidate,
    Kept,
}

/// Every intermediate value for one sentence.
#[derive(Debug, Clone)]
pub struct SentenceTrace {
    pub sentence: SegmentedSentence,
    pub tags: Option<Vec<PosTag>>,
    pub matches: Vec<KeywordMatch>,
    pub curated: Option<CuratedSentence>,
    pub encoded: Option<EncodedSentence>,
    pub plan: Option<MaskingPlan>,
    pub record: Option<TrainingRecord>,
    pub outcome: Outcome,
}

/// Runs one sentence through tagging, curation, encoding and masking.
pub fn trace_sentence(sentence: SegmentedSentence, res: &Resources) -> SentenceTrace {
    let mut t = SentenceTrace {
        sentence,
        tags: None,
        matches: Vec::new(),
        curated: None,
        encoded: None,
        plan: None,
        record: None,
        outcome: Outcome::DroppedLength,
    };
    if !t.sentence.within_length_bounds() {
        return t;
    }
    let forms = t.sentence.word_forms();
    let tags = res.tagger.tag(&forms);
    t.matches = res.lexicon.match_keywords(&forms);
    t.tags = Some(tags.clone());
    let Some(c) = curate(t.sentence.clone(), tags, &res.lexicon) else {
        t.outcome = Outcome::DroppedNoKeyword;
        return t;
    };
    if !res.category_filter.admits(c.governing_polarity()) {
        t.curated = Some(c);
        t.outcome = Outcome::DroppedCategory;
        return t;
    }
    let encoded = match res.vocab.encode(&c.segmented.word_forms()) {
        Ok(e) => e,
        Err(_) => {
            t.curated = Some(c);
            t.outcome = Outcome::DroppedOverLength;
            return t;
        }
    };
    let plan = masker::plan(&c, &encoded, &res.policy, &res.vocab);
    if let Some(p) = &plan {
        t.record = Some(masker::apply(p, &c, &encoded, &res.vocab));
        t.outcome = Outcome::Kept;
    } else {
        t.outcome = Outcome::DroppedNoCandidate;
    }
    t.plan = plan;
    t.encoded = Some(encoded);
    t.curated = Some(c);
    t
}

fn account(report: &mut RunReport, t: &SentenceTrace, res: &Resources) {
    report.sentences_seen += 1;
    let d = &mut report.dropped_by_reason;
    match t.outcome {
        Outcome::DroppedLength => d.length += 1,
        Outcome::DroppedNoKeyword => d.no_keyword += 1,
        Outcome::DroppedCategory => d.category += 1,
        Outcome::DroppedOverLength => d.over_length += 1,
        Outcome::DroppedNoCandidate => d.no_candidate += 1,
        Outcome::Kept => {}
    }
    let (Some(c), Some(e), Some(p), Some(r)) = (&t.curated, &t.encoded, &t.plan, &t.record) else {
        return;
    };
    report.sentences_kept += 1;
    match c.governing_polarity() {
        Polarity::Positive => report.kept_positive += 1,
        Polarity::Negative => report.kept_negative += 1,
    }
    if c.label_source == LabelSource::EarliestOfBoth {
        report.kept_mixed += 1;
    }
    for m in &c.matches {
        *report.keyword_frequency.entry(res.lexicon.entry(m.entry).text()).or_default() += 1;
    }
    for w in masker::candidates(c, e, &res.policy, &res.vocab) {
        *report.candidate_tag_frequency.entry(c.tags[w].name().to_owned()).or_default() += 1;
    }
    report.keyword_masked += u64::from(r.keyword_masked);
    report.selected_words += p.words.len() as u64;
    report.words_in_kept += c.segmented.words.len() as u64;
}

/// Records and report for a single document.
pub fn process_document(doc: &RawDocument, res: &Resources) -> (Vec<TrainingRecord>, RunReport) {
    let mut report = RunReport::new(res.config_sha256.clone());
    let mut records = Vec::new();
    for s in split_sentences(doc) {
        let t = trace_sentence(s, res);
        account(&mut report, &t, res);
        if let Some(r) = t.record {
            records.push(r);
        }
    }
    (records, report)
}

/// Processes documents on `workers` threads. The result is independent of
/// the worker count.
pub fn process_corpus(docs: &[RawDocument], res: &Resources, workers: usize) -> Result<(Vec<TrainingRecord>, RunReport)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ConfigError(format!("worker pool: {e}")))?;
    let parts: Vec<(Vec<TrainingRecord>, RunReport)> = pool.install(|| docs.par_iter().map(|d| process_document(d, res)).collect());
    let mut records = Vec::new();
    let mut report = RunReport::new(res.config_sha256.clone());
    for (r, rep) in parts {
        records.extend(r);
        report = report.merge(&rep)?;
    }
    Ok((records, report))
}

#[derive(Debug, Clone)]
pub struct PackOutput {
    pub manifest: ShardManifest,
    pub report: RunReport,
}

/// The full pipeline. Output goes to a staging directory that replaces
/// `out_dir` only on success; `out_dir` must be absent or empty.
pub fn pack(cfg: &RunConfig) -> Result<PackOutput> {
    let out_dir = cfg.output.clone().ok_or_else(|| ConfigError("no output directory given".into()))?;
    if out_dir.exists() {
        let mut entries = fs::read_dir(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
        if entries.next().is_some() {
            return Err(ConfigError(format!("output directory {} is not empty", out_dir.display())).into());
        }
    }
    let res = Resources::load(cfg)?;
    let docs = read_corpus(&cfg.path(&cfg.input), cfg.format)?;
    let (records, report) = process_corpus(&docs, &res, cfg.workers)?;
    report.check().map_err(|m| ConfigError(format!("report bookkeeping: {m}")))?;

    let staging = staging_dir(&out_dir);
    let result = write_output(&staging, records, &report, &res, cfg);
    let manifest = match result {
        Ok(m) => m,
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }
    };
    if out_dir.exists() {
        fs::remove_dir(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    }
    if let Err(e) = fs::rename(&staging, &out_dir) {
        let _ = fs::remove_dir_all(&staging);
        return Err(Error::io(&out_dir, e));
    }
    Ok(PackOutput { manifest, report })
}

fn staging_dir(out_dir: &Path) -> PathBuf {
    let name = out_dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out_dir.with_file_name(format!(".{name}.partial-{}", std::process::id()))
}

fn write_output(dir: &Path, records: Vec<TrainingRecord>, report: &RunReport, res: &Resources, cfg: &RunConfig) -> Result<ShardManifest> {
    let meta = ShardMeta {
        vocab_sha256: res.vocab.sha256(),
        policy_sha256: res.policy.sha256(),
        schema: res.schema(),
        run: cfg.to_json(),
    };
    let manifest = write_shards(records, dir, cfg.records_per_shard, meta)?;
    let path = dir.join(REPORT_FILE);
    fs::write(&path, report.render(ReportFormat::Json)).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Traces the `sent_idx`-th sentence of document `doc_id`.
pub fn inspect(docs: &[RawDocument], res: &Resources, doc_id: u64, sent_idx: u32) -> Result<SentenceTrace> {
    let doc = docs
        .iter()
        .find(|d| d.doc_id == doc_id)
        .ok_or_else(|| Error::NotFound(format!("no document with id {doc_id}")))?;
    let sentence = split_sentences(doc)
        .into_iter()
        .nth(sent_idx as usize)
        .ok_or_else(|| Error::NotFound(format!("document {doc_id} has no sentence {sent_idx}")))?;
    Ok(trace_sentence(sentence, res))
}

impl SentenceTrace {
    /// Human-readable dump.
    pub fn render(&self, res: &Resources) -> String {
        let mut s = String::new();
        let sent = &self.sentence;
        let _ = writeln!(s, "doc {} sentence {}", sent.doc_id, sent.sent_idx);
        let _ = writeln!(s, "text: {}", sent.text);
        let _ = writeln!(s, "outcome: {}", serde_json::to_value(&self.outcome).expect("outcome").as_str().unwrap_or(""));
        let _ = writeln!(s, "words:");
        for (i, w) in sent.words.iter().enumerate() {
            let tag = self.tags.as_ref().map_or("-", |t| t[i].name());
            let cand = match &self.tags {
                Some(t) if res.policy.admits(t[i]) => "*",
                _ => "",
            };
            let _ = writeln!(s, "  {i:>3}  {:<20} {tag}{cand}", w.text);
        }
        let _ = writeln!(s, "matches:");
        for m in &self.matches {
            let _ = writeln!(s, "  [{}, {}) {:?} {}", m.start, m.end, res.lexicon.entry(m.entry).text(), m.polarity.code());
        }
        if let Some(c) = &self.curated {
            let _ = writeln!(s, "label: {:?} ({:?})", c.label, c.label_source);
        }
        if let Some(p) = &self.plan {
            let _ = writeln!(s, "plan:");
            for w in &p.words {
                let _ = writeln!(s, "  word {} {:?} {:?} {:?}", w.word, sent.words[w.word].text, w.kind, w.actions);
            }
        }
        if let Some(r) = &self.record {
            let _ = writeln!(s, "record: {}", serde_json::to_string(r).expect("record serializes"));
            if let Ok(text) = res.vocab.decode(&r.input_ids) {
                let _ = writeln!(s, "masked: {text}");
            }
        }
        s
    }
}
