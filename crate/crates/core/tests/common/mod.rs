#![allow(dead_code)]

pub mod oracles;

use std::path::{Path, PathBuf};

use logiprep_core::config::RunConfig;
use logiprep_core::pipeline::Resources;
use logiprep_core::segmenter::{read_corpus, CorpusFormat, RawDocument};

pub fn mini_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini")
}

/// The mini-corpus run configuration, without touching the environment.
pub fn mini_config() -> RunConfig {
    let path = mini_dir().join("pack.toml");
    let text = std::fs::read_to_string(&path).expect("pack.toml");
    RunConfig::parse(&text, &mini_dir()).expect("valid config")
}

pub fn mini_resources() -> Resources {
    Resources::load(&mini_config()).expect("mini resources load")
}

pub fn mini_docs() -> Vec<RawDocument> {
    read_corpus(&mini_dir().join("corpus.jsonl"), CorpusFormat::Jsonl).expect("mini corpus")
}

use logiprep_core::curator::{curate, CuratedSentence};
use logiprep_core::lexicon::builtin_lexicon;
use logiprep_core::masker::{ActionKind, MaskAction, MaskPolicy, MaskingPlan};
use logiprep_core::pipeline::SentenceTrace;
use logiprep_core::segmenter::split_sentences;
use logiprep_core::shards::IGNORE;
use logiprep_core::tagger::PosTag;
use logiprep_core::tokenizer::SubwordVocab;

/// Selection validity, budget law and whole-word law for one kept sentence,
/// recomputed from scratch.
pub fn check_plan_laws(t: &SentenceTrace, policy: &MaskPolicy, vocab: &SubwordVocab) -> Result<(), String> {
    let (Some(c), Some(enc), Some(plan), Some(rec)) = (&t.curated, &t.encoded, &t.plan, &t.record) else {
        return Err("not a kept sentence".into());
    };
    let sp = vocab.specials();
    let n = c.segmented.words.len();
    let lone_unk = |i: usize| enc.word_spans[i].len() == 1 && enc.ids[enc.word_spans[i].start] == sp.unk;
    let eligible: Vec<usize> = (0..n).filter(|&i| policy.candidate_tags().contains(&c.tags[i].normalized()) && !lone_unk(i)).collect();

    let selected = plan.selected_words();
    if selected.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("selection not strictly ascending: {selected:?}"));
    }
    if let Some(w) = selected.iter().find(|w| !eligible.contains(w)) {
        return Err(format!("word {w} ({:?}) is not a candidate", c.tags[*w]));
    }
    let budget = ((0.15 * n as f64).round() as usize).max(1).min(eligible.len());
    if (policy.mask_rate() - 0.15).abs() < 1e-12 && selected.len() != budget {
        return Err(format!("{} selected, budget {budget} ({n} words, {} candidates)", selected.len(), eligible.len()));
    }

    let mut touched = vec![false; enc.ids.len()];
    for w in &plan.words {
        let span = enc.word_spans[w.word].clone();
        if w.actions.len() != span.len() {
            return Err(format!("word {} has {} actions for {} subwords", w.word, w.actions.len(), span.len()));
        }
        for (pos, a) in span.zip(&w.actions) {
            touched[pos] = true;
            if a.kind() != w.kind {
                return Err(format!("word {} mixes actions", w.word));
            }
            if rec.mlm_targets[pos] != i64::from(enc.ids[pos]) {
                return Err(format!("target at {pos} is not the original id"));
            }
            let ok = match (w.kind, a) {
                (ActionKind::Mask, _) => rec.input_ids[pos] == sp.mask,
                (ActionKind::Keep, _) => rec.input_ids[pos] == enc.ids[pos],
                (ActionKind::Random, MaskAction::Random(id)) => rec.input_ids[pos] == *id && !sp.contains(*id),
                _ => false,
            };
            if !ok {
                return Err(format!("input at {pos} does not follow {:?}", w.kind));
            }
        }
    }
    for (pos, hit) in touched.iter().enumerate() {
        if !hit && (rec.mlm_targets[pos] != IGNORE || rec.input_ids[pos] != enc.ids[pos]) {
            return Err(format!("unselected position {pos} was modified"));
        }
    }
    Ok(())
}

/// Pearson statistic of `counts` against equal expected counts.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&o| (o as f64 - e).powi(2) / e).sum()
}

/// Upper 1% points of the chi-square distribution.
pub fn chi_square_crit_001(df: usize) -> f64 {
    match df {
        5 => 15.086,
        6 => 16.812,
        9 => 21.666,
        19 => 36.191,
        _ => panic!("no tabulated critical value for df {df}"),
    }
}

/// A test vocabulary covering `words` whole.
pub fn vocab_for(words: &[&str]) -> SubwordVocab {
    let mut t: Vec<String> = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"].map(String::from).to_vec();
    for w in words {
        let w = w.to_lowercase();
        if !t.contains(&w) {
            t.push(w);
        }
    }
    SubwordVocab::from_tokens(t).unwrap()
}

pub fn curated_with_tags(text: &str, tags: &[PosTag]) -> CuratedSentence {
    let s = split_sentences(&RawDocument::new(0, text)).remove(0);
    assert_eq!(s.words.len(), tags.len(), "{:?}", s.word_forms());
    curate(s, tags.to_vec(), &builtin_lexicon()).expect("sentence has a keyword")
}

/// Counts how often each word is selected over `draws` seeds.
pub fn selection_counts(c: &CuratedSentence, policy: &MaskPolicy, vocab: &SubwordVocab, draws: u64) -> (Vec<u64>, Vec<MaskingPlan>) {
    let enc = vocab.encode(&c.segmented.word_forms()).unwrap();
    let mut counts = vec![0u64; c.segmented.words.len()];
    let mut plans = Vec::with_capacity(draws as usize);
    for seed in 0..draws {
        let p = logiprep_core::masker::plan(c, &enc, &policy.clone().with_seed(seed), vocab).unwrap();
        for w in p.selected_words() {
            counts[w] += 1;
        }
        plans.push(p);
    }
    (counts, plans)
}
