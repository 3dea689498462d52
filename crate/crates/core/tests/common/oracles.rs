//! Independent reference implementations shared by the integration tests
//! and the acceptance run.

use std::collections::BTreeSet;

use logiprep_core::lexicon::{KeywordLexicon, Polarity};
use logiprep_core::shards::TrainingRecord;
use logiprep_core::tokenizer::MAX_WORD_CHARS;
use logiprep_core::toyloss::{JointObjective, TinyEncoderParams, TENSOR_NAMES};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tries every entry at every alignment.
pub fn keyword_brute_force(lex: &KeywordLexicon, words: &[String]) -> Vec<(usize, usize, usize, Polarity)> {
    let mut out = Vec::new();
    for start in 0..words.len() {
        for (idx, e) in lex.entries().iter().enumerate() {
            let end = start + e.phrase().len();
            if end > words.len() {
                continue;
            }
            let hit = e.phrase().iter().zip(&words[start..end]).all(|(p, w)| p.eq_ignore_ascii_case(w));
            if hit {
                out.push((start, end, idx, e.polarity()));
            }
        }
    }
    out.sort_by_key(|&(s, e, idx, _)| (s, std::cmp::Reverse(e - s), idx));
    out
}

pub fn vary_case(w: &str, rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => w.to_uppercase(),
        1 => {
            let mut c = w.chars();
            c.next().map(|f| f.to_uppercase().collect::<String>() + c.as_str()).unwrap_or_default()
        }
        _ => w.to_owned(),
    }
}

pub const ALPHABET: &[char] = &['a', 'b', 'c', 'd', 'e', 'n', 'r', 's', 't', 'é'];

pub fn random_string(rng: &mut ChaCha8Rng, max: usize) -> String {
    (0..rng.gen_range(1..=max)).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

/// Specials plus 195 distinct random pieces, some with the `##` prefix.
pub fn random_vocab(rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut pieces = BTreeSet::new();
    while pieces.len() < 195 {
        let s = random_string(rng, 4);
        pieces.insert(if rng.gen_bool(0.5) { format!("##{s}") } else { s });
    }
    let mut tokens: Vec<String> = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"].map(String::from).to_vec();
    let mut shuffled: Vec<String> = pieces.into_iter().collect();
    shuffled.shuffle(rng);
    tokens.extend(shuffled);
    tokens
}

/// At each position scan the whole vocabulary for the longest token that fits.
pub fn wordpiece_oracle(tokens: &[String], word: &str) -> Vec<u32> {
    let lower = word.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    if chars.len() > MAX_WORD_CHARS {
        return vec![1];
    }
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let mut best: Option<(usize, u32)> = None;
        for (id, tok) in tokens.iter().enumerate().skip(5) {
            let body = match (pos, tok.strip_prefix("##")) {
                (0, None) => tok.as_str(),
                (p, Some(rest)) if p > 0 => rest,
                _ => continue,
            };
            let n = body.chars().count();
            let fits = pos + n <= chars.len() && chars[pos..pos + n].iter().copied().eq(body.chars());
            if fits && best.is_none_or(|(len, _)| n > len) {
                best = Some((n, id as u32));
            }
        }
        match best {
            Some((n, id)) if n > 0 => {
                out.push(id);
                pos += n;
            }
            _ => return vec![1],
        }
    }
    out
}

pub fn record(ids: &[u32], targets: &[i64], cls: u8) -> TrainingRecord {
    TrainingRecord { input_ids: ids.to_vec(), mlm_targets: targets.to_vec(), cls_label: cls, doc_id: 0, sent_idx: 0, keyword_masked: false }
}

pub fn random_record(rng: &mut ChaCha8Rng, vocab: u32) -> TrainingRecord {
    let n = rng.gen_range(3..12);
    let mut ids: Vec<u32> = (0..n).map(|_| rng.gen_range(5..vocab)).collect();
    ids[0] = 2;
    ids[n - 1] = 3;
    let mut tgt = vec![-1i64; n];
    for t in tgt.iter_mut().take(n - 1).skip(1) {
        if rng.gen_bool(0.4) {
            *t = i64::from(rng.gen_range(5..vocab));
        }
    }
    tgt[1] = i64::from(rng.gen_range(5..vocab));
    record(&ids, &tgt, rng.gen_range(0..2))
}

fn coordinate(p: &mut TinyEncoderParams, tensor: usize, i: usize) -> &mut f64 {
    &mut p.tensors_mut()[tensor][i]
}

/// Max relative error of backward against central differences over `samples`
/// coordinates; relative to max(|a|, |b|, 1e-6).
pub fn fd_max_rel_error(p: &TinyEncoderParams, r: &TrainingRecord, obj: &JointObjective, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let (_, g) = obj.backward(p, r).unwrap();
    let sizes: Vec<usize> = p.tensors().iter().map(|t| t.len()).collect();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        // every tensor gets visited, then uniform over tensors
        let tensor = if s < sizes.len() { s } else { rng.gen_range(0..sizes.len()) };
        let i = if TENSOR_NAMES[tensor] == "tok_emb" && rng.gen_bool(0.5) {
            // bias toward rows that appear in the input
            let row = r.input_ids[rng.gen_range(0..r.input_ids.len())] as usize;
            row * p.width() + rng.gen_range(0..p.width())
        } else {
            rng.gen_range(0..sizes[tensor])
        };
        let mut q = p.clone();
        *coordinate(&mut q, tensor, i) += h;
        let up = obj.forward(&q, r).unwrap().total;
        *coordinate(&mut q, tensor, i) -= 2.0 * h;
        let down = obj.forward(&q, r).unwrap().total;
        let fd = (up - down) / (2.0 * h);
        let exact = g.tensors()[tensor][i];
        let rel = (exact - fd).abs() / exact.abs().max(fd.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

pub fn separable_corpus(n: usize, seed: u64) -> Vec<TrainingRecord> {
    // position 1 holds a cue token (5 -> entailment, 6 -> contradiction);
    // the rest is noise with one masked position
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let cls = rng.gen_range(0..2u8);
            let len = rng.gen_range(4..9);
            let mut ids = vec![2, if cls == 1 { 5 } else { 6 }];
            ids.extend((0..len).map(|_| rng.gen_range(7..24u32)));
            ids.push(3);
            let mut tgt = vec![-1i64; ids.len()];
            let pos = rng.gen_range(2..ids.len() - 1);
            tgt[pos] = i64::from(ids[pos]);
            ids[pos] = 4;
            let mut r = record(&ids, &tgt, cls);
            r.doc_id = i as u64;
            r
        })
        .collect()
}

