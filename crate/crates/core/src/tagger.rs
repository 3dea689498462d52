//! Greedy averaged-perceptron part-of-speech tagger over the Universal
//! Dependencies coarse tag set.
//!
//! Training reads CoNLL-U (the UPOS column), visits sentences in a seeded
//! shuffled order each epoch and tags left to right, feeding the model's own
//! previous predictions into the context features. The persisted model holds
//! only the averaged weights.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::TaggerError;

/// Coarse POS tags. Variants are declared in lexicographic order of their
/// names so the derived ordering doubles as the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    /// Pre-UD2 name for coordinating conjunctions; normalized to `Cconj`.
    Conj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl PosTag {
    pub const ALL: [PosTag; 18] = [
        PosTag::Adj,
        PosTag::Adp,
        PosTag::Adv,
        PosTag::Aux,
        PosTag::Cconj,
        PosTag::Conj,
        PosTag::Det,
        PosTag::Intj,
        PosTag::Noun,
        PosTag::Num,
        PosTag::Part,
        PosTag::Pron,
        PosTag::Propn,
        PosTag::Punct,
        PosTag::Sconj,
        PosTag::Sym,
        PosTag::Verb,
        PosTag::X,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PosTag::Adj => "ADJ",
            PosTag::Adp => "ADP",
            PosTag::Adv => "ADV",
            PosTag::Aux => "AUX",
            PosTag::Cconj => "CCONJ",
            PosTag::Conj => "CONJ",
            PosTag::Det => "DET",
            PosTag::Intj => "INTJ",
            PosTag::Noun => "NOUN",
            PosTag::Num => "NUM",
            PosTag::Part => "PART",
            PosTag::Pron => "PRON",
            PosTag::Propn => "PROPN",
            PosTag::Punct => "PUNCT",
            PosTag::Sconj => "SCONJ",
            PosTag::Sym => "SYM",
            PosTag::Verb => "VERB",
            PosTag::X => "X",
        }
    }

    /// `Conj` becomes `Cconj`; everything else is unchanged.
    pub fn normalized(self) -> PosTag {
        match self {
            PosTag::Conj => PosTag::Cconj,
            t => t,
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        PosTag::ALL
            .iter()
            .copied()
            .find(|t| t.name() == upper)
            .ok_or_else(|| format!("unknown POS tag {s:?}"))
    }
}

/// A gold-tagged sentence from a treebank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub words: Vec<String>,
    pub tags: Vec<PosTag>,
}

/// Parses CoNLL-U text, keeping FORM and UPOS. Multiword-token ranges and
/// empty nodes are skipped; `CONJ` is normalized to `CCONJ`.
pub fn parse_conllu(text: &str) -> Result<Vec<TaggedSentence>, TaggerError> {
    let mut sentences = Vec::new();
    let mut current = TaggedSentence { words: Vec::new(), tags: Vec::new() };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if !current.words.is_empty() {
                sentences.push(std::mem::replace(
                    &mut current,
                    TaggedSentence { words: Vec::new(), tags: Vec::new() },
                ));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let bad = |reason: String| TaggerError::Conllu { line: line_no, reason };
        if cols.len() != 10 {
            return Err(bad(format!("expected 10 tab-separated columns, found {}", cols.len())));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        if id.parse::<u32>().is_err() {
            return Err(bad(format!("bad token id {id:?}")));
        }
        if cols[1].is_empty() {
            return Err(bad("empty FORM".into()));
        }
        let tag: PosTag = cols[3].parse().map_err(bad)?;
        current.words.push(cols[1].to_owned());
        current.tags.push(tag.normalized());
    }
    if !current.words.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

pub fn read_conllu(path: &Path) -> Result<Vec<TaggedSentence>, TaggerError> {
    let text = fs::read_to_string(path)
        .map_err(|source| TaggerError::Io { path: path.to_path_buf(), source })?;
    parse_conllu(&text)
}

const START: &str = "-START-";
const START2: &str = "-START2-";
const END: &str = "-END-";

fn is_number(word: &str) -> bool {
    word.chars().any(|c| c.is_ascii_digit())
        && word.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '-' | '/' | ':'))
}

fn normalize(word: &str) -> String {
    if is_number(word) {
        "<num>".to_owned()
    } else {
        word.to_lowercase()
    }
}

/// Character classes with runs capped at four: "Smith" -> "Xxxxx" -> "Xxxxx",
/// "1990s" -> "ddddx".
fn shape(word: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    let mut run = 0;
    for c in word.chars() {
        let class = if c.is_ascii_digit() {
            'd'
        } else if c.is_uppercase() {
            'X'
        } else if c.is_alphabetic() {
            'x'
        } else {
            c
        };
        if Some(class) == last {
            run += 1;
            if run > 4 {
                continue;
            }
        } else {
            run = 1;
            last = Some(class);
        }
        out.push(class);
    }
    out
}

fn features(words: &[&str], i: usize, prev: &str, prev2: &str) -> Vec<String> {
    let word = words[i];
    let lower = word.to_lowercase();
    let form = if is_number(word) { "<num>" } else { word };
    let chars: Vec<char> = lower.chars().collect();
    let suffix = |n: usize| chars[chars.len().saturating_sub(n)..].iter().collect::<String>();
    let prev_word = if i == 0 { START.to_owned() } else { normalize(words[i - 1]) };
    let next_word = words.get(i + 1).map_or_else(|| END.to_owned(), |w| normalize(w));
    vec![
        "bias".to_owned(),
        format!("w {form}"),
        format!("lw {}", normalize(word)),
        format!("s1 {}", suffix(1)),
        format!("s2 {}", suffix(2)),
        format!("s3 {}", suffix(3)),
        format!("p1 {}", chars.first().map(|c| c.to_string()).unwrap_or_default()),
        format!("t-1 {prev}"),
        format!("t-2 {prev2} {prev}"),
        format!("w-1 {prev_word}"),
        format!("w+1 {next_word}"),
        format!("shape {}", shape(word)),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub corpus: String,
    pub epochs: u32,
    pub seed: u64,
    pub train_sentences: usize,
    /// Accuracy on a held-out split, when one was supplied.
    pub heldout_accuracy: Option<f64>,
}

/// Averaged perceptron weights over a fixed tag set.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    tags: Vec<PosTag>,
    weights: HashMap<String, Vec<f64>>,
    pub metadata: ModelMetadata,
}

impl TaggerModel {
    /// Tags in class-index order (sorted by name).
    pub fn tag_set(&self) -> &[PosTag] {
        &self.tags
    }

    pub fn num_features(&self) -> usize {
        self.weights.len()
    }

    fn scores(&self, feats: &[String]) -> Vec<f64> {
        let mut scores = vec![0.0; self.tags.len()];
        for f in feats {
            if let Some(w) = self.weights.get(f) {
                for (s, w) in scores.iter_mut().zip(w) {
                    *s += w;
                }
            }
        }
        scores
    }

    fn best(&self, feats: &[String]) -> usize {
        argmax(&self.scores(feats))
    }

    pub fn tag<S: AsRef<str>>(&self, words: &[S]) -> Vec<PosTag> {
        let words: Vec<&str> = words.iter().map(AsRef::as_ref).collect();
        let mut prev = START.to_owned();
        let mut prev2 = START2.to_owned();
        let mut out = Vec::with_capacity(words.len());
        for i in 0..words.len() {
            let tag = self.tags[self.best(&features(&words, i, &prev, &prev2))];
            out.push(tag);
            prev2 = std::mem::replace(&mut prev, tag.name().to_owned());
        }
        out
    }

    /// Token-level accuracy against gold tags.
    pub fn accuracy(&self, gold: &[TaggedSentence]) -> f64 {
        let mut correct = 0usize;
        let mut total = 0usize;
        for s in gold {
            let predicted = self.tag(&s.words);
            correct += predicted.iter().zip(&s.tags).filter(|(p, g)| p == g).count();
            total += s.tags.len();
        }
        if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        }
    }
}

// first maximal index; classes are sorted by name so ties go to the smaller name
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

struct FeatureState {
    weights: Vec<f64>,
    totals: Vec<f64>,
    stamps: Vec<u64>,
}

struct Trainer {
    num_tags: usize,
    features: HashMap<String, FeatureState>,
    instances: u64,
}

impl Trainer {
    fn scores(&self, feats: &[String]) -> Vec<f64> {
        let mut scores = vec![0.0; self.num_tags];
        for f in feats {
            if let Some(st) = self.features.get(f) {
                for (s, w) in scores.iter_mut().zip(&st.weights) {
                    *s += w;
                }
            }
        }
        scores
    }

    fn update(&mut self, truth: usize, guess: usize, feats: &[String]) {
        self.instances += 1;
        if truth == guess {
            return;
        }
        let now = self.instances;
        let n = self.num_tags;
        for f in feats {
            let st = self.features.entry(f.clone()).or_insert_with(|| FeatureState {
                weights: vec![0.0; n],
                totals: vec![0.0; n],
                stamps: vec![0; n],
            });
            for (class, delta) in [(truth, 1.0), (guess, -1.0)] {
                st.totals[class] += (now - st.stamps[class]) as f64 * st.weights[class];
                st.stamps[class] = now;
                st.weights[class] += delta;
            }
        }
    }

    fn finish(self) -> HashMap<String, Vec<f64>> {
        let now = self.instances.max(1);
        self.features
            .into_iter()
            .filter_map(|(f, st)| {
                let avg: Vec<f64> = (0..self.num_tags)
                    .map(|c| {
                        let total = st.totals[c] + (now - st.stamps[c]) as f64 * st.weights[c];
                        total / now as f64
                    })
                    .collect();
                avg.iter().any(|&w| w != 0.0).then_some((f, avg))
            })
            .collect()
    }
}

/// Trains a model on gold-tagged sentences.
pub fn train(
    sentences: &[TaggedSentence],
    epochs: u32,
    seed: u64,
    corpus_name: &str,
) -> Result<TaggerModel, TaggerError> {
    if epochs == 0 {
        return Err(TaggerError::ZeroEpochs);
    }
    if sentences.iter().all(|s| s.words.is_empty()) {
        return Err(TaggerError::EmptyTraining);
    }
    let mut tags: Vec<PosTag> = sentences.iter().flat_map(|s| s.tags.iter().map(|t| t.normalized())).collect();
    tags.sort();
    tags.dedup();
    let class_of: HashMap<PosTag, usize> = tags.iter().enumerate().map(|(i, t)| (*t, i)).collect();

    let mut trainer = Trainer { num_tags: tags.len(), features: HashMap::new(), instances: 0 };
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let s = &sentences[si];
            let words: Vec<&str> = s.words.iter().map(String::as_str).collect();
            let mut prev = START.to_owned();
            let mut prev2 = START2.to_owned();
            for (i, gold) in s.tags.iter().enumerate() {
                let feats = features(&words, i, &prev, &prev2);
                let guess = argmax(&trainer.scores(&feats));
                trainer.update(class_of[&gold.normalized()], guess, &feats);
                prev2 = std::mem::replace(&mut prev, tags[guess].name().to_owned());
            }
        }
    }
    Ok(TaggerModel {
        tags,
        weights: trainer.finish(),
        metadata: ModelMetadata {
            corpus: corpus_name.to_owned(),
            epochs,
            seed,
            train_sentences: sentences.len(),
            heldout_accuracy: None,
        },
    })
}

pub const MODEL_MAGIC: &[u8; 4] = b"LPTG";
pub const MODEL_VERSION: u16 = 1;

impl TaggerModel {
    /// Serializes as `LPTG`, a little-endian u16 version, a u64 payload
    /// length, then the payload: metadata JSON, tag names and a weight table
    /// sorted by feature string.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut payload = Vec::new();
        let meta = serde_json::to_vec(&self.metadata).expect("metadata serializes");
        put_bytes32(&mut payload, &meta);
        payload.push(self.tags.len() as u8);
        for t in &self.tags {
            let name = t.name().as_bytes();
            payload.push(name.len() as u8);
            payload.extend_from_slice(name);
        }
        let mut feats: Vec<(&String, &Vec<f64>)> = self.weights.iter().collect();
        feats.sort_by(|a, b| a.0.cmp(b.0));
        payload.extend_from_slice(&(feats.len() as u32).to_le_bytes());
        for (f, w) in feats {
            put_bytes32(&mut payload, f.as_bytes());
            for x in w {
                payload.extend_from_slice(&x.to_le_bytes());
            }
        }
        let mut out = Vec::with_capacity(payload.len() + 14);
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TaggerError> {
        if bytes.len() < 4 {
            return Err(TaggerError::Corrupt(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..4] != MODEL_MAGIC {
            return Err(TaggerError::BadMagic {
                expected: String::from_utf8_lossy(MODEL_MAGIC).into_owned(),
                found: String::from_utf8_lossy(&bytes[..4]).into_owned(),
            });
        }
        let mut r = Reader { bytes, pos: 4 };
        let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
        if version != MODEL_VERSION {
            return Err(TaggerError::Version { expected: MODEL_VERSION, found: version });
        }
        let len = r.u64()? as usize;
        if r.remaining() != len {
            return Err(TaggerError::Corrupt(format!(
                "payload length {len} but {} bytes follow the header",
                r.remaining()
            )));
        }
        let metadata: ModelMetadata = serde_json::from_slice(r.bytes32()?)
            .map_err(|e| TaggerError::Corrupt(format!("metadata: {e}")))?;
        let num_tags = r.take(1)?[0] as usize;
        let mut tags = Vec::with_capacity(num_tags);
        for _ in 0..num_tags {
            let n = r.take(1)?[0] as usize;
            let name = std::str::from_utf8(r.take(n)?).map_err(|e| TaggerError::Corrupt(e.to_string()))?;
            tags.push(name.parse::<PosTag>().map_err(TaggerError::Corrupt)?);
        }
        if tags.is_empty() || tags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TaggerError::Corrupt("tag set empty or unsorted".into()));
        }
        let num_feats = r.u32()? as usize;
        let mut weights = HashMap::with_capacity(num_feats);
        for _ in 0..num_feats {
            let f = std::str::from_utf8(r.bytes32()?)
                .map_err(|e| TaggerError::Corrupt(e.to_string()))?
                .to_owned();
            let w = (0..num_tags)
                .map(|_| r.take(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))))
                .collect::<Result<Vec<_>, _>>()?;
            weights.insert(f, w);
        }
        if r.remaining() != 0 {
            return Err(TaggerError::Corrupt(format!("{} trailing bytes", r.remaining())));
        }
        Ok(TaggerModel { tags, weights, metadata })
    }

    pub fn save(&self, path: &Path) -> Result<(), TaggerError> {
        fs::write(path, self.to_bytes()).map_err(|source| TaggerError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, TaggerError> {
        let bytes = fs::read(path).map_err(|source| TaggerError::Io { path: path.to_path_buf(), source })?;
        Self::from_bytes(&bytes)
    }
}

fn put_bytes32(out: &mut Vec<u8>, b: &[u8]) {
    out.extend_from_slice(&(b.len() as u32).to_le_bytes());
    out.extend_from_slice(b);
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], TaggerError> {
        if self.remaining() < n {
            return Err(TaggerError::Corrupt(format!("unexpected end of data at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn u32(&mut self) -> Result<u32, TaggerError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, TaggerError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn bytes32(&mut self) -> Result<&'a [u8], TaggerError> {
        let n = self.u32()? as usize;
        self.take(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "\
# sent_id = 1
1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_
2\tcat\tcat\tNOUN\t_\t_\t3\tnsubj\t_\t_
3\tsat\tsit\tVERB\t_\t_\t0\troot\t_\t_
4\t.\t.\tPUNCT\t_\t_\t3\tpunct\t_\t_

1\tDogs\tdog\tNOUN\t_\t_\t2\tnsubj\t_\t_
2\tbark\tbark\tVERB\t_\t_\t0\troot\t_\t_
3\tloudly\tloudly\tADV\t_\t_\t2\tadvmod\t_\t_
4\t,\t,\tPUNCT\t_\t_\t2\tpunct\t_\t_
5\tbut\tbut\tCONJ\t_\t_\t6\tcc\t_\t_
6\tsleep\tsleep\tVERB\t_\t_\t2\tconj\t_\t_

1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_
1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_
2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_
3\trun\trun\tVERB\t_\t_\t0\troot\t_\t_
3.1\tx\tx\tX\t_\t_\t_\t_\t_\t_
4\tquickly\tquickly\tADV\t_\t_\t3\tadvmod\t_\t_
";

    #[test]
    fn parses_toy_treebank() {
        let s = parse_conllu(TOY).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[1].tags[4], PosTag::Cconj);
        assert_eq!(s[2].words, ["do", "n't", "run", "quickly"]);
    }

    #[test]
    fn toy_treebank_is_learned() {
        let s = parse_conllu(TOY).unwrap();
        let m = train(&s, 5, 1, "toy").unwrap();
        assert_eq!(m.accuracy(&s), 1.0);
        assert!(!m.tag_set().contains(&PosTag::Conj));
    }

    #[test]
    fn zero_epochs_rejected() {
        let s = parse_conllu(TOY).unwrap();
        assert!(matches!(train(&s, 0, 1, "toy"), Err(TaggerError::ZeroEpochs)));
        assert!(matches!(train(&[], 1, 1, "none"), Err(TaggerError::EmptyTraining)));
    }

    #[test]
    fn conllu_errors_have_line_numbers() {
        let err = parse_conllu("1\tA\ta\tDET\t_\t_\t0\troot\t_\t_\n2\tB\tb\tNOPE\t_\t_\t1\tx\t_\t_\n").unwrap_err();
        assert!(matches!(err, TaggerError::Conllu { line: 2, .. }), "{err}");
        let err = parse_conllu("# c\n1\tA\ta\tDET\n").unwrap_err();
        assert!(matches!(err, TaggerError::Conllu { line: 2, .. }));
    }

    #[test]
    fn tag_names_round_trip_and_sort() {
        for t in PosTag::ALL {
            assert_eq!(t.name().parse::<PosTag>().unwrap(), t);
        }
        let mut names: Vec<&str> = PosTag::ALL.iter().map(|t| t.name()).collect();
        let sorted = {
            let mut n = names.clone();
            n.sort();
            n
        };
        assert_eq!(names, sorted);
        names.dedup();
        assert_eq!(names.len(), 18);
        assert_eq!(serde_json::to_string(&PosTag::Propn).unwrap(), "\"PROPN\"");
    }

    #[test]
    fn shapes() {
        assert_eq!(shape("Smith"), "Xxxxx");
        assert_eq!(shape("1990s"), "ddddx");
        assert_eq!(shape("state-of-the-art"), "xxxx-xx-xxx-xxx");
        assert_eq!(shape("U.S."), "X.X.");
    }

    #[test]
    fn ties_go_to_smaller_tag_name() {
        assert_eq!(argmax(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn model_bytes_round_trip() {
        let s = parse_conllu(TOY).unwrap();
        let m = train(&s, 3, 9, "toy").unwrap();
        let back = TaggerModel::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.tag(&["the", "cat"]), m.tag(&["the", "cat"]));
        assert_eq!(back.to_bytes(), m.to_bytes());
    }

    #[test]
    fn load_rejects_bad_files() {
        let s = parse_conllu(TOY).unwrap();
        let bytes = train(&s, 1, 0, "toy").unwrap().to_bytes();

        assert!(matches!(TaggerModel::from_bytes(&[]), Err(TaggerError::Corrupt(_))));

        let mut flipped = bytes.clone();
        for b in &mut flipped[..4] {
            *b = !*b;
        }
        let err = TaggerModel::from_bytes(&flipped).unwrap_err();
        assert!(err.to_string().contains("LPTG"), "{err}");

        let mut versioned = bytes.clone();
        versioned[4] = 9;
        assert!(matches!(TaggerModel::from_bytes(&versioned), Err(TaggerError::Version { found: 9, .. })));

        let truncated = &bytes[..bytes.len() - 5];
        assert!(matches!(TaggerModel::from_bytes(truncated), Err(TaggerError::Corrupt(_))));
    }

    #[test]
    fn same_seed_same_model() {
        let s = parse_conllu(TOY).unwrap();
        let a = train(&s, 4, 17, "toy").unwrap();
        let b = train(&s, 4, 17, "toy").unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
    }
}
