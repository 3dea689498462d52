//! Corpus ingestion, rule-based sentence splitting and word tokenization.
//!
//! Sentence boundaries are `.`, `!` or `?` (optionally followed by closing
//! quotes or brackets) when followed by whitespace and then an uppercase
//! letter or a digit. A period closing a known abbreviation ("Dr.", "etc."),
//! a dotted acronym ("U.S.", "e.g.") or a single-letter initial never ends a
//! sentence. Decimal points are safe because they are never followed by
//! whitespace.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::IngestError;

/// Sentences shorter than this many words are dropped before curation.
pub const MIN_SENTENCE_WORDS: usize = 5;
/// Sentences longer than this many words are dropped before curation.
pub const MAX_SENTENCE_WORDS: usize = 128;

/// Lowercased abbreviations whose final period does not end a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.", "ft.", "gen.", "col.",
    "capt.", "lt.", "sgt.", "gov.", "sen.", "rep.", "rev.", "hon.", "pres.", "etc.", "vs.",
    "cf.", "al.", "approx.", "ca.", "inc.", "ltd.", "co.", "corp.", "dept.", "univ.", "assn.",
    "bros.", "no.", "nos.", "vol.", "vols.", "fig.", "figs.", "ed.", "eds.", "pp.", "p.",
    "op.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.",
    "nov.", "dec.", "e.g.", "i.e.", "u.s.", "u.k.", "a.m.", "p.m.",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '\u{201c}', '\u{2018}'];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: u64,
    pub title: Option<String>,
    pub body: String,
}

impl RawDocument {
    pub fn new(doc_id: u64, body: impl Into<String>) -> Self {
        RawDocument { doc_id, title: None, body: body.into() }
    }

    /// Validates `body` as UTF-8, reporting the first bad byte offset.
    pub fn from_bytes(doc_id: u64, title: Option<String>, body: Vec<u8>) -> Result<Self, IngestError> {
        match String::from_utf8(body) {
            Ok(body) => Ok(RawDocument { doc_id, title, body }),
            Err(e) => Err(IngestError::Utf8 { doc_id, offset: e.utf8_error().valid_up_to() }),
        }
    }
}

/// A word form with byte offsets into its sentence text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentedSentence {
    pub doc_id: u64,
    pub sent_idx: u32,
    pub text: String,
    pub words: Vec<Word>,
}

impl SegmentedSentence {
    pub fn word_forms(&self) -> Vec<&str> {
        self.words.iter().map(|w| w.text.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Whether the sentence length lies within the curation bounds.
    pub fn within_length_bounds(&self) -> bool {
        (MIN_SENTENCE_WORDS..=MAX_SENTENCE_WORDS).contains(&self.words.len())
    }
}

fn is_abbreviation(lowered: &str) -> bool {
    if ABBREVIATIONS.contains(&lowered) {
        return true;
    }
    // initials ("J.") and dotted acronyms ("u.s.a.")
    let mut chars = lowered.chars().peekable();
    let mut groups = 0;
    while let Some(c) = chars.next() {
        if !c.is_alphabetic() || chars.next() != Some('.') {
            return false;
        }
        groups += 1;
    }
    groups >= 1
}

/// Byte ranges of the sentences in `body`, untrimmed.
fn sentence_ranges(body: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = body.char_indices().collect();
    let mut ranges = Vec::new();
    let mut sent_start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !matches!(c, '.' | '!' | '?') {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && (CLOSERS.contains(&chars[j].1) || matches!(chars[j].1, '.' | '!' | '?')) {
            j += 1;
        }
        let end = chars.get(j).map_or(body.len(), |&(p, _)| p);
        if j >= chars.len() {
            break;
        }
        if !chars[j].1.is_whitespace() {
            i = j;
            continue;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let mut n = k;
        while n < chars.len() && OPENERS.contains(&chars[n].1) {
            n += 1;
        }
        let starts_sentence = chars
            .get(n)
            .is_some_and(|&(_, next)| next.is_uppercase() || next.is_ascii_digit());
        if starts_sentence && !(c == '.' && j == i + 1 && ends_with_abbreviation(&body[sent_start..pos + 1])) {
            ranges.push((sent_start, end));
            sent_start = chars[k].0;
        }
        i = k;
    }
    if sent_start < body.len() {
        ranges.push((sent_start, body.len()));
    }
    ranges
}

fn ends_with_abbreviation(upto_period: &str) -> bool {
    let token = upto_period.rsplit(char::is_whitespace).next().unwrap_or("");
    let token = token.trim_start_matches(OPENERS);
    is_abbreviation(&token.to_lowercase())
}

/// Splits a document into word-segmented sentences numbered in document order.
/// Whitespace-only stretches yield no sentence.
pub fn split_sentences(doc: &RawDocument) -> Vec<SegmentedSentence> {
    let mut out = Vec::new();
    for (start, end) in sentence_ranges(&doc.body) {
        let text = doc.body[start..end].trim();
        if text.is_empty() {
            continue;
        }
        let words = tokenize_words(text);
        if words.is_empty() {
            continue;
        }
        out.push(SegmentedSentence {
            doc_id: doc.doc_id,
            sent_idx: out.len() as u32,
            text: text.to_owned(),
            words,
        });
    }
    out
}

/// Whitespace tokenization with leading and trailing punctuation split off
/// one character at a time. Internal hyphens, apostrophes and periods stay
/// attached, and known abbreviations keep their final period.
pub fn tokenize_words(text: &str) -> Vec<Word> {
    let mut words = Vec::new();
    let mut push = |start: usize, end: usize| {
        words.push(Word { text: text[start..end].to_owned(), start, end });
    };
    for (chunk_start, chunk) in whitespace_chunks(text) {
        let mut lo = chunk_start;
        let mut hi = chunk_start + chunk.len();
        if is_abbreviation(&chunk.to_lowercase()) {
            push(lo, hi);
            continue;
        }
        while let Some(c) = text[lo..hi].chars().next() {
            if c.is_alphanumeric() {
                break;
            }
            push(lo, lo + c.len_utf8());
            lo += c.len_utf8();
        }
        let mut trailing = Vec::new();
        while lo < hi {
            let core = &text[lo..hi];
            if is_abbreviation(&core.to_lowercase()) {
                break;
            }
            let c = core.chars().next_back().expect("non-empty");
            if c.is_alphanumeric() {
                break;
            }
            hi -= c.len_utf8();
            trailing.push((hi, hi + c.len_utf8()));
        }
        if lo < hi {
            push(lo, hi);
        }
        for (s, e) in trailing.into_iter().rev() {
            push(s, e);
        }
    }
    words
}

fn whitespace_chunks(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = 0;
    std::iter::from_fn(move || {
        let tail = &text[rest..];
        let skip = tail.len() - tail.trim_start().len();
        let start = rest + skip;
        if start >= text.len() {
            return None;
        }
        let len = text[start..].find(char::is_whitespace).unwrap_or(text.len() - start);
        rest = start + len;
        Some((start, &text[start..start + len]))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// JSON lines with `id`, `title` and `text`.
    Jsonl,
    /// A directory holds one document per file; a single file holds
    /// blank-line-separated documents.
    Plain,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "plain" => Ok(CorpusFormat::Plain),
            other => Err(format!("unknown corpus format {other:?} (expected jsonl or plain)")),
        }
    }
}

/// Reads every document of a corpus, in input order.
pub fn read_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<RawDocument>, IngestError> {
    let docs = match format {
        CorpusFormat::Jsonl => read_jsonl(path)?,
        CorpusFormat::Plain if path.is_dir() => read_plain_dir(path)?,
        CorpusFormat::Plain => read_plain_file(path)?,
    };
    let mut seen = HashSet::with_capacity(docs.len());
    for d in &docs {
        if !seen.insert(d.doc_id) {
            return Err(IngestError::DuplicateId(d.doc_id));
        }
    }
    Ok(docs)
}

#[derive(Deserialize)]
struct JsonDoc {
    id: JsonId,
    #[serde(default)]
    title: Option<String>,
    text: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonId {
    Num(u64),
    Str(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io { path: path.to_path_buf(), source }
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RawDocument>, IngestError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = BufReader::new(file);
    let mut docs = Vec::new();
    let mut buf = Vec::new();
    let mut line = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf).map_err(io_err(path))? == 0 {
            break;
        }
        line += 1;
        if buf.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let record_err = |reason: String| IngestError::Record { path: path.to_path_buf(), line, reason };
        let text = match std::str::from_utf8(&buf) {
            Ok(t) => t,
            Err(e) => {
                // best effort to name the document before reporting
                let lossy = String::from_utf8_lossy(&buf);
                let doc: JsonDoc = serde_json::from_str(&lossy)
                    .map_err(|_| record_err(format!("invalid UTF-8 at byte {}", e.valid_up_to())))?;
                let doc_id = parse_id(doc.id).map_err(record_err)?;
                return Err(IngestError::Utf8 { doc_id, offset: e.valid_up_to() });
            }
        };
        let doc: JsonDoc = serde_json::from_str(text).map_err(|e| record_err(e.to_string()))?;
        let doc_id = parse_id(doc.id).map_err(record_err)?;
        docs.push(RawDocument { doc_id, title: doc.title, body: doc.text });
    }
    Ok(docs)
}

fn parse_id(id: JsonId) -> Result<u64, String> {
    match id {
        JsonId::Num(n) => Ok(n),
        JsonId::Str(s) => s.parse().map_err(|_| format!("document id {s:?} is not an unsigned integer")),
    }
}

/// Blank-line-separated documents in one file, numbered from 0.
pub fn read_plain_file(path: &Path) -> Result<Vec<RawDocument>, IngestError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let mut docs = Vec::new();
    let mut current: Vec<u8> = Vec::new();
    let flush = |current: &mut Vec<u8>, docs: &mut Vec<RawDocument>| -> Result<(), IngestError> {
        if !current.iter().all(u8::is_ascii_whitespace) {
            let doc_id = docs.len() as u64;
            docs.push(RawDocument::from_bytes(doc_id, None, std::mem::take(current))?);
        }
        current.clear();
        Ok(())
    };
    for line in bytes.split_inclusive(|&b| b == b'\n') {
        if line.iter().all(u8::is_ascii_whitespace) {
            flush(&mut current, &mut docs)?;
        } else {
            current.extend_from_slice(line);
        }
    }
    flush(&mut current, &mut docs)?;
    Ok(docs)
}

/// One document per regular file, ordered by file name, numbered from 0.
pub fn read_plain_dir(dir: &Path) -> Result<Vec<RawDocument>, IngestError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io_err(dir))?;
    paths.retain(|p| p.is_file());
    paths.sort();
    paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let bytes = fs::read(p).map_err(io_err(p))?;
            let title = p.file_name().map(|n| n.to_string_lossy().into_owned());
            RawDocument::from_bytes(i as u64, title, bytes)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(body: &str) -> Vec<String> {
        split_sentences(&RawDocument::new(0, body)).into_iter().map(|s| s.text).collect()
    }

    fn forms(text: &str) -> Vec<String> {
        tokenize_words(text).into_iter().map(|w| w.text).collect()
    }

    #[test]
    fn two_simple_sentences() {
        assert_eq!(texts("It rained. We left."), ["It rained.", "We left."]);
    }

    #[test]
    fn abbreviation_and_decimal() {
        assert_eq!(texts("Dr. Smith left. It was 3.5 km."), ["Dr. Smith left.", "It was 3.5 km."]);
    }

    #[test]
    fn acronyms_and_initials() {
        assert_eq!(
            texts("The U.S. Army left. J. R. Smith wrote it, e.g. This stays."),
            ["The U.S. Army left.", "J. R. Smith wrote it, e.g. This stays."]
        );
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(texts("It is 5 p.m. now. Fine? yes. Go!"), ["It is 5 p.m. now.", "Fine? yes.", "Go!"]);
    }

    #[test]
    fn quotes_and_digits() {
        assert_eq!(
            texts("He said \"stop.\" Then he left! 1990 was cold."),
            ["He said \"stop.\"", "Then he left!", "1990 was cold."]
        );
    }

    #[test]
    fn sentence_indices_in_order() {
        let doc = RawDocument::new(7, "Ab cd. Ef gh?  \n\n Ij kl!");
        let s = split_sentences(&doc);
        assert_eq!(s.len(), 3);
        assert!(s.iter().enumerate().all(|(i, s)| s.sent_idx == i as u32 && s.doc_id == 7));
    }

    #[test]
    fn empty_body_no_sentences() {
        assert!(texts("   \n ").is_empty());
    }

    #[test]
    fn tokenize_punctuation() {
        assert_eq!(forms("However, it froze."), ["However", ",", "it", "froze", "."]);
        assert_eq!(forms("don't stop"), ["don't", "stop"]);
        assert_eq!(forms("a state-of-the-art (\"new\") idea..."), [
            "a", "state-of-the-art", "(", "\"", "new", "\"", ")", "idea", ".", ".", "."
        ]);
        assert_eq!(forms("Dr. Who, etc., in the U.S."), ["Dr.", "Who", ",", "etc.", ",", "in", "the", "U.S."]);
        assert_eq!(forms("It was 3.5 km."), ["It", "was", "3.5", "km", "."]);
    }

    #[test]
    fn offsets_index_the_text() {
        let text = "  Où est-il ? «Ici» ";
        for w in tokenize_words(text) {
            assert_eq!(&text[w.start..w.end], w.text);
        }
    }

    #[test]
    fn from_bytes_reports_offset() {
        let err = RawDocument::from_bytes(42, None, b"ok \xff bad".to_vec()).unwrap_err();
        assert!(matches!(err, IngestError::Utf8 { doc_id: 42, offset: 3 }));
    }

    #[test]
    fn length_bounds() {
        let s = &split_sentences(&RawDocument::new(0, "One two three four."))[0];
        assert_eq!(s.len(), 5);
        assert!(s.within_length_bounds());
        let s = &split_sentences(&RawDocument::new(0, "Too short."))[0];
        assert!(!s.within_length_bounds());
    }

    #[test]
    fn read_formats() {
        let dir = tempfile::tempdir().unwrap();
        let jl = dir.path().join("c.jsonl");
        fs::write(&jl, "{\"id\": 3, \"title\": \"T\", \"text\": \"A b.\"}\n\n{\"id\": \"9\", \"text\": \"C.\"}\n").unwrap();
        let docs = read_corpus(&jl, CorpusFormat::Jsonl).unwrap();
        assert_eq!(docs.iter().map(|d| d.doc_id).collect::<Vec<_>>(), [3, 9]);
        assert_eq!(docs[0].title.as_deref(), Some("T"));

        let plain = dir.path().join("c.txt");
        fs::write(&plain, "First doc.\nStill first.\n\n  \nSecond doc.\n").unwrap();
        let docs = read_corpus(&plain, CorpusFormat::Plain).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].body, "Second doc.\n");

        let sub = dir.path().join("docs");
        fs::create_dir(&sub).unwrap();
        fs::write(sub.join("b.txt"), "Bee.").unwrap();
        fs::write(sub.join("a.txt"), "Ay.").unwrap();
        let docs = read_corpus(&sub, CorpusFormat::Plain).unwrap();
        assert_eq!(docs[0].body, "Ay.");
        assert_eq!(docs[1].title.as_deref(), Some("b.txt"));
    }

    #[test]
    fn jsonl_errors() {
        let dir = tempfile::tempdir().unwrap();
        let jl = dir.path().join("bad.jsonl");
        let mut bytes = b"{\"id\": 1, \"text\": \"fine\"}\n{\"id\": 5, \"text\": \"x".to_vec();
        bytes.push(0xC3);
        bytes.extend_from_slice(b"\"}\n");
        fs::write(&jl, &bytes).unwrap();
        assert!(matches!(read_jsonl(&jl).unwrap_err(), IngestError::Utf8 { doc_id: 5, .. }));

        fs::write(&jl, "{\"id\": 1, \"text\": \"a\"}\n{\"id\": 1, \"text\": \"b\"}\n").unwrap();
        assert!(matches!(read_corpus(&jl, CorpusFormat::Jsonl).unwrap_err(), IngestError::DuplicateId(1)));

        fs::write(&jl, "{\"id\": 1}\n").unwrap();
        assert!(matches!(read_jsonl(&jl).unwrap_err(), IngestError::Record { line: 1, .. }));
    }
}
