//! Implication keyword lists and word-level multi-phrase matching.
//!
//! A lexicon holds phrases of one to four lowercase words, each tagged with a
//! polarity: positive implication (entailment connectives such as "hence") or
//! negative implication (contradiction connectives such as "but"). Matching
//! works on segmented words rather than raw text, so "so" never fires inside
//! "also" and a punctuation token between two words breaks a phrase.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::LexiconError;

/// Longest phrase, in words, a lexicon entry may have.
pub const MAX_PHRASE_WORDS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    /// Code used in lexicon files.
    pub fn code(self) -> &'static str {
        match self {
            Polarity::Positive => "POS",
            Polarity::Negative => "NEG",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        })
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "POS" => Ok(Polarity::Positive),
            "NEG" => Ok(Polarity::Negative),
            other => Err(format!("unknown polarity code {other:?} (expected POS or NEG)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordEntry {
    phrase: Vec<String>,
    polarity: Polarity,
}

impl KeywordEntry {
    pub fn phrase(&self) -> &[String] {
        &self.phrase
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// The phrase joined with single spaces.
    pub fn text(&self) -> String {
        self.phrase.join(" ")
    }

    pub fn len(&self) -> usize {
        self.phrase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrase.is_empty()
    }
}

/// One occurrence of a lexicon entry in a word sequence.
///
/// `entry` indexes into the lexicon that produced the match; `start..end` is a
/// half-open range of word indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeywordMatch {
    pub entry: usize,
    pub start: usize,
    pub end: usize,
    pub polarity: Polarity,
}

impl KeywordMatch {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone)]
pub struct KeywordLexicon {
    entries: Vec<KeywordEntry>,
    // first word -> entry indices
    by_first: HashMap<String, Vec<usize>>,
}

const BUILTIN_POSITIVE: &[&str] = &[
    "therefore",
    "accordingly",
    "so",
    "thus",
    "consequently",
    "hence",
    "thence",
    "and so",
    "for this reason",
    "in consequence",
    "on account of",
    // printed with stray quote marks in the original list
    "on the grounds",
    "since",
    "therefrom",
    "thereupon",
    "to that end",
    "whence",
    "wherefore",
];

const BUILTIN_NEGATIVE: &[&str] = &[
    "but",
    "although",
    "however",
    "nevertheless",
    "on the other hand",
    "still",
    "though",
    "yet",
];

/// The 18 positive and 8 negative implication keywords.
pub fn builtin_lexicon() -> KeywordLexicon {
    let entries = BUILTIN_POSITIVE
        .iter()
        .map(|p| (Polarity::Positive, *p))
        .chain(BUILTIN_NEGATIVE.iter().map(|p| (Polarity::Negative, *p)))
        .map(|(polarity, phrase)| (polarity, phrase.split(' ').map(str::to_owned).collect()));
    KeywordLexicon::from_entries(entries).expect("builtin lexicon is well-formed")
}

impl KeywordLexicon {
    /// Builds a lexicon, lowercasing every word and rejecting malformed or
    /// duplicate phrases.
    pub fn from_entries<I>(entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (Polarity, Vec<String>)>,
    {
        let mut out: Vec<KeywordEntry> = Vec::new();
        let mut by_first: HashMap<String, Vec<usize>> = HashMap::new();
        for (polarity, phrase) in entries {
            let phrase = normalize_phrase(&phrase)?;
            if out.iter().any(|e| e.phrase == phrase) {
                return Err(LexiconError::Duplicate(phrase.join(" ")));
            }
            by_first.entry(phrase[0].clone()).or_default().push(out.len());
            out.push(KeywordEntry { phrase, polarity });
        }
        Ok(KeywordLexicon { entries: out, by_first })
    }

    /// Parses the `POS|NEG<TAB>phrase` line format. `#` lines and blank lines
    /// are skipped.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (code, phrase) = line.split_once('\t').ok_or_else(|| LexiconError::Line {
                line: line_no,
                reason: "expected POS|NEG, a tab, then the phrase".into(),
            })?;
            let polarity = code
                .parse::<Polarity>()
                .map_err(|reason| LexiconError::Line { line: line_no, reason })?;
            if phrase.contains('\t') {
                return Err(LexiconError::Line {
                    line: line_no,
                    reason: "more than one tab".into(),
                });
            }
            let words: Vec<String> = phrase.split(' ').map(str::to_owned).collect();
            if words.iter().any(String::is_empty) {
                return Err(LexiconError::Line {
                    line: line_no,
                    reason: "phrase words must be separated by single spaces".into(),
                });
            }
            entries.push((polarity, words));
        }
        Self::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Renders the lexicon in the file format accepted by [`KeywordLexicon::parse`].
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(e.polarity.code());
            out.push('\t');
            out.push_str(&e.text());
            out.push('\n');
        }
        out
    }

    pub fn entries(&self) -> &[KeywordEntry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &KeywordEntry {
        &self.entries[idx]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, polarity: Polarity) -> usize {
        self.entries.iter().filter(|e| e.polarity == polarity).count()
    }

    pub fn find(&self, phrase: &str) -> Option<&KeywordEntry> {
        let words: Vec<&str> = phrase.split(' ').collect();
        self.entries.iter().find(|e| e.phrase.iter().map(String::as_str).eq(words.iter().copied()))
    }

    /// Every occurrence of every entry in `words`, compared case-insensitively
    /// word by word.
    ///
    /// Overlapping matches of different entries are all reported. Results are
    /// ordered by start, then longer phrases first, then entry index.
    pub fn match_keywords<S: AsRef<str>>(&self, words: &[S]) -> Vec<KeywordMatch> {
        let lowered: Vec<String> = words.iter().map(|w| w.as_ref().to_lowercase()).collect();
        let mut found = Vec::new();
        for start in 0..lowered.len() {
            let Some(candidates) = self.by_first.get(&lowered[start]) else {
                continue;
            };
            for &idx in candidates {
                let entry = &self.entries[idx];
                let end = start + entry.phrase.len();
                if end <= lowered.len() && entry.phrase[1..] == lowered[start + 1..end] {
                    found.push(KeywordMatch { entry: idx, start, end, polarity: entry.polarity });
                }
            }
        }
        found.sort_by(|a, b| {
            a.start
                .cmp(&b.start)
                .then(b.len().cmp(&a.len()))
                .then(a.entry.cmp(&b.entry))
        });
        found
    }
}

fn normalize_phrase(phrase: &[String]) -> Result<Vec<String>, LexiconError> {
    if phrase.is_empty() {
        return Err(LexiconError::Malformed("empty phrase".into()));
    }
    if phrase.len() > MAX_PHRASE_WORDS {
        return Err(LexiconError::Malformed(format!(
            "phrase {:?} has {} words (max {MAX_PHRASE_WORDS})",
            phrase.join(" "),
            phrase.len()
        )));
    }
    phrase
        .iter()
        .map(|w| {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                Err(LexiconError::Malformed(format!("bad word form {w:?}")))
            } else {
                Ok(w.to_lowercase())
            }
        })
        .collect()
}
