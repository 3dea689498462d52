//! Greedy longest-match-first WordPiece over an uncased vocabulary, keeping
//! the word-to-subword alignment needed for whole-word masking.

use std::collections::HashMap;
use std::fs;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{EncodeError, VocabError};

pub const CONTINUATION_PREFIX: &str = "##";
/// Maximum encoded length, [CLS] and [SEP] included.
pub const MAX_SEQ_LEN: usize = 128;
/// Words longer than this many characters encode as [UNK].
pub const MAX_WORD_CHARS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialIds {
    pub pad: u32,
    pub unk: u32,
    pub cls: u32,
    pub sep: u32,
    pub mask: u32,
}

impl SpecialIds {
    pub fn contains(&self, id: u32) -> bool {
        [self.pad, self.unk, self.cls, self.sep, self.mask].contains(&id)
    }
}

#[derive(Debug, Clone)]
pub struct SubwordVocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    specials: SpecialIds,
    // non-special ids, ascending; the pool for random replacements
    ordinary: Vec<u32>,
}

impl SubwordVocab {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, VocabError> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() {
                return Err(VocabError::EmptyToken { line: i + 1 });
            }
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(VocabError::Duplicate { token: t.clone(), line: i + 1 });
            }
        }
        let find = |name: &'static str| index.get(name).copied().ok_or(VocabError::MissingSpecial(name));
        let specials = SpecialIds {
            pad: find("[PAD]")?,
            unk: find("[UNK]")?,
            cls: find("[CLS]")?,
            sep: find("[SEP]")?,
            mask: find("[MASK]")?,
        };
        let ordinary = (0..tokens.len() as u32).filter(|&id| !specials.contains(id)).collect();
        Ok(SubwordVocab { tokens, index, specials, ordinary })
    }

    /// One token per line; the id is the 0-based line number.
    pub fn parse(text: &str) -> Result<Self, VocabError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let tokens = body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l).to_owned()).collect();
        Self::from_tokens(tokens)
    }

    pub fn load(path: &Path) -> Result<Self, VocabError> {
        let text = fs::read_to_string(path).map_err(|source| VocabError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn specials(&self) -> SpecialIds {
        self.specials
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Ids eligible as random replacements (everything but the specials).
    pub fn ordinary_ids(&self) -> &[u32] {
        &self.ordinary
    }

    /// SHA-256 over the tokens, each followed by `\n`.
    pub fn sha256(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    /// Subword ids for one word. A word with any unmatchable remainder is a
    /// single [UNK].
    pub fn wordpiece(&self, word: &str) -> Vec<u32> {
        let lower = word.to_lowercase();
        let bounds: Vec<usize> = lower.char_indices().map(|(i, _)| i).chain([lower.len()]).collect();
        if bounds.len() - 1 > MAX_WORD_CHARS || lower.is_empty() {
            return vec![self.specials.unk];
        }
        let mut pieces = Vec::new();
        let mut candidate = String::new();
        let mut start = 0;
        while start < bounds.len() - 1 {
            let mut hit = None;
            for end in (start + 1..bounds.len()).rev() {
                candidate.clear();
                if start > 0 {
                    candidate.push_str(CONTINUATION_PREFIX);
                }
                candidate.push_str(&lower[bounds[start]..bounds[end]]);
                if let Some(&id) = self.index.get(&candidate) {
                    hit = Some((id, end));
                    break;
                }
            }
            match hit {
                Some((id, end)) => {
                    pieces.push(id);
                    start = end;
                }
                None => return vec![self.specials.unk],
            }
        }
        pieces
    }

    pub fn encode<S: AsRef<str>>(&self, words: &[S]) -> Result<EncodedSentence, EncodeError> {
        if words.is_empty() {
            return Err(EncodeError::Empty);
        }
        let mut ids = vec![self.specials.cls];
        let mut word_spans = Vec::with_capacity(words.len());
        for w in words {
            let start = ids.len();
            ids.extend(self.wordpiece(w.as_ref()));
            word_spans.push(start..ids.len());
        }
        ids.push(self.specials.sep);
        if ids.len() > MAX_SEQ_LEN {
            return Err(EncodeError::OverLength { len: ids.len(), max: MAX_SEQ_LEN });
        }
        Ok(EncodedSentence { ids, word_spans })
    }

    /// Drops [PAD], [CLS] and [SEP], glues `##` continuations onto the
    /// preceding piece and joins words with single spaces. [UNK] and [MASK]
    /// come out literally.
    pub fn decode(&self, ids: &[u32]) -> Result<String, VocabError> {
        let mut words: Vec<String> = Vec::new();
        for &id in ids {
            let tok = self.token(id).ok_or(VocabError::IdOutOfRange { id, size: self.len() })?;
            let s = self.specials;
            if id == s.pad || id == s.cls || id == s.sep {
                continue;
            }
            let is_special = id == s.unk || id == s.mask;
            match tok.strip_prefix(CONTINUATION_PREFIX) {
                Some(rest) if !is_special && !words.is_empty() => words.last_mut().expect("non-empty").push_str(rest),
                Some(rest) if !is_special => words.push(rest.to_owned()),
                _ => words.push(tok.to_owned()),
            }
        }
        Ok(words.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSentence {
    pub ids: Vec<u32>,
    /// For each word, the subword positions it produced.
    pub word_spans: Vec<Range<usize>>,
}

impl EncodedSentence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// True when word `i` encoded to nothing but a single [UNK].
    pub fn is_unknown_word(&self, i: usize, specials: &SpecialIds) -> bool {
        let span = &self.word_spans[i];
        span.len() == 1 && self.ids[span.start] == specials.unk
    }
}
