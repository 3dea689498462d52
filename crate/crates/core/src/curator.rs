//! Keyword filtering and e-CLS label bootstrapping.
//!
//! A sentence survives when it contains at least one lexicon match. Its label
//! follows the polarity of the governing match: the earliest match, preferring
//! the longer phrase and then positive polarity on ties.

use std::cmp::Reverse;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lexicon::{KeywordLexicon, KeywordMatch, Polarity};
use crate::segmenter::SegmentedSentence;
use crate::tagger::PosTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Entailment,
    Contradiction,
}

impl Label {
    /// 1 for entailment, 0 for contradiction.
    pub fn class_id(self) -> u8 {
        match self {
            Label::Entailment => 1,
            Label::Contradiction => 0,
        }
    }

    pub fn from_polarity(p: Polarity) -> Self {
        match p {
            Polarity::Positive => Label::Entailment,
            Polarity::Negative => Label::Contradiction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelSource {
    SinglePolarity,
    EarliestOfBoth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuratedSentence {
    pub segmented: SegmentedSentence,
    pub tags: Vec<PosTag>,
    pub matches: Vec<KeywordMatch>,
    /// Index into `matches` of the match that decided the label.
    pub governing: usize,
    pub label: Label,
    pub label_source: LabelSource,
}

impl CuratedSentence {
    pub fn governing_match(&self) -> &KeywordMatch {
        &self.matches[self.governing]
    }

    pub fn governing_polarity(&self) -> Polarity {
        self.governing_match().polarity
    }
}

/// Picks the governing match: smallest start, then longest phrase, then
/// positive before negative.
pub fn governing_index(matches: &[KeywordMatch]) -> Option<usize> {
    matches
        .iter()
        .enumerate()
        .min_by_key(|(_, m)| (m.start, Reverse(m.len()), m.polarity != Polarity::Positive))
        .map(|(i, _)| i)
}

/// Applies the keyword filter and labels the sentence. `tags` must be
/// parallel to the sentence's words.
pub fn curate(sentence: SegmentedSentence, tags: Vec<PosTag>, lexicon: &KeywordLexicon) -> Option<CuratedSentence> {
    assert_eq!(tags.len(), sentence.words.len(), "tags must be parallel to words");
    let matches = lexicon.match_keywords(&sentence.word_forms());
    let governing = governing_index(&matches)?;
    let polarity = matches[governing].polarity;
    let mixed = matches.iter().any(|m| m.polarity != polarity);
    Some(CuratedSentence {
        segmented: sentence,
        tags,
        label: Label::from_polarity(polarity),
        label_source: if mixed { LabelSource::EarliestOfBoth } else { LabelSource::SinglePolarity },
        matches,
        governing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CategoryFilter {
    #[default]
    Both,
    PositiveOnly,
    NegativeOnly,
}

impl CategoryFilter {
    pub fn admits(self, polarity: Polarity) -> bool {
        match self {
            CategoryFilter::Both => true,
            CategoryFilter::PositiveOnly => polarity == Polarity::Positive,
            CategoryFilter::NegativeOnly => polarity == Polarity::Negative,
        }
    }
}

impl FromStr for CategoryFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both" => Ok(CategoryFilter::Both),
            "positive-only" | "positive" => Ok(CategoryFilter::PositiveOnly),
            "negative-only" | "negative" => Ok(CategoryFilter::NegativeOnly),
            other => Err(format!("unknown category filter {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CurationCounts {
    pub seen: u64,
    pub no_keyword: u64,
    pub filtered_by_category: u64,
    pub positive: u64,
    pub negative: u64,
    pub mixed: u64,
}

impl CurationCounts {
    pub fn kept(&self) -> u64 {
        self.positive + self.negative
    }
}

/// Streams curated sentences out of a sentence iterator, tagging each with
/// `tagger` and keeping counts of what was dropped and why.
pub struct CurateStream<'a, I, F> {
    sentences: I,
    tagger: F,
    lexicon: &'a KeywordLexicon,
    filter: CategoryFilter,
    counts: CurationCounts,
}

pub fn curate_stream<I, F>(
    sentences: I,
    tagger: F,
    lexicon: &KeywordLexicon,
    filter: CategoryFilter,
) -> CurateStream<'_, I::IntoIter, F>
where
    I: IntoIterator<Item = SegmentedSentence>,
    F: FnMut(&SegmentedSentence) -> Vec<PosTag>,
{
    CurateStream { sentences: sentences.into_iter(), tagger, lexicon, filter, counts: CurationCounts::default() }
}

impl<I, F> CurateStream<'_, I, F> {
    pub fn counts(&self) -> CurationCounts {
        self.counts
    }
}

impl<I, F> Iterator for CurateStream<'_, I, F>
where
    I: Iterator<Item = SegmentedSentence>,
    F: FnMut(&SegmentedSentence) -> Vec<PosTag>,
{
    type Item = CuratedSentence;

    fn next(&mut self) -> Option<CuratedSentence> {
        for sentence in self.sentences.by_ref() {
            self.counts.seen += 1;
            let tags = (self.tagger)(&sentence);
            let Some(c) = curate(sentence, tags, self.lexicon) else {
                self.counts.no_keyword += 1;
                continue;
            };
            if !self.filter.admits(c.governing_polarity()) {
                self.counts.filtered_by_category += 1;
                continue;
            }
            match c.governing_polarity() {
                Polarity::Positive => self.counts.positive += 1,
                Polarity::Negative => self.counts.negative += 1,
            }
            if c.label_source == LabelSource::EarliestOfBoth {
                self.counts.mixed += 1;
            }
            return Some(c);
        }
        None
    }
}
