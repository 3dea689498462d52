//! Corpus-run bookkeeping: how many sentences were seen, kept and dropped
//! (and why), the polarity split of what was kept, keyword frequencies and
//! masking diagnostics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::ReportMismatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DropCounts {
    /// Fewer than the minimum or more than the maximum number of words.
    pub length: u64,
    /// No implication keyword.
    pub no_keyword: u64,
    /// Governing polarity excluded by the category filter.
    pub category: u64,
    /// Subword encoding longer than the sequence limit.
    pub over_length: u64,
    /// No word carries a candidate tag.
    pub no_candidate: u64,
}

impl DropCounts {
    pub fn total(&self) -> u64 {
        self.length + self.no_keyword + self.category + self.over_length + self.no_candidate
    }

    fn add(&mut self, o: &DropCounts) {
        self.length += o.length;
        self.no_keyword += o.no_keyword;
        self.category += o.category;
        self.over_length += o.over_length;
        self.no_candidate += o.no_candidate;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunReport {
    /// Digest of the configuration that produced the report; merge refuses
    /// to combine different ones.
    pub config_sha256: String,
    /// Sentences are counted as they come; no deduplication.
    pub deduplicated: bool,
    pub sentences_seen: u64,
    pub sentences_kept: u64,
    pub dropped_by_reason: DropCounts,
    pub kept_positive: u64,
    pub kept_negative: u64,
    /// Kept sentences whose matches mix both polarities.
    pub kept_mixed: u64,
    /// Occurrences of each lexicon phrase across kept sentences.
    pub keyword_frequency: BTreeMap<String, u64>,
    /// Kept records in which at least one keyword word was selected.
    pub keyword_masked: u64,
    /// Candidate words per tag across kept sentences.
    pub candidate_tag_frequency: BTreeMap<String, u64>,
    pub selected_words: u64,
    pub words_in_kept: u64,
}

impl RunReport {
    pub fn new(config_sha256: impl Into<String>) -> Self {
        RunReport { config_sha256: config_sha256.into(), ..Default::default() }
    }

    pub fn keyword_masked_fraction(&self) -> f64 {
        ratio(self.keyword_masked, self.sentences_kept)
    }

    pub fn positive_fraction(&self) -> f64 {
        ratio(self.kept_positive, self.sentences_kept)
    }

    pub fn negative_fraction(&self) -> f64 {
        ratio(self.kept_negative, self.sentences_kept)
    }

    /// Checks the bookkeeping identities.
    pub fn check(&self) -> Result<(), String> {
        if self.sentences_kept + self.dropped_by_reason.total() != self.sentences_seen {
            return Err(format!(
                "kept {} + dropped {} != seen {}",
                self.sentences_kept,
                self.dropped_by_reason.total(),
                self.sentences_seen
            ));
        }
        if self.kept_positive + self.kept_negative != self.sentences_kept {
            return Err("polarity counts do not sum to kept".into());
        }
        Ok(())
    }

    /// Componentwise sum.
    pub fn merge(mut self, other: &RunReport) -> Result<RunReport, ReportMismatch> {
        if self.config_sha256 != other.config_sha256 {
            return Err(ReportMismatch { left: self.config_sha256, right: other.config_sha256.clone() });
        }
        self.deduplicated |= other.deduplicated;
        self.sentences_seen += other.sentences_seen;
        self.sentences_kept += other.sentences_kept;
        self.dropped_by_reason.add(&other.dropped_by_reason);
        self.kept_positive += other.kept_positive;
        self.kept_negative += other.kept_negative;
        self.kept_mixed += other.kept_mixed;
        add_counts(&mut self.keyword_frequency, &other.keyword_frequency);
        self.keyword_masked += other.keyword_masked;
        add_counts(&mut self.candidate_tag_frequency, &other.candidate_tag_frequency);
        self.selected_words += other.selected_words;
        self.words_in_kept += other.words_in_kept;
        Ok(self)
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.render_text(),
            ReportFormat::Json => self.render_json(),
            ReportFormat::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut s = String::new();
        let d = &self.dropped_by_reason;
        let _ = writeln!(s, "config            {}", self.config_sha256);
        let _ = writeln!(s, "deduplicated      {}", self.deduplicated);
        for (name, v) in [
            ("sentences seen", self.sentences_seen),
            ("sentences kept", self.sentences_kept),
            ("dropped length", d.length),
            ("dropped no-keyword", d.no_keyword),
            ("dropped category", d.category),
            ("dropped over-length", d.over_length),
            ("dropped no-candidate", d.no_candidate),
            ("kept positive", self.kept_positive),
            ("kept negative", self.kept_negative),
            ("kept mixed", self.kept_mixed),
            ("selected words", self.selected_words),
        ] {
            let _ = writeln!(s, "{name:<22}{v:>12}");
        }
        for (name, v) in [
            ("positive ratio", self.positive_fraction()),
            ("negative ratio", self.negative_fraction()),
            ("keyword masked", self.keyword_masked_fraction()),
        ] {
            let _ = writeln!(s, "{name:<22}{v:>12.4}");
        }
        let _ = writeln!(s, "\nkeyword frequency");
        for (k, v) in &self.keyword_frequency {
            let _ = writeln!(s, "  {k:<20}{v:>12}");
        }
        let _ = writeln!(s, "\ncandidate tags");
        for (k, v) in &self.candidate_tag_frequency {
            let _ = writeln!(s, "  {k:<20}{v:>12}");
        }
        s
    }

    fn render_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        let obj = v.as_object_mut().expect("struct is an object");
        for (key, x) in [
            ("positive_fraction", self.positive_fraction()),
            ("negative_fraction", self.negative_fraction()),
            ("keyword_masked_fraction", self.keyword_masked_fraction()),
        ] {
            obj.insert(key.into(), serde_json::Value::String(format!("{x:.4}")));
        }
        let mut out = serde_json::to_string_pretty(&v).expect("report serializes");
        out.push('\n');
        out
    }

    /// Keyword and tag frequencies as `table,key,count` rows.
    fn render_csv(&self) -> String {
        let mut s = String::from("table,key,count\n");
        for (k, v) in &self.keyword_frequency {
            let _ = writeln!(s, "keyword,{k},{v}");
        }
        for (k, v) in &self.candidate_tag_frequency {
            let _ = writeln!(s, "candidate_tag,{k},{v}");
        }
        s
    }

    /// Parses the JSON rendering. The derived ratio fields are recomputed, not
    /// trusted.
    pub fn from_json(text: &str) -> Result<RunReport, serde_json::Error> {
        let mut v: serde_json::Value = serde_json::from_str(text)?;
        if let Some(obj) = v.as_object_mut() {
            for key in ["positive_fraction", "negative_fraction", "keyword_masked_fraction"] {
                obj.remove(key);
            }
        }
        serde_json::from_value(v)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn add_counts(into: &mut BTreeMap<String, u64>, from: &BTreeMap<String, u64>) {
    for (k, v) in from {
        *into.entry(k.clone()).or_default() += v;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(seed: u64) -> RunReport {
        let mut r = RunReport::new("cfg");
        r.sentences_kept = 100 + seed;
        r.kept_positive = 41 + seed;
        r.kept_negative = 59;
        r.dropped_by_reason.length = 7;
        r.dropped_by_reason.no_keyword = 300 * seed;
        r.sentences_seen = r.sentences_kept + r.dropped_by_reason.total();
        r.keyword_masked = 20;
        r.keyword_frequency.insert("hence".into(), 3 + seed);
        r.candidate_tag_frequency.insert("VERB".into(), 9);
        r
    }

    #[test]
    fn zero_is_identity() {
        let r = sample(2);
        assert_eq!(r.clone().merge(&RunReport::new("cfg")).unwrap(), r);
        assert_eq!(RunReport::new("cfg").merge(&r).unwrap(), r);
    }

    #[test]
    fn config_mismatch_refused() {
        assert!(sample(0).merge(&RunReport::new("other")).is_err());
    }

    #[test]
    fn zero_report_renders_zeros() {
        let text = RunReport::new("cfg").render(ReportFormat::Text);
        assert!(text.contains("sentences seen"));
        assert!(text.contains("0.0000"));
        assert!(!text.chars().any(|c| ('1'..='9').contains(&c)));
    }

    #[test]
    fn ratios_printed_to_four_decimals() {
        let r = sample(0);
        assert!(r.render(ReportFormat::Text).contains("0.4100"));
        assert!(r.render(ReportFormat::Json).contains("\"positive_fraction\": \"0.4100\""));
        assert!(r.check().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let r = sample(3);
        assert_eq!(RunReport::from_json(&r.render(ReportFormat::Json)).unwrap(), r);
    }

    #[test]
    fn csv_lists_tables() {
        let csv = sample(0).render(ReportFormat::Csv);
        assert_eq!(csv, "table,key,count\nkeyword,hence,3\ncandidate_tag,VERB,9\n");
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_associative(a in 0u64..50, b in 0u64..50, c in 0u64..50) {
            let (ra, rb, rc) = (sample(a), sample(b), sample(c));
            prop_assert_eq!(ra.clone().merge(&rb).unwrap(), rb.clone().merge(&ra).unwrap());
            let left = ra.clone().merge(&rb).unwrap().merge(&rc).unwrap();
            let right = ra.merge(&rb.merge(&rc).unwrap()).unwrap();
            prop_assert_eq!(left.clone(), right);
            prop_assert!(left.check().is_ok());
        }
    }
}
