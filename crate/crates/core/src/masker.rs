//! Selective masking: pick maskable words by POS tag and turn them into
//! per-subword mask actions.
//!
//! Every plan is drawn from a ChaCha stream keyed by (policy seed, doc_id,
//! sent_idx), so a sentence's plan does not depend on which worker handled it
//! or in what order.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curator::CuratedSentence;
use crate::error::PolicyError;
use crate::shards::{TrainingRecord, IGNORE};
use crate::tagger::PosTag;
use crate::tokenizer::{EncodedSentence, SubwordVocab};

pub const DEFAULT_MASK_RATE: f64 = 0.15;

/// Probabilities of the three whole-word actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionProbs {
    pub mask: f64,
    pub random: f64,
    pub keep: f64,
}

impl Default for ActionProbs {
    fn default() -> Self {
        ActionProbs { mask: 0.8, random: 0.1, keep: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Base,
    BaseNouns,
    BaseNounsRandom,
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(PolicyKind::Base),
            "base-nouns" => Ok(PolicyKind::BaseNouns),
            "base-nouns-random" => Ok(PolicyKind::BaseNounsRandom),
            other => Err(format!("unknown policy kind {other:?}")),
        }
    }
}

pub const BASE_TAGS: [PosTag; 6] = [PosTag::Adj, PosTag::Adv, PosTag::Cconj, PosTag::Part, PosTag::Sconj, PosTag::Verb];
pub const NOUN_TAGS: [PosTag; 3] = [PosTag::Noun, PosTag::Pron, PosTag::Propn];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskPolicy {
    candidate_tags: BTreeSet<PosTag>,
    mask_rate: f64,
    action_probs: ActionProbs,
    seed: u64,
}

impl MaskPolicy {
    /// Validates and normalizes (`CONJ` folds into `CCONJ`).
    pub fn new(
        tags: impl IntoIterator<Item = PosTag>,
        mask_rate: f64,
        action_probs: ActionProbs,
        seed: u64,
    ) -> Result<Self, PolicyError> {
        let candidate_tags: BTreeSet<PosTag> = tags.into_iter().map(PosTag::normalized).collect();
        if candidate_tags.is_empty() {
            return Err(PolicyError("candidate tag set is empty".into()));
        }
        if !(mask_rate > 0.0 && mask_rate <= 1.0) {
            return Err(PolicyError(format!("mask rate {mask_rate} outside (0, 1]")));
        }
        let ActionProbs { mask, random, keep } = action_probs;
        if [mask, random, keep].iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(PolicyError("action probabilities must be finite and non-negative".into()));
        }
        if (mask + random + keep - 1.0).abs() > 1e-9 {
            return Err(PolicyError(format!("action probabilities sum to {}, not 1", mask + random + keep)));
        }
        Ok(MaskPolicy { candidate_tags, mask_rate, action_probs, seed })
    }

    pub fn candidate_tags(&self) -> &BTreeSet<PosTag> {
        &self.candidate_tags
    }

    pub fn mask_rate(&self) -> f64 {
        self.mask_rate
    }

    pub fn action_probs(&self) -> ActionProbs {
        self.action_probs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Adds AUX to the candidates (UD tags auxiliaries separately from VERB).
    pub fn with_aux(mut self) -> Self {
        self.candidate_tags.insert(PosTag::Aux);
        self
    }

    pub fn admits(&self, tag: PosTag) -> bool {
        self.candidate_tags.contains(&tag.normalized())
    }

    /// Words to select out of `num_words`, before capping at the candidate count.
    pub fn budget(&self, num_words: usize) -> usize {
        ((self.mask_rate * num_words as f64).round() as usize).max(1)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn sha256(&self) -> String {
        let json = serde_json::to_vec(self).expect("policy serializes");
        hex::encode(Sha256::digest(&json))
    }
}

/// ADJ, ADV, CCONJ (with CONJ), PART, SCONJ and VERB at rate 0.15 with an
/// 80/10/10 mask/random/keep split.
pub fn base_policy(seed: u64) -> MaskPolicy {
    ablation_policy(PolicyKind::Base, seed)
}

pub fn ablation_policy(kind: PolicyKind, seed: u64) -> MaskPolicy {
    let tags: Vec<PosTag> = match kind {
        PolicyKind::Base => BASE_TAGS.to_vec(),
        PolicyKind::BaseNouns => BASE_TAGS.iter().chain(&NOUN_TAGS).copied().collect(),
        PolicyKind::BaseNounsRandom => PosTag::ALL.to_vec(),
    };
    MaskPolicy::new(tags, DEFAULT_MASK_RATE, ActionProbs::default(), seed).expect("built-in policies are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Mask,
    Random,
    Keep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskAction {
    Mask,
    Random(u32),
    Keep,
}

impl MaskAction {
    pub fn kind(self) -> ActionKind {
        match self {
            MaskAction::Mask => ActionKind::Mask,
            MaskAction::Random(_) => ActionKind::Random,
            MaskAction::Keep => ActionKind::Keep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedWord {
    pub word: usize,
    pub kind: ActionKind,
    /// One action per subword position of the word, in order.
    pub actions: Vec<MaskAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskingPlan {
    /// Selected words in ascending word order.
    pub words: Vec<SelectedWord>,
}

impl MaskingPlan {
    pub fn selected_words(&self) -> Vec<usize> {
        self.words.iter().map(|w| w.word).collect()
    }
}

/// Per-sentence RNG keyed by the policy seed and the sentence identity.
pub fn sentence_rng(seed: u64, doc_id: u64, sent_idx: u32) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"logiprep/mask/v1");
    h.update(seed.to_le_bytes());
    h.update(doc_id.to_le_bytes());
    h.update(sent_idx.to_le_bytes());
    let key: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(key)
}

/// Word indices whose tag the policy admits, minus words encoded as a lone [UNK].
pub fn candidates(sentence: &CuratedSentence, encoded: &EncodedSentence, policy: &MaskPolicy, vocab: &SubwordVocab) -> Vec<usize> {
    let specials = vocab.specials();
    sentence
        .tags
        .iter()
        .enumerate()
        .filter(|&(i, t)| policy.admits(*t) && !encoded.is_unknown_word(i, &specials))
        .map(|(i, _)| i)
        .collect()
}

/// Draws a masking plan, or `None` when no word is a candidate.
pub fn plan(
    sentence: &CuratedSentence,
    encoded: &EncodedSentence,
    policy: &MaskPolicy,
    vocab: &SubwordVocab,
) -> Option<MaskingPlan> {
    let num_words = sentence.segmented.words.len();
    assert_eq!(sentence.tags.len(), num_words, "tags must be parallel to words");
    assert_eq!(encoded.word_spans.len(), num_words, "encoding must be parallel to words");

    let pool = candidates(sentence, encoded, policy, vocab);
    if pool.is_empty() {
        return None;
    }
    let take = policy.budget(num_words).min(pool.len());
    let mut rng = sentence_rng(policy.seed, sentence.segmented.doc_id, sentence.segmented.sent_idx);
    let mut chosen: Vec<usize> = index::sample(&mut rng, pool.len(), take).into_iter().map(|i| pool[i]).collect();
    chosen.sort_unstable();

    let probs = policy.action_probs;
    let ordinary = vocab.ordinary_ids();
    let words = chosen
        .into_iter()
        .map(|word| {
            let u: f64 = rng.gen();
            let kind = if u < probs.mask {
                ActionKind::Mask
            } else if u < probs.mask + probs.random && !ordinary.is_empty() {
                ActionKind::Random
            } else {
                ActionKind::Keep
            };
            let actions = encoded.word_spans[word]
                .clone()
                .map(|_| match kind {
                    ActionKind::Mask => MaskAction::Mask,
                    ActionKind::Random => MaskAction::Random(ordinary[rng.gen_range(0..ordinary.len())]),
                    ActionKind::Keep => MaskAction::Keep,
                })
                .collect();
            SelectedWord { word, kind, actions }
        })
        .collect();
    Some(MaskingPlan { words })
}

/// Applies a plan to the encoded sentence, producing the serialized training
/// example.
pub fn apply(
    plan: &MaskingPlan,
    sentence: &CuratedSentence,
    encoded: &EncodedSentence,
    vocab: &SubwordVocab,
) -> TrainingRecord {
    let mask_id = vocab.specials().mask;
    let mut input_ids = encoded.ids.clone();
    let mut mlm_targets = vec![IGNORE; input_ids.len()];
    for w in &plan.words {
        for (pos, action) in encoded.word_spans[w.word].clone().zip(&w.actions) {
            mlm_targets[pos] = i64::from(encoded.ids[pos]);
            input_ids[pos] = match action {
                MaskAction::Mask => mask_id,
                MaskAction::Random(id) => *id,
                MaskAction::Keep => encoded.ids[pos],
            };
        }
    }
    let keyword_masked = plan
        .words
        .iter()
        .any(|w| sentence.matches.iter().any(|m| (m.start..m.end).contains(&w.word)));
    TrainingRecord {
        input_ids,
        mlm_targets,
        cls_label: sentence.label.class_id(),
        doc_id: sentence.segmented.doc_id,
        sent_idx: sentence.segmented.sent_idx,
        keyword_masked,
    }
}
