mod common;

use common::*;
use logiprep_core::masker::{ablation_policy, base_policy, ActionKind, PolicyKind};
use logiprep_core::pipeline::{trace_sentence, Outcome};
use logiprep_core::segmenter::split_sentences;
use logiprep_core::tagger::PosTag::{self, *};

#[test]
fn every_mini_corpus_plan_obeys_the_laws() {
    let res = mini_resources();
    let mut kept = 0;
    for doc in mini_docs() {
        for s in split_sentences(&doc) {
            let t = trace_sentence(s, &res);
            if t.outcome == Outcome::Kept {
                check_plan_laws(&t, &res.policy, &res.vocab).unwrap_or_else(|e| panic!("doc {} sent {}: {e}", doc.doc_id, t.sentence.sent_idx));
                kept += 1;
            }
        }
    }
    assert!(kept > 500, "only {kept} kept sentences");
}

#[test]
fn single_pick_is_uniform_under_all_tags() {
    // 7 words -> budget 1, so each draw is one multinomial trial
    let text = "It froze, hence lakes shrank.";
    let tags = [Pron, Verb, Punct, Adv, Noun, Verb, Punct];
    let c = curated_with_tags(text, &tags);
    let vocab = vocab_for(&c.segmented.word_forms());
    let policy = ablation_policy(PolicyKind::BaseNounsRandom, 0);
    let (counts, plans) = selection_counts(&c, &policy, &vocab, 12_000);
    assert!(plans.iter().all(|p| p.words.len() == 1));
    let stat = chi_square_uniform(&counts);
    assert!(stat < chi_square_crit_001(counts.len() - 1), "chi2 {stat:.3}, counts {counts:?}");
}

fn twenty_words() -> (String, Vec<PosTag>) {
    let text = "The old farmer sold the quiet market , hence the cold river rose slowly and the new bridge failed again";
    let tags = vec![Det, Adj, Noun, Verb, Det, Adj, Noun, Punct, Adv, Det, Adj, Noun, Verb, Adv, Cconj, Det, Adj, Noun, Verb, Adv];
    (text.to_string(), tags)
}

#[test]
fn three_of_twenty_is_uniform_after_subset_correction() {
    let (text, tags) = twenty_words();
    let c = curated_with_tags(&text, &tags);
    let n = c.segmented.words.len();
    assert_eq!(n, 20);
    let vocab = vocab_for(&c.segmented.word_forms());
    let policy = ablation_policy(PolicyKind::BaseNounsRandom, 0);
    let (counts, plans) = selection_counts(&c, &policy, &vocab, 10_000);
    let k = plans[0].words.len();
    assert_eq!(k, 3);
    // k-subsets: Pearson X^2 is (n-k)/(n-1) times a chi-square with n-1 df
    let stat = chi_square_uniform(&counts) * (n - 1) as f64 / (n - k) as f64;
    assert!(stat < chi_square_crit_001(n - 1), "corrected chi2 {stat:.3}");
}

#[test]
fn each_of_ten_candidates_selected_thirty_percent_of_the_time() {
    let (text, _) = twenty_words();
    // 10 of the 20 words carry a Base tag
    let tags = [Det, Adj, Noun, Verb, Det, Adj, Noun, Punct, Adv, Det, Adj, Noun, Verb, Adv, Det, Det, Adj, Noun, Verb, Adv];
    let c = curated_with_tags(&text, &tags);
    let vocab = vocab_for(&c.segmented.word_forms());
    let policy = base_policy(0);
    let cand: Vec<usize> = (0..tags.len()).filter(|&i| policy.admits(tags[i])).collect();
    assert_eq!(cand.len(), 10);
    assert_eq!(policy.budget(tags.len()), 3);
    let (counts, _) = selection_counts(&c, &policy, &vocab, 10_000);
    for (i, &n) in counts.iter().enumerate() {
        let f = n as f64 / 10_000.0;
        if cand.contains(&i) {
            assert!((f - 0.3).abs() <= 0.02, "word {i}: {f}");
        } else {
            assert_eq!(n, 0);
        }
    }
}

#[test]
fn action_split_follows_probabilities() {
    let (text, tags) = twenty_words();
    let c = curated_with_tags(&text, &tags);
    let vocab = vocab_for(&c.segmented.word_forms());
    let (_, plans) = selection_counts(&c, &ablation_policy(PolicyKind::BaseNounsRandom, 0), &vocab, 10_000);
    let mut by_kind = [0f64; 3];
    for w in plans.iter().flat_map(|p| &p.words) {
        by_kind[w.kind as usize] += 1.0;
    }
    let total: f64 = by_kind.iter().sum();
    let [m, r, k] = by_kind.map(|x| x / total);
    assert!((m - 0.8).abs() < 0.015 && (r - 0.1).abs() < 0.01 && (k - 0.1).abs() < 0.01, "{m} {r} {k}");
    assert_eq!(ActionKind::Mask as usize, 0);
}

#[test]
fn plans_do_not_depend_on_processing_order() {
    let res = mini_resources();
    let docs = mini_docs();
    let forward: Vec<_> = docs.iter().flat_map(split_sentences).map(|s| trace_sentence(s, &res).record).collect();
    let mut backward: Vec<_> = docs.iter().rev().flat_map(|d| split_sentences(d).into_iter().rev()).map(|s| trace_sentence(s, &res).record).collect();
    backward.reverse();
    assert_eq!(forward, backward);
}
