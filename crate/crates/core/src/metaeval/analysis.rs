use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tags::{PosTag, TagSet};
use crate::text::{EvaluationSet, Slot, TaggedSentence};

/// Mean number of tokens per response carrying each tag of `tags`.
pub fn pos_distribution(responses: &[TaggedSentence], tags: &TagSet) -> Result<BTreeMap<PosTag, f64>> {
    if responses.is_empty() {
        return Err(Error::InvalidArgument(
            "pos_distribution needs at least one response".into(),
        ));
    }
    let n = responses.len() as f64;
    Ok(tags
        .members()
        .map(|tag| {
            let total: usize = responses.iter().map(|r| r.count_tag(tag)).sum();
            (tag, total as f64 / n)
        })
        .collect())
}

/// `text` repeated twice with one separating space.
pub fn duplicate_text(text: &str) -> String {
    if text.is_empty() {
        String::new()
    } else {
        format!("{text} {text}")
    }
}

/// Doubles the lower-rated candidate of every set, leaving everything else
/// unchanged.
pub fn duplicate_bad(corpus: &[EvaluationSet]) -> Vec<EvaluationSet> {
    corpus
        .iter()
        .map(|set| {
            let mut out = set.clone();
            match set.bad_slot() {
                Slot::A => out.candidate_a = duplicate_text(&set.candidate_a),
                Slot::B => out.candidate_b = duplicate_text(&set.candidate_b),
            }
            out
        })
        .collect()
}
