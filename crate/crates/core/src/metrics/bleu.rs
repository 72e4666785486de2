use std::collections::HashMap;

use super::MetricScore;
use crate::error::{Error, Result};
use crate::text::Token;

/// Floor applied to a zero clipped n-gram count.
pub const BLEU_EPSILON: f64 = 1e-9;

fn ngram_counts<'a>(words: &'a [&'a str], k: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    if words.len() >= k {
        for gram in words.windows(k) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Sentence-level BLEU with uniform weights over orders `1..=n`.
///
/// Each order's precision is `max(clipped, ε) / max(total, 1)`, so a
/// candidate without any match of some order scores tiny rather than zero.
/// The brevity penalty is `min(1, exp(1 - |ref| / |cand|))`. An empty
/// candidate scores 0.
pub fn bleu_n(reference: &[Token], candidate: &[Token], n: u8) -> Result<MetricScore> {
    if !(1..=4).contains(&n) {
        return Err(Error::InvalidArgument(format!("BLEU order must be 1..=4, got {n}")));
    }
    let id = format!("bleu{n}");
    if candidate.is_empty() {
        return Ok(MetricScore::new(id, 0.0).with_detail("bp", 0.0));
    }
    let refs: Vec<&str> = reference.iter().map(Token::norm).collect();
    let cands: Vec<&str> = candidate.iter().map(Token::norm).collect();

    let mut score = MetricScore::new(id, 0.0);
    let mut log_sum = 0.0;
    for k in 1..=n as usize {
        let ref_counts = ngram_counts(&refs, k);
        let cand_counts = ngram_counts(&cands, k);
        let total: usize = cand_counts.values().sum();
        let clipped: usize = cand_counts
            .iter()
            .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
            .sum();
        let precision = (clipped as f64).max(BLEU_EPSILON) / total.max(1) as f64;
        score.details.insert(format!("p{k}"), precision);
        log_sum += precision.ln();
    }
    let bp = (1.0 - refs.len() as f64 / cands.len() as f64).exp().min(1.0);
    score.details.insert("bp".into(), bp);
    score.value = bp * (log_sum / f64::from(n)).exp();
    Ok(score)
}
