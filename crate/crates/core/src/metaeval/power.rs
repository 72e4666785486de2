use crate::error::{Error, Result};
use crate::text::EvaluationSet;

/// Per-set record of whether the metric agreed with the human preference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementVector {
    pub set_ids: Vec<String>,
    pub correct: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub metric_id: String,
    pub power: f64,
    pub total: usize,
    pub correct: usize,
}

/// Fraction of sets where the metric's score difference has the same sign
/// as the human score difference.
///
/// `scores[i]` holds the metric scores of `corpus[i]`'s candidates `a` and
/// `b`. A metric tie counts toward the total but is never correct: only a
/// strictly positive product of differences agrees.
pub fn predictive_power(
    metric_id: &str,
    corpus: &[EvaluationSet],
    scores: &[(f64, f64)],
) -> Result<(PowerResult, AgreementVector)> {
    if corpus.is_empty() {
        return Err(Error::NoEvaluationSets);
    }
    if scores.len() != corpus.len() {
        return Err(Error::DimensionMismatch {
            expected: corpus.len(),
            got: scores.len(),
        });
    }
    let mut agreement = AgreementVector {
        set_ids: Vec::with_capacity(corpus.len()),
        correct: Vec::with_capacity(corpus.len()),
    };
    for (set, &(a, b)) in corpus.iter().zip(scores) {
        let metric_delta = a - b;
        let human_delta = set.human_a - set.human_b;
        agreement.set_ids.push(set.id.clone());
        agreement.correct.push(metric_delta * human_delta > 0.0);
    }
    let correct = agreement.correct.iter().filter(|c| **c).count();
    let total = corpus.len();
    Ok((
        PowerResult {
            metric_id: metric_id.to_string(),
            power: correct as f64 / total as f64,
            total,
            correct,
        },
        agreement,
    ))
}
