//! Reference-based baseline metrics.

mod bleu;
mod external;
mod meteor;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use bleu::{bleu_n, BLEU_EPSILON};
pub use external::{load_external_scores, read_external_scores, ExternalScoreFile};
pub use meteor::{meteor, MeteorParams, SynonymLexicon};

use crate::embed::{self, EmbeddingTable};
use crate::error::{Error, Result};
use crate::text::Token;

/// A metric value plus named components (precisions, penalties, weights).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricScore {
    pub metric_id: String,
    pub value: f64,
    pub details: BTreeMap<String, f64>,
}

impl MetricScore {
    pub fn new(metric_id: impl Into<String>, value: f64) -> Self {
        MetricScore {
            metric_id: metric_id.into(),
            value,
            details: BTreeMap::new(),
        }
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

/// Metrics that PWE and PTLC can wrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseMetric {
    Bleu(u8),
    Meteor,
    Ea,
}

impl BaseMetric {
    pub const ALL: [BaseMetric; 6] = [
        BaseMetric::Bleu(1),
        BaseMetric::Bleu(2),
        BaseMetric::Bleu(3),
        BaseMetric::Bleu(4),
        BaseMetric::Meteor,
        BaseMetric::Ea,
    ];

    /// Exact-match metrics take the concatenated words-plus-tags input in
    /// PTLC.
    pub fn is_hard_matching(self) -> bool {
        matches!(self, BaseMetric::Bleu(_))
    }

    pub fn needs_embeddings(self) -> bool {
        self == BaseMetric::Ea
    }
}

impl fmt::Display for BaseMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseMetric::Bleu(n) => write!(f, "bleu{n}"),
            BaseMetric::Meteor => f.write_str("meteor"),
            BaseMetric::Ea => f.write_str("ea"),
        }
    }
}

impl FromStr for BaseMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bleu1" => Ok(BaseMetric::Bleu(1)),
            "bleu2" => Ok(BaseMetric::Bleu(2)),
            "bleu3" => Ok(BaseMetric::Bleu(3)),
            "bleu4" => Ok(BaseMetric::Bleu(4)),
            "meteor" => Ok(BaseMetric::Meteor),
            "ea" => Ok(BaseMetric::Ea),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }
}

/// Shared resources for computing base metrics.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetricContext<'a> {
    pub embeddings: Option<&'a EmbeddingTable>,
    pub synonyms: Option<&'a SynonymLexicon>,
}

impl<'a> MetricContext<'a> {
    pub fn compute(&self, metric: BaseMetric, reference: &[Token], candidate: &[Token]) -> Result<MetricScore> {
        match metric {
            BaseMetric::Bleu(n) => bleu_n(reference, candidate, n),
            BaseMetric::Meteor => Ok(meteor(reference, candidate, self.synonyms)),
            BaseMetric::Ea => {
                let table = self
                    .embeddings
                    .ok_or_else(|| Error::MissingResource("ea requires embeddings (--embeddings)".into()))?;
                Ok(embedding_average(reference, candidate, table))
            }
        }
    }
}

/// Cosine between the mean word vectors of the two sentences.
pub fn embedding_average(reference: &[Token], candidate: &[Token], table: &EmbeddingTable) -> MetricScore {
    MetricScore::new("ea", embed::similarity(reference, candidate, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    #[test]
    fn embedding_average_examples() {
        let t = EmbeddingTable::from_pairs(2, [("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])]).unwrap();
        let same = embedding_average(&tokenize("a b"), &tokenize("a b"), &t);
        assert!((same.value - 1.0).abs() < 1e-12);
        let half = embedding_average(&tokenize("a"), &tokenize("a b"), &t);
        assert!((half.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert_eq!(embedding_average(&tokenize("a"), &tokenize("zz"), &t).value, 0.0);
    }

    #[test]
    fn base_metric_ids_round_trip() {
        for m in BaseMetric::ALL {
            assert_eq!(m.to_string().parse::<BaseMetric>().unwrap(), m);
        }
        assert!("bleu5".parse::<BaseMetric>().is_err());
    }

    #[test]
    fn ea_without_table_is_an_error() {
        let ctx = MetricContext::default();
        assert!(ctx.compute(BaseMetric::Ea, &tokenize("a"), &tokenize("a")).is_err());
    }
}
