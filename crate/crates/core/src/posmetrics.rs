//! POS-aware metrics: POS word extraction (PWE), POS tag linear combination
//! (PTLC) and POSSCORE.
//!
//! POSSCORE splits each response into words whose tag is in the active
//! [`TagSet`] ("POS words") and the rest, and scores
//!
//! ```text
//! w * S(ref_pos, cand_pos) + S(ref_rest, cand_rest),   w = exp(1 - n_ref / n_cand)
//! ```
//!
//! where `S` is the cosine of average embeddings and `n_*` is the fraction
//! of a response's tokens that are POS words.

use crate::embed::{self, EmbeddingTable};
use crate::error::{Error, Result};
use crate::metrics::{bleu_n, BaseMetric, MetricContext, MetricScore};
use crate::tags::{PosTag, TagSet};
use crate::text::{partition, TaggedSentence, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PosOptions {
    /// Whether PUNCT tokens count toward the response length used for POS
    /// fractions.
    pub count_punct: bool,
}

impl Default for PosOptions {
    fn default() -> Self {
        PosOptions { count_punct: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosSplit {
    pub pos_words: Vec<Token>,
    pub pos_tags: Vec<PosTag>,
    pub non_pos_words: Vec<Token>,
    pub total_len: usize,
    pub pos_fraction: f64,
}

impl PosSplit {
    pub fn new(sentence: &TaggedSentence, tags: &TagSet, options: PosOptions) -> PosSplit {
        let parts = partition(sentence, tags);
        let total_len = if options.count_punct {
            sentence.len()
        } else {
            sentence.len() - sentence.count_tag(PosTag::Punct)
        };
        let pos_fraction = if total_len > 0 {
            (parts.pos_words.len() as f64 / total_len as f64).min(1.0)
        } else {
            0.0
        };
        PosSplit {
            pos_words: parts.pos_words,
            pos_tags: parts.pos_tags,
            non_pos_words: parts.non_pos_words,
            total_len,
            pos_fraction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PosWeight {
    pub value: f64,
    /// Set when the candidate has no POS words and a limit convention was
    /// used instead of the closed form.
    pub degenerate: bool,
}

/// `exp(1 - n_ref / n_cand)`.
///
/// For `n_cand = 0` the closed form is undefined; the limits are used: 0
/// when `n_ref > 0`, and 1 (neutral) when both are 0.
pub fn pos_weight(n_ref: f64, n_cand: f64) -> Result<PosWeight> {
    for (name, v) in [("n_ref", n_ref), ("n_cand", n_cand)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    if n_cand > 0.0 {
        return Ok(PosWeight {
            value: (1.0 - n_ref / n_cand).exp(),
            degenerate: false,
        });
    }
    Ok(PosWeight {
        value: if n_ref > 0.0 { 0.0 } else { 1.0 },
        degenerate: true,
    })
}

pub fn posscore(
    reference: &TaggedSentence,
    candidate: &TaggedSentence,
    tags: &TagSet,
    table: &EmbeddingTable,
    options: PosOptions,
) -> MetricScore {
    let r = PosSplit::new(reference, tags, options);
    let c = PosSplit::new(candidate, tags, options);
    let w = pos_weight(r.pos_fraction, c.pos_fraction).expect("fractions lie in [0, 1]");
    let s_pos = embed::similarity(&r.pos_words, &c.pos_words, table);
    let s_rest = embed::similarity(&r.non_pos_words, &c.non_pos_words, table);
    let mut score = MetricScore::new(posscore_id(tags), w.value * s_pos + s_rest)
        .with_detail("w", w.value)
        .with_detail("s_pos", s_pos)
        .with_detail("s_non_pos", s_rest)
        .with_detail("n_ref", r.pos_fraction)
        .with_detail("n_cand", c.pos_fraction);
    if w.degenerate {
        score.details.insert("degenerate_weight".into(), 1.0);
    }
    score
}

/// `posscore` for the recommended tag set, `posscore:<tagset>` otherwise.
pub fn posscore_id(tags: &TagSet) -> String {
    if *tags == TagSet::recommended() {
        "posscore".to_string()
    } else {
        format!("posscore:{tags}")
    }
}

/// Runs `base` on the POS words of each side.
pub fn pwe(
    reference: &TaggedSentence,
    candidate: &TaggedSentence,
    tags: &TagSet,
    base: BaseMetric,
    ctx: &MetricContext<'_>,
) -> Result<MetricScore> {
    let r = partition(reference, tags);
    let c = partition(candidate, tags);
    let inner = ctx.compute(base, &r.pos_words, &c.pos_words)?;
    Ok(MetricScore {
        metric_id: format!("pwe:{base}:{tags}"),
        value: inner.value,
        details: inner.details,
    })
}

/// Tags rendered as tokens that cannot collide with tokenizer output.
fn tag_tokens(tags: &[PosTag]) -> Vec<Token> {
    tags.iter().map(|t| Token::new(format!("<{t}>"))).collect()
}

/// PWE plus POS-tag overlap.
///
/// For BLEU the POS words and their tags are concatenated into one sequence
/// per side. For METEOR and EA the base metric scores the POS words, BLEU-1
/// scores the tag sequences, and the two are added.
pub fn ptlc(
    reference: &TaggedSentence,
    candidate: &TaggedSentence,
    tags: &TagSet,
    base: BaseMetric,
    ctx: &MetricContext<'_>,
) -> Result<MetricScore> {
    let r = partition(reference, tags);
    let c = partition(candidate, tags);
    let id = format!("ptlc:{base}:{tags}");
    if base.is_hard_matching() {
        let mut rs = r.pos_words;
        rs.extend(tag_tokens(&r.pos_tags));
        let mut cs = c.pos_words;
        cs.extend(tag_tokens(&c.pos_tags));
        let inner = ctx.compute(base, &rs, &cs)?;
        return Ok(MetricScore {
            metric_id: id,
            value: inner.value,
            details: inner.details,
        });
    }
    let text = ctx.compute(base, &r.pos_words, &c.pos_words)?.value;
    let tag = bleu_n(&tag_tokens(&r.pos_tags), &tag_tokens(&c.pos_tags), 1)?.value;
    Ok(MetricScore::new(id, text + tag)
        .with_detail("pos_text_score", text)
        .with_detail("pos_tag_score", tag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::MetricContext;
    use PosTag::*;

    fn toy() -> EmbeddingTable {
        EmbeddingTable::from_pairs(2, [("a", vec![1.0, 0.0]), ("b", vec![0.0, 1.0])]).unwrap()
    }

    fn noun_propn() -> TagSet {
        "PROPN+NOUN".parse().unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(pos_weight(0.5, 0.5).unwrap().value, 1.0);
        assert!((pos_weight(0.4, 0.8).unwrap().value - 1.6487).abs() < 1e-4);
        let w = pos_weight(0.6, 0.0).unwrap();
        assert_eq!(w.value, 0.0);
        assert!(w.degenerate);
        assert_eq!(pos_weight(0.0, 0.0).unwrap().value, 1.0);
        assert_eq!(pos_weight(0.0, 0.3).unwrap().value, std::f64::consts::E);
        assert!(pos_weight(1.5, 0.2).is_err());
        assert!(pos_weight(0.2, -0.1).is_err());
        assert!(pos_weight(f64::NAN, 0.2).is_err());
    }

    #[test]
    fn posscore_closed_form() {
        let r = TaggedSentence::from_pairs([("a", Noun), ("b", Det)]);
        let c = TaggedSentence::from_pairs([("a", Noun), ("a", Noun)]);
        let s = posscore(&r, &c, &noun_propn(), &toy(), PosOptions::default());
        assert!((s.value - 1.6487).abs() < 1e-4);
        assert_eq!(s.details["n_ref"], 0.5);
        assert_eq!(s.details["n_cand"], 1.0);
        assert_eq!(s.details["s_pos"], 1.0);
        assert_eq!(s.details["s_non_pos"], 0.0);
    }

    #[test]
    fn posscore_identity_and_empty_pos() {
        let x = TaggedSentence::from_pairs([("a", Noun), ("b", Det)]);
        let s = posscore(&x, &x, &noun_propn(), &toy(), PosOptions::default());
        assert_eq!(s.value, 2.0);

        let r = TaggedSentence::from_pairs([("a", Det), ("b", Det)]);
        let c = TaggedSentence::from_pairs([("a", Det)]);
        let s = posscore(&r, &c, &noun_propn(), &toy(), PosOptions::default());
        assert_eq!(s.details["w"], 1.0);
        assert_eq!(s.value, s.details["s_non_pos"]);
    }

    #[test]
    fn punctuation_option_changes_denominator() {
        let x = TaggedSentence::from_pairs([("a", Noun), (".", Punct)]);
        let on = PosSplit::new(&x, &noun_propn(), PosOptions { count_punct: true });
        let off = PosSplit::new(&x, &noun_propn(), PosOptions { count_punct: false });
        assert_eq!(on.pos_fraction, 0.5);
        assert_eq!(off.pos_fraction, 1.0);
        assert_eq!(off.non_pos_words.len(), 1);
    }

    fn table3() -> TaggedSentence {
        TaggedSentence::from_pairs([
            ("it", Pron),
            ("is", Verb),
            ("from", Adp),
            ("our", Pron),
            ("evolution", Noun),
            ("when", Sconj),
            ("land", Noun),
            ("animals", Noun),
            ("had", Verb),
            ("both", Conj),
            ("gills", Noun),
            ("and", Conj),
            ("lungs", Noun),
        ])
    }

    #[test]
    fn pwe_examples() {
        let ctx = MetricContext::default();
        let nv = TagSet::new("NOUN+VERB", &[Noun, Verb]).unwrap();
        let empty = TaggedSentence::from_pairs([("the", Det)]);
        let s = pwe(&empty, &empty, &nv, BaseMetric::Bleu(1), &ctx).unwrap();
        assert_eq!(s.value, 0.0);

        let full = table3();
        let shorter = TaggedSentence::new(full.iter().filter(|t| t.token.surface() != "gills").cloned().collect());
        let s = pwe(&full, &shorter, &nv, BaseMetric::Bleu(1), &ctx).unwrap();
        assert!((s.value - (1.0f64 - 7.0 / 6.0).exp()).abs() < 1e-12);
        assert!((s.value - 0.846).abs() < 1e-3);
        assert_eq!(s.metric_id, "pwe:bleu1:NOUN+VERB");
    }

    #[test]
    fn pwe_ea_identity() {
        let table = toy();
        let ctx = MetricContext {
            embeddings: Some(&table),
            synonyms: None,
        };
        let x = TaggedSentence::from_pairs([("a", Noun), ("b", Adj)]);
        let s = pwe(&x, &x, &TagSet::all_adopted(), BaseMetric::Ea, &ctx).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ptlc_examples() {
        let table = toy();
        let ctx = MetricContext {
            embeddings: Some(&table),
            synonyms: None,
        };
        let x = TaggedSentence::from_pairs([("a", Noun), ("b", Verb), ("the", Det)]);
        let all = TagSet::all_adopted();
        let soft = ptlc(&x, &x, &all, BaseMetric::Ea, &ctx).unwrap();
        assert!((soft.value - 2.0).abs() < 1e-12);
        let hard = ptlc(&x, &x, &all, BaseMetric::Bleu(1), &ctx).unwrap();
        assert_eq!(hard.value, 1.0);

        let r = TaggedSentence::from_pairs([("a", Verb), ("a", Noun), ("a", Noun)]);
        let c = TaggedSentence::from_pairs([("a", Noun), ("a", Noun)]);
        let s = ptlc(&r, &c, &all, BaseMetric::Ea, &ctx).unwrap();
        assert!((s.details["pos_text_score"] - 1.0).abs() < 1e-12);
        assert!((s.value - (1.0 + (1.0f64 - 1.5).exp())).abs() < 1e-12);
        assert!((s.value - 1.6065).abs() < 1e-3);
    }

    #[test]
    fn hard_ptlc_sequence_is_words_then_tags() {
        // Candidate with the right words but the wrong tags loses exactly the
        // tag half of the unigram matches.
        let ctx = MetricContext::default();
        let r = TaggedSentence::from_pairs([("run", Verb), ("fast", Adv)]);
        let c = TaggedSentence::from_pairs([("run", Noun), ("fast", Adj)]);
        let s = ptlc(&r, &c, &TagSet::all_adopted(), BaseMetric::Bleu(1), &ctx).unwrap();
        assert_eq!(s.details["p1"], 0.5);
    }
}
