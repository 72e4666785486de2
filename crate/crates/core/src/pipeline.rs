//! Corpus-level scoring shared by the CLI and the C interface.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;

use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::metaeval::{bonferroni, kendall_matrix, paired_ttest, predictive_power, AgreementVector, PowerResult};
use crate::metrics::{BaseMetric, ExternalScoreFile, MetricContext, SynonymLexicon};
use crate::posmetrics::{posscore, posscore_id, ptlc, pwe, PosOptions};
use crate::tagger::{TaggedDocument, TaggerModel};
use crate::tags::{PosTag, TagSet};
use crate::text::{detokenize, tokenize, EvaluationSet, Slot, TaggedSentence, Token};

/// A metric requested by id.
///
/// Ids: `bleu1`..`bleu4`, `meteor`, `ea`, `posscore[:TAGS]`,
/// `pwe:BASE[:TAGS]`, `ptlc:BASE[:TAGS]` and `ext:NAME` for a loaded
/// external score file. Omitted tag sets take the run's default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricSpec {
    Base(BaseMetric),
    PosScore(TagSet),
    Pwe(BaseMetric, TagSet),
    Ptlc(BaseMetric, TagSet),
    External(String),
}

impl MetricSpec {
    pub fn parse(id: &str, default_tags: &TagSet) -> Result<MetricSpec> {
        let id = id.trim();
        let (head, rest) = match id.split_once(':') {
            Some((h, r)) => (h.to_ascii_lowercase(), Some(r)),
            None => (id.to_ascii_lowercase(), None),
        };
        let tagset = |s: Option<&str>| -> Result<TagSet> {
            match s {
                Some(t) => t.parse(),
                None => Ok(default_tags.clone()),
            }
        };
        match (head.as_str(), rest) {
            ("posscore", r) => Ok(MetricSpec::PosScore(tagset(r)?)),
            ("pwe" | "ptlc", Some(r)) => {
                let (base, tags) = match r.split_once(':') {
                    Some((b, t)) => (b, Some(t)),
                    None => (r, None),
                };
                let base: BaseMetric = base.parse()?;
                let tags = tagset(tags)?;
                Ok(if head == "pwe" {
                    MetricSpec::Pwe(base, tags)
                } else {
                    MetricSpec::Ptlc(base, tags)
                })
            }
            ("ext", Some(name)) if !name.is_empty() => Ok(MetricSpec::External(name.to_string())),
            (_, None) => Ok(MetricSpec::Base(head.parse()?)),
            _ => Err(Error::UnknownMetric(id.to_string())),
        }
    }

    /// Parses a comma-separated list, dropping duplicate ids.
    pub fn parse_list(list: &str, default_tags: &TagSet) -> Result<Vec<MetricSpec>> {
        let mut out: Vec<MetricSpec> = Vec::new();
        for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let spec = MetricSpec::parse(part, default_tags)?;
            if !out.iter().any(|s| s.id() == spec.id()) {
                out.push(spec);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("no metrics requested".into()));
        }
        Ok(out)
    }

    pub fn id(&self) -> String {
        match self {
            MetricSpec::Base(b) => b.to_string(),
            MetricSpec::PosScore(t) => posscore_id(t),
            MetricSpec::Pwe(b, t) => format!("pwe:{b}:{t}"),
            MetricSpec::Ptlc(b, t) => format!("ptlc:{b}:{t}"),
            MetricSpec::External(name) => format!("ext:{name}"),
        }
    }

    pub fn tagset(&self) -> Option<&TagSet> {
        match self {
            MetricSpec::PosScore(t) | MetricSpec::Pwe(_, t) | MetricSpec::Ptlc(_, t) => Some(t),
            _ => None,
        }
    }

    pub fn needs_tags(&self) -> bool {
        self.tagset().is_some()
    }

    pub fn needs_embeddings(&self) -> bool {
        match self {
            MetricSpec::Base(b) | MetricSpec::Pwe(b, _) | MetricSpec::Ptlc(b, _) => b.needs_embeddings(),
            MetricSpec::PosScore(_) => true,
            MetricSpec::External(_) => false,
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Maps response texts to tagged sentences, from a pre-tagged file first
/// and a tagger model second.
#[derive(Debug, Clone, Default)]
pub struct TagSource {
    pretagged: HashMap<String, TaggedSentence>,
    model: Option<TaggerModel>,
    /// Fold AUX into VERB, matching taggers that do not separate them.
    pub aux_as_verb: bool,
}

impl TagSource {
    /// Each document is keyed by its `# text` line and by its space-joined
    /// surfaces. The first document wins on a clash.
    pub fn new(documents: Vec<TaggedDocument>, model: Option<TaggerModel>, aux_as_verb: bool) -> TagSource {
        let mut pretagged = HashMap::new();
        for doc in documents {
            let surfaces = detokenize(&doc.sentence.tokens());
            if let Some(text) = &doc.text {
                pretagged
                    .entry(text.trim().to_string())
                    .or_insert_with(|| doc.sentence.clone());
                pretagged
                    .entry(detokenize(&tokenize(text)))
                    .or_insert_with(|| doc.sentence.clone());
            }
            pretagged.entry(surfaces).or_insert(doc.sentence);
        }
        TagSource {
            pretagged,
            model,
            aux_as_verb,
        }
    }

    pub fn has_model(&self) -> bool {
        self.model.is_some()
    }

    pub fn lookup(&self, text: &str) -> Result<TaggedSentence> {
        let tokens = tokenize(text);
        let found = if tokens.is_empty() {
            Some(TaggedSentence::default())
        } else {
            self.pretagged
                .get(text.trim())
                .or_else(|| self.pretagged.get(&detokenize(&tokens)))
                .cloned()
                .or_else(|| self.model.as_ref().map(|m| m.tag(&tokens)))
        };
        let sentence = found.ok_or_else(|| {
            Error::MissingResource(format!(
                "no tags for response `{text}`; add it to --tags or pass --tagger-model"
            ))
        })?;
        Ok(if self.aux_as_verb {
            sentence.remap(PosTag::Aux, PosTag::Verb)
        } else {
            sentence
        })
    }
}

/// A response tokenized for the base metrics and, when tags are needed,
/// tagged for the POS metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedText {
    pub tokens: Vec<Token>,
    pub tagged: Option<TaggedSentence>,
}

impl PreparedText {
    fn new(text: &str, tags: Option<&TagSource>) -> Result<PreparedText> {
        Ok(PreparedText {
            tokens: tokenize(text),
            tagged: tags.map(|t| t.lookup(text)).transpose()?,
        })
    }

    fn doubled(&self) -> PreparedText {
        let mut tokens = self.tokens.clone();
        tokens.extend_from_slice(&self.tokens);
        PreparedText {
            tokens,
            tagged: self.tagged.as_ref().map(TaggedSentence::doubled),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSet {
    pub set: EvaluationSet,
    pub reference: PreparedText,
    pub a: PreparedText,
    pub b: PreparedText,
}

impl PreparedSet {
    pub fn candidate(&self, slot: Slot) -> &PreparedText {
        match slot {
            Slot::A => &self.a,
            Slot::B => &self.b,
        }
    }
}

pub fn prepare(corpus: &[EvaluationSet], tags: Option<&TagSource>) -> Result<Vec<PreparedSet>> {
    corpus
        .par_iter()
        .map(|set| {
            Ok(PreparedSet {
                reference: PreparedText::new(&set.reference, tags)?,
                a: PreparedText::new(&set.candidate_a, tags)?,
                b: PreparedText::new(&set.candidate_b, tags)?,
                set: set.clone(),
            })
        })
        .collect()
}

/// Repeats the lower-rated candidate of every set twice, in its text,
/// tokens and tags alike.
pub fn duplicate_bad_prepared(sets: &[PreparedSet]) -> Vec<PreparedSet> {
    let texts = crate::metaeval::duplicate_bad(&sets.iter().map(|p| p.set.clone()).collect::<Vec<_>>());
    sets.iter()
        .zip(texts)
        .map(|(p, set)| {
            let mut out = p.clone();
            match p.set.bad_slot() {
                Slot::A => out.a = p.a.doubled(),
                Slot::B => out.b = p.b.doubled(),
            }
            out.set = set;
            out
        })
        .collect()
}

/// Everything a metric may need besides the texts.
#[derive(Debug, Default)]
pub struct Resources {
    pub embeddings: Option<EmbeddingTable>,
    pub synonyms: Option<SynonymLexicon>,
    pub externals: BTreeMap<String, ExternalScoreFile>,
    pub pos_options: PosOptions,
}

impl Resources {
    fn context(&self) -> MetricContext<'_> {
        MetricContext {
            embeddings: self.embeddings.as_ref(),
            synonyms: self.synonyms.as_ref(),
        }
    }

    /// Checks that every requested metric has what it needs. `has_tags`
    /// says whether a tag source is configured.
    pub fn check(&self, specs: &[MetricSpec], has_tags: bool) -> Result<()> {
        for spec in specs {
            if spec.needs_embeddings() && self.embeddings.is_none() {
                return Err(Error::MissingResource(format!("{} requires --embeddings", spec.id())));
            }
            if spec.needs_tags() && !has_tags {
                return Err(Error::MissingResource(format!(
                    "{} requires --tags or --tagger-model",
                    spec.id()
                )));
            }
            if let MetricSpec::External(name) = spec {
                if !self.externals.contains_key(name) {
                    return Err(Error::MissingResource(format!(
                        "{} requires --external-scores {name}=PATH",
                        spec.id()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn score(&self, spec: &MetricSpec, set: &PreparedSet, slot: Slot) -> Result<f64> {
        let reference = &set.reference;
        let candidate = set.candidate(slot);
        fn tagged<'p>(p: &'p PreparedText, spec: &MetricSpec) -> Result<&'p TaggedSentence> {
            p.tagged
                .as_ref()
                .ok_or_else(|| Error::MissingResource(format!("{} requires --tags or --tagger-model", spec.id())))
        }
        let ctx = self.context();
        match spec {
            MetricSpec::Base(b) => Ok(ctx.compute(*b, &reference.tokens, &candidate.tokens)?.value),
            MetricSpec::PosScore(tags) => {
                let table = self
                    .embeddings
                    .as_ref()
                    .ok_or_else(|| Error::MissingResource(format!("{} requires --embeddings", spec.id())))?;
                Ok(posscore(
                    tagged(reference, spec)?,
                    tagged(candidate, spec)?,
                    tags,
                    table,
                    self.pos_options,
                )
                .value)
            }
            MetricSpec::Pwe(b, tags) => {
                Ok(pwe(tagged(reference, spec)?, tagged(candidate, spec)?, tags, *b, &ctx)?.value)
            }
            MetricSpec::Ptlc(b, tags) => {
                Ok(ptlc(tagged(reference, spec)?, tagged(candidate, spec)?, tags, *b, &ctx)?.value)
            }
            MetricSpec::External(name) => self
                .externals
                .get(name)
                .and_then(|f| f.get(&set.set.id, slot))
                .ok_or_else(|| {
                    Error::MissingResource(format!("{}: no score for set `{}` slot {slot}", spec.id(), set.set.id))
                }),
        }
    }
}

/// Scores of every metric on every set, `scores[metric][set] = (a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub metric_ids: Vec<String>,
    pub scores: Vec<Vec<(f64, f64)>>,
}

impl ScoreMatrix {
    pub fn column(&self, metric_id: &str) -> Option<&[(f64, f64)]> {
        self.metric_ids
            .iter()
            .position(|m| m == metric_id)
            .map(|i| self.scores[i].as_slice())
    }
}

/// Scores all sets in parallel; the result does not depend on scheduling.
pub fn score_corpus(sets: &[PreparedSet], specs: &[MetricSpec], resources: &Resources) -> Result<ScoreMatrix> {
    let per_set: Vec<Vec<(f64, f64)>> = sets
        .par_iter()
        .map(|set| {
            specs
                .iter()
                .map(|spec| {
                    Ok((
                        resources.score(spec, set, Slot::A)?,
                        resources.score(spec, set, Slot::B)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let scores = (0..specs.len())
        .map(|m| per_set.iter().map(|row| row[m]).collect())
        .collect();
    Ok(ScoreMatrix {
        metric_ids: specs.iter().map(MetricSpec::id).collect(),
        scores,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRow {
    pub power: PowerResult,
    pub tagset: Option<String>,
    pub p_vs_baseline: Option<f64>,
    pub p_bonferroni: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub rows: Vec<EvaluationRow>,
    pub baseline: Option<String>,
}

/// Predictive power of every metric plus a paired t-test of each against a
/// baseline. Without an explicit baseline the strongest base metric
/// (BLEU, METEOR, EA) among `specs` is used, the first on a tie. The
/// Bonferroni factor is the number of metrics compared with the baseline.
pub fn evaluate(
    corpus: &[EvaluationSet],
    specs: &[MetricSpec],
    matrix: &ScoreMatrix,
    baseline: Option<&str>,
) -> Result<EvaluationReport> {
    let mut results: Vec<(PowerResult, AgreementVector)> = Vec::with_capacity(specs.len());
    for (id, column) in matrix.metric_ids.iter().zip(&matrix.scores) {
        results.push(predictive_power(id, corpus, column)?);
    }
    let baseline_idx = match baseline {
        Some(b) => Some(
            matrix
                .metric_ids
                .iter()
                .position(|m| m == b)
                .ok_or_else(|| Error::InvalidArgument(format!("baseline `{b}` is not among the scored metrics")))?,
        ),
        None => {
            let mut best: Option<usize> = None;
            for (i, spec) in specs.iter().enumerate() {
                if matches!(spec, MetricSpec::Base(_)) && best.is_none_or(|b| results[i].0.power > results[b].0.power) {
                    best = Some(i);
                }
            }
            best
        }
    };
    let comparisons = results.len() - usize::from(baseline_idx.is_some());
    let mut rows = Vec::with_capacity(results.len());
    for (i, (power, agreement)) in results.iter().enumerate() {
        let p = match baseline_idx {
            Some(b) if b != i => match paired_ttest(agreement, &results[b].1) {
                Ok(p) => Some(p),
                Err(Error::InsufficientPairs) => None,
                Err(e) => return Err(e),
            },
            _ => None,
        };
        rows.push(EvaluationRow {
            power: power.clone(),
            tagset: specs.get(i).and_then(|s| s.tagset()).map(|t| t.name().to_string()),
            p_vs_baseline: p,
            p_bonferroni: p.map(|p| bonferroni(p, comparisons)),
        });
    }
    Ok(EvaluationReport {
        rows,
        baseline: baseline_idx.map(|b| matrix.metric_ids[b].clone()),
    })
}

/// Kendall tau-b between metrics over all individual responses (both
/// candidates of every set). `None` marks a metric that is constant.
pub fn correlate(matrix: &ScoreMatrix) -> Result<Vec<Vec<Option<f64>>>> {
    let columns: Vec<Vec<f64>> = matrix
        .scores
        .iter()
        .map(|col| col.iter().flat_map(|&(a, b)| [a, b]).collect())
        .collect();
    kendall_matrix(&columns)
}
