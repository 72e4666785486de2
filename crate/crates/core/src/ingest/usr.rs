use std::path::Path;

use serde::Deserialize;

use super::IngestReport;
use crate::error::{Error, Result};
use crate::text::EvaluationSet;

/// A response with its per-annotator overall-quality ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedResponse {
    pub text: String,
    pub quality_scores: Vec<f64>,
    pub is_reference: bool,
}

impl AnnotatedResponse {
    pub fn new(text: impl Into<String>, quality_scores: Vec<f64>, is_reference: bool) -> Result<Self> {
        let text = text.into();
        if !is_reference && quality_scores.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "response `{text}` has no quality scores"
            )));
        }
        if quality_scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "response `{text}` has a non-finite score"
            )));
        }
        Ok(AnnotatedResponse {
            text,
            quality_scores,
            is_reference,
        })
    }

    /// Mean annotator rating.
    pub fn final_score(&self) -> f64 {
        self.quality_scores.iter().sum::<f64>() / self.quality_scores.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsrContext {
    pub id: String,
    pub context: Vec<String>,
    pub reference: String,
    pub responses: Vec<AnnotatedResponse>,
}

/// One set per pair of non-reference responses whose mean ratings differ,
/// the higher-rated response in slot a. Contexts with fewer than two rated
/// responses are skipped and counted.
pub fn build_usr_sets(contexts: &[UsrContext]) -> IngestReport {
    let mut report = IngestReport::default();
    for ctx in contexts {
        let rated: Vec<(usize, &AnnotatedResponse, f64)> = ctx
            .responses
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_reference)
            .map(|(i, r)| (i, r, r.final_score()))
            .collect();
        if rated.len() < 2 {
            report.skipped += 1;
            continue;
        }
        for (x, &(i, ri, si)) in rated.iter().enumerate() {
            for &(j, rj, sj) in &rated[x + 1..] {
                if si == sj {
                    continue;
                }
                let ((good, gs), (bad, bs)) = if si > sj {
                    ((ri, si), (rj, sj))
                } else {
                    ((rj, sj), (ri, si))
                };
                let set = EvaluationSet::new(
                    format!("{}-{i}-{j}", ctx.id),
                    ctx.context.clone(),
                    ctx.reference.clone(),
                    good.text.clone(),
                    bad.text.clone(),
                    gs,
                    bs,
                )
                .expect("distinct finite scores");
                report.sets.push(set);
            }
        }
    }
    report
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StringOrList {
    One(String),
    Many(Vec<String>),
}

impl StringOrList {
    fn into_turns(self) -> Vec<String> {
        match self {
            StringOrList::One(s) => s
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect(),
            StringOrList::Many(v) => v,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Ratings {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Deserialize)]
struct RawResponse {
    #[serde(alias = "response")]
    text: String,
    #[serde(default)]
    model: Option<String>,
    #[serde(default, alias = "Overall", alias = "overall")]
    overall_quality: Option<Ratings>,
    #[serde(default)]
    is_reference: bool,
}

#[derive(Deserialize)]
struct RawContext {
    #[serde(default)]
    id: Option<String>,
    context: StringOrList,
    #[serde(default)]
    reference: Option<String>,
    responses: Vec<RawResponse>,
}

const GROUND_TRUTH_MODEL: &str = "Original Ground Truth";

/// Reads a USR-style annotation file: a JSON array of contexts. See the
/// README for the accepted fields.
pub fn read_usr(data: &str, origin: &str) -> Result<Vec<UsrContext>> {
    let raw: Vec<RawContext> = serde_json::from_str(data).map_err(|e| Error::parse(origin, e.line(), e.to_string()))?;
    let mut out = Vec::with_capacity(raw.len());
    for (idx, ctx) in raw.into_iter().enumerate() {
        let id = ctx.id.unwrap_or_else(|| format!("c{idx}"));
        let mut reference = ctx.reference;
        let mut responses = Vec::with_capacity(ctx.responses.len());
        for r in ctx.responses {
            let is_reference = r.is_reference || r.model.as_deref() == Some(GROUND_TRUTH_MODEL);
            if is_reference && reference.is_none() {
                reference = Some(r.text.clone());
            }
            let scores = match r.overall_quality {
                Some(Ratings::One(s)) => vec![s],
                Some(Ratings::Many(v)) => v,
                None => Vec::new(),
            };
            responses.push(
                AnnotatedResponse::new(r.text, scores, is_reference)
                    .map_err(|e| Error::InvalidArgument(format!("{origin}: context {id}: {e}")))?,
            );
        }
        let reference = reference
            .ok_or_else(|| Error::InvalidArgument(format!("{origin}: context {id} has no reference response")))?;
        out.push(UsrContext {
            id,
            context: ctx.context.into_turns(),
            reference,
            responses,
        });
    }
    Ok(out)
}

pub fn load_usr(path: &Path) -> Result<Vec<UsrContext>> {
    let data = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_usr(&data, &path.display().to_string())
}
