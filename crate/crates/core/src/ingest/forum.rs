use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use super::IngestReport;
use crate::error::{Error, Result};
use crate::text::EvaluationSet;

#[derive(Debug, Clone, PartialEq)]
pub struct ForumAnswer {
    pub text: String,
    pub votes: u64,
    pub is_answer: bool,
    /// `votes` over the dialogue's maximum, 0 when every answer has 0 votes.
    pub normalized_vote: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForumDialogue {
    pub id: String,
    pub question: String,
    pub answers: Vec<ForumAnswer>,
}

impl ForumDialogue {
    /// Builds a dialogue from `(text, votes, is_answer)` triples and fills in
    /// the normalized votes.
    pub fn new(id: impl Into<String>, question: impl Into<String>, answers: Vec<(String, u64, bool)>) -> Self {
        let max = answers.iter().map(|a| a.1).max().unwrap_or(0);
        let answers = answers
            .into_iter()
            .map(|(text, votes, is_answer)| ForumAnswer {
                text,
                votes,
                is_answer,
                normalized_vote: if max == 0 { 0.0 } else { votes as f64 / max as f64 },
            })
            .collect();
        ForumDialogue {
            id: id.into(),
            question: question.into(),
            answers,
        }
    }
}

fn dialogue_sets(d: &ForumDialogue) -> Vec<EvaluationSet> {
    let Some(reference) = d.answers.iter().find(|a| a.is_answer) else {
        return Vec::new();
    };
    let pool: Vec<(usize, &ForumAnswer)> = d.answers.iter().enumerate().filter(|(_, a)| !a.is_answer).collect();
    let mut sets = Vec::new();
    for (x, &(i, ai)) in pool.iter().enumerate() {
        for &(j, aj) in &pool[x + 1..] {
            if ai.votes == aj.votes {
                continue;
            }
            let (good, bad) = if ai.votes > aj.votes { (ai, aj) } else { (aj, ai) };
            sets.push(
                EvaluationSet::new(
                    format!("{}-{i}-{j}", d.id),
                    vec![d.question.clone()],
                    reference.text.clone(),
                    good.text.clone(),
                    bad.text.clone(),
                    good.votes as f64,
                    bad.votes as f64,
                )
                .expect("distinct vote counts"),
            );
        }
    }
    sets
}

/// The first `is_answer` reply is the reference; every pair of the other
/// replies with distinct vote counts becomes a set with the higher-voted
/// reply in slot a and raw vote counts as human scores. Dialogues that
/// yield no set are counted as skipped.
///
/// With `sample`, a reservoir sample of that many sets is drawn under
/// `seed` and returned in corpus order.
pub fn build_forum_sets(dialogues: &[ForumDialogue], sample: Option<usize>, seed: u64) -> IngestReport {
    let mut report = IngestReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reservoir: Vec<(usize, EvaluationSet)> = Vec::new();
    let mut seen = 0usize;
    for d in dialogues {
        let sets = dialogue_sets(d);
        if sets.is_empty() {
            report.skipped += 1;
        }
        for set in sets {
            match sample {
                None => report.sets.push(set),
                Some(k) if reservoir.len() < k => reservoir.push((seen, set)),
                Some(k) => {
                    let r = rng.random_range(0..=seen);
                    if r < k {
                        reservoir[r] = (seen, set);
                    }
                }
            }
            seen += 1;
        }
    }
    if sample.is_some() {
        reservoir.sort_by_key(|(i, _)| *i);
        report.sets = reservoir.into_iter().map(|(_, s)| s).collect();
    }
    report
}

/// One bin of the normalized-vote histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteBin {
    pub lower: f64,
    pub upper: f64,
    pub answers: usize,
    pub ground_truth: usize,
    /// `ground_truth / answers`, 0 for an empty bin.
    pub proportion: f64,
}

pub const VOTE_BINS: usize = 10;

/// Fraction of `is_answer` replies per equal-width normalized-vote bin.
/// The last bin is closed so that 1.0 lands in it.
pub fn vote_gt_curve(dialogues: &[ForumDialogue]) -> Vec<VoteBin> {
    let mut counts = [(0usize, 0usize); VOTE_BINS];
    for a in dialogues.iter().flat_map(|d| &d.answers) {
        let b = ((a.normalized_vote * VOTE_BINS as f64) as usize).min(VOTE_BINS - 1);
        counts[b].0 += 1;
        if a.is_answer {
            counts[b].1 += 1;
        }
    }
    counts
        .iter()
        .enumerate()
        .map(|(b, &(answers, ground_truth))| VoteBin {
            lower: b as f64 / VOTE_BINS as f64,
            upper: (b + 1) as f64 / VOTE_BINS as f64,
            answers,
            ground_truth,
            proportion: if answers == 0 {
                0.0
            } else {
                ground_truth as f64 / answers as f64
            },
        })
        .collect()
}

fn as_u64(v: &Value) -> Option<u64> {
    match v {
        Value::Number(n) => n
            .as_u64()
            .or_else(|| n.as_f64().filter(|f| *f >= 0.0 && f.fract() == 0.0).map(|f| f as u64)),
        Value::String(s) => s.trim().parse().ok(),
        Value::Null => Some(0),
        _ => None,
    }
}

fn as_bool(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::Number(n) => n.as_i64().map(|i| i != 0),
        Value::String(s) => match s.trim() {
            "1" | "true" | "True" => Some(true),
            "0" | "false" | "False" | "" => Some(false),
            _ => None,
        },
        Value::Null => Some(false),
        _ => None,
    }
}

fn parse_dialogue(id: &str, v: &Value, origin: &str) -> Result<ForumDialogue> {
    let bad = |msg: String| Error::InvalidArgument(format!("{origin}: dialogue {id}: {msg}"));
    let utterances = v
        .get("utterances")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing `utterances` array".into()))?;
    let mut utterances: Vec<&Value> = utterances.iter().collect();
    // Order by `utterance_pos` when present; the sort is stable otherwise.
    utterances.sort_by_key(|u| u.get("utterance_pos").and_then(as_u64).unwrap_or(0));
    let Some((first, rest)) = utterances.split_first() else {
        return Err(bad("no utterances".into()));
    };
    let text = |u: &Value| -> Result<String> {
        u.get("utterance")
            .and_then(Value::as_str)
            .map(String::from)
            .ok_or_else(|| bad("utterance without text".into()))
    };
    let question = text(first)?;
    let mut answers = Vec::new();
    for u in rest {
        let is_answer = match u.get("is_answer") {
            Some(x) => as_bool(x).ok_or_else(|| bad(format!("bad is_answer value {x}")))?,
            None => false,
        };
        let from_agent = u
            .get("actor_type")
            .and_then(Value::as_str)
            .is_none_or(|a| !a.eq_ignore_ascii_case("user"));
        if !(from_agent || is_answer) {
            continue;
        }
        let votes = match u.get("vote") {
            Some(x) => as_u64(x).ok_or_else(|| bad(format!("bad vote value {x}")))?,
            None => 0,
        };
        answers.push((text(u)?, votes, is_answer));
    }
    Ok(ForumDialogue::new(id, question, answers))
}

/// Reads MSDialog-style JSON: an object mapping dialogue ids to
/// `{"utterances": [...]}`, or an array of such objects carrying an `id`.
/// The first utterance is the question; later utterances from the user
/// who asked are dropped unless marked `is_answer`.
pub fn read_msdialog(data: &str, origin: &str) -> Result<Vec<ForumDialogue>> {
    let root: Value = serde_json::from_str(data).map_err(|e| Error::parse(origin, e.line(), e.to_string()))?;
    match &root {
        Value::Object(map) => map.iter().map(|(id, v)| parse_dialogue(id, v, origin)).collect(),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let id = match v.get("id") {
                    Some(Value::String(s)) => s.clone(),
                    Some(Value::Number(n)) => n.to_string(),
                    _ => format!("d{i}"),
                };
                parse_dialogue(&id, v, origin)
            })
            .collect(),
        _ => Err(Error::parse(origin, 1, "expected a JSON object or array of dialogues")),
    }
}

pub fn load_msdialog(path: &Path) -> Result<Vec<ForumDialogue>> {
    let data = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_msdialog(&data, &path.display().to_string())
}
