use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IngestReport;
use crate::error::{Error, Result};
use crate::text::EvaluationSet;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    id: String,
    #[serde(default)]
    context: Vec<String>,
    reference: String,
    candidates: Vec<Candidate>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Candidate {
    text: String,
    human: f64,
}

/// One evaluation set per line:
/// `{"id", "context": [...], "reference", "candidates": [{"text", "human"}, {"text", "human"}]}`.
/// Lines with equal human scores are skipped and counted.
pub fn read_jsonl(r: impl Read, origin: &str) -> Result<IngestReport> {
    let mut report = IngestReport::default();
    for (idx, line) in BufReader::new(r).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        let [a, b] = <[Candidate; 2]>::try_from(parsed.candidates)
            .map_err(|c| Error::parse(origin, lineno, format!("expected 2 candidates, found {}", c.len())))?;
        if !a.human.is_finite() || !b.human.is_finite() {
            return Err(Error::parse(origin, lineno, "human scores must be finite"));
        }
        if a.human == b.human {
            report.skipped += 1;
            continue;
        }
        let set = EvaluationSet::new(
            parsed.id,
            parsed.context,
            parsed.reference,
            a.text,
            b.text,
            a.human,
            b.human,
        )
        .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        report.sets.push(set);
    }
    if report.sets.is_empty() {
        return Err(Error::NoEvaluationSets);
    }
    if report.skipped > 0 {
        log::warn!("{origin}: skipped {} set(s) with tied human scores", report.skipped);
    }
    Ok(report)
}

pub fn load_jsonl(path: &Path) -> Result<IngestReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(file, &path.display().to_string())
}

pub fn write_jsonl(mut w: impl Write, sets: &[EvaluationSet]) -> std::io::Result<()> {
    for set in sets {
        let line = Line {
            id: set.id.clone(),
            context: set.context.clone(),
            reference: set.reference.clone(),
            candidates: vec![
                Candidate {
                    text: set.candidate_a.clone(),
                    human: set.human_a,
                },
                Candidate {
                    text: set.candidate_b.clone(),
                    human: set.human_b,
                },
            ],
        };
        serde_json::to_writer(&mut w, &line)?;
        writeln!(w)?;
    }
    Ok(())
}
