use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{EvaluationSet, Slot};

/// Per-response scores produced by an external model (BERT-Score,
/// BERT-RUBER, ...), keyed by evaluation-set id and candidate slot.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalScoreFile {
    pub rows: BTreeMap<(String, Slot), f64>,
}

impl ExternalScoreFile {
    pub fn get(&self, set_id: &str, slot: Slot) -> Option<f64> {
        self.rows.get(&(set_id.to_string(), slot)).copied()
    }

    /// Both slots of every set in `corpus` must be present.
    pub fn validate(&self, corpus: &[EvaluationSet]) -> Result<()> {
        for set in corpus {
            for slot in [Slot::A, Slot::B] {
                if self.get(&set.id, slot).is_none() {
                    return Err(Error::InvalidArgument(format!(
                        "external scores lack set `{}` slot {slot}",
                        set.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Reads `set_id,slot,score` CSV. Errors carry the 1-based line number.
pub fn read_external_scores(r: impl Read, origin: &str) -> Result<ExternalScoreFile> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = reader.headers().map_err(|e| Error::parse(origin, 1, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["set_id", "slot", "score"] {
        return Err(Error::parse(origin, 1, "header must be `set_id,slot,score`"));
    }
    let mut out = ExternalScoreFile::default();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| Error::parse(origin, line, e.to_string()))?;
        let line = record.position().map_or(line, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(Error::parse(origin, line, "expected 3 fields"));
        }
        let slot: Slot = record[1]
            .parse()
            .map_err(|e: Error| Error::parse(origin, line, e.to_string()))?;
        let score: f64 = record[2]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(origin, line, format!("non-numeric score `{}`", &record[2])))?;
        let key = (record[0].to_string(), slot);
        if out.rows.contains_key(&key) {
            return Err(Error::parse(
                origin,
                line,
                format!("duplicate row for set `{}` slot {slot}", key.0),
            ));
        }
        out.rows.insert(key, score);
    }
    Ok(out)
}

pub fn load_external_scores(path: &Path) -> Result<ExternalScoreFile> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_external_scores(file, &path.display().to_string())
}
