use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use super::MetricScore;
use crate::error::{Error, Result};
use crate::text::Token;

/// Weights for the harmonic mean and the fragmentation penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeteorParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for MeteorParams {
    fn default() -> Self {
        MeteorParams {
            alpha: 0.9,
            beta: 3.0,
            gamma: 0.5,
        }
    }
}

/// Symmetric synonym relation read from `lemma<TAB>synonym` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    pairs: HashMap<String, HashSet<String>>,
}

impl SynonymLexicon {
    pub fn insert(&mut self, a: &str, b: &str) {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        self.pairs.entry(a.clone()).or_default().insert(b.clone());
        self.pairs.entry(b).or_default().insert(a);
    }

    pub fn are_synonyms(&self, a: &str, b: &str) -> bool {
        self.pairs.get(a).is_some_and(|s| s.contains(b))
    }

    pub fn read(r: impl Read, origin: &str) -> Result<Self> {
        let mut lex = SynonymLexicon::default();
        for (idx, line) in BufReader::new(r).lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split('\t').map(str::trim).collect::<Vec<_>>().as_slice() {
                [a, b] if !a.is_empty() && !b.is_empty() => lex.insert(a, b),
                _ => return Err(Error::parse(origin, idx + 1, "expected `lemma<TAB>synonym`")),
            }
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        SynonymLexicon::read(file, &path.display().to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MatchKind {
    Exact,
    Stem,
    Synonym,
}

/// Lexicographic alignment quality: more matches, then more adjacent
/// match pairs (fewer chunks), then more exact and stem matches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Quality {
    matches: u32,
    adjacent: u32,
    exact: u32,
    stem: u32,
}

/// Memo entries allowed before falling back to greedy alignment.
const STATE_BUDGET: usize = 250_000;

#[derive(Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn set(&mut self, i: usize, v: bool) {
        if v {
            self.0[i / 64] |= 1 << (i % 64);
        } else {
            self.0[i / 64] &= !(1 << (i % 64));
        }
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
}

struct Aligner {
    /// Matchable reference positions per candidate position, by stage.
    edges: Vec<Vec<(usize, MatchKind)>>,
    /// References still matchable from candidate position `i` onwards.
    live: Vec<Bits>,
    memo: HashMap<(usize, Option<usize>, Bits), Quality>,
    exhausted: bool,
}

impl Aligner {
    fn new(edges: Vec<Vec<(usize, MatchKind)>>, ref_len: usize) -> Aligner {
        let n = edges.len();
        let mut live = vec![Bits::new(ref_len); n + 1];
        for i in (0..n).rev() {
            live[i] = live[i + 1].clone();
            for &(j, _) in &edges[i] {
                live[i].set(j, true);
            }
        }
        Aligner {
            edges,
            live,
            memo: HashMap::new(),
            exhausted: false,
        }
    }

    fn best(&mut self, i: usize, prev: Option<usize>, used: &mut Bits) -> Quality {
        if i == self.edges.len() || self.exhausted {
            return Quality::default();
        }
        // `prev` only matters if it can extend a chunk at this position.
        let prev = prev.filter(|&p| self.edges[i].iter().any(|&(j, _)| j == p + 1));
        let key = (i, prev, used.and(&self.live[i]));
        if let Some(q) = self.memo.get(&key) {
            return *q;
        }
        let mut best = self.best(i + 1, None, used);
        for e in 0..self.edges[i].len() {
            let (j, kind) = self.edges[i][e];
            if used.get(j) {
                continue;
            }
            used.set(j, true);
            let mut q = self.best(i + 1, Some(j), used);
            used.set(j, false);
            q.matches += 1;
            if prev.is_some_and(|p| p + 1 == j) {
                q.adjacent += 1;
            }
            match kind {
                MatchKind::Exact => q.exact += 1,
                MatchKind::Stem => q.stem += 1,
                MatchKind::Synonym => {}
            }
            best = best.max(q);
        }
        if self.memo.len() >= STATE_BUDGET {
            self.exhausted = true;
        }
        self.memo.insert(key, best);
        best
    }

    /// Left-to-right alignment preferring chunk continuation, then the
    /// earliest free reference.
    fn greedy(&self, ref_len: usize) -> Quality {
        let mut used = Bits::new(ref_len);
        let mut q = Quality::default();
        let mut prev: Option<usize> = None;
        for edges in &self.edges {
            let free = |&&(j, _): &&(usize, MatchKind)| !used.get(j);
            let pick = edges
                .iter()
                .filter(free)
                .find(|(j, _)| prev.is_some_and(|p| p + 1 == *j))
                .or_else(|| edges.iter().find(free))
                .copied();
            match pick {
                Some((j, kind)) => {
                    if prev.is_some_and(|p| p + 1 == j) {
                        q.adjacent += 1;
                    }
                    q.matches += 1;
                    match kind {
                        MatchKind::Exact => q.exact += 1,
                        MatchKind::Stem => q.stem += 1,
                        MatchKind::Synonym => {}
                    }
                    used.set(j, true);
                    prev = Some(j);
                }
                None => prev = None,
            }
        }
        q
    }
}

/// METEOR with default parameters (α = 0.9, β = 3, γ = 0.5).
pub fn meteor(reference: &[Token], candidate: &[Token], synonyms: Option<&SynonymLexicon>) -> MetricScore {
    meteor_with(reference, candidate, synonyms, MeteorParams::default())
}

/// METEOR over an alignment that links each candidate token to at most one
/// reference token by exact lowercase match, Porter-stem match, or
/// synonym-lexicon match. The alignment maximizes the number of matches,
/// then minimizes the number of chunks (runs contiguous in both
/// sentences).
pub fn meteor_with(
    reference: &[Token],
    candidate: &[Token],
    synonyms: Option<&SynonymLexicon>,
    params: MeteorParams,
) -> MetricScore {
    let ref_stems: Vec<String> = reference.iter().map(|t| porter_stemmer::stem(t.norm())).collect();
    let edges: Vec<Vec<(usize, MatchKind)>> = candidate
        .iter()
        .map(|c| {
            let stem = porter_stemmer::stem(c.norm());
            reference
                .iter()
                .enumerate()
                .filter_map(|(j, r)| {
                    if r.norm() == c.norm() {
                        Some((j, MatchKind::Exact))
                    } else if ref_stems[j] == stem {
                        Some((j, MatchKind::Stem))
                    } else if synonyms.is_some_and(|s| s.are_synonyms(c.norm(), r.norm())) {
                        Some((j, MatchKind::Synonym))
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    let mut aligner = Aligner::new(edges, reference.len());
    let mut used = Bits::new(reference.len());
    let mut quality = aligner.best(0, None, &mut used);
    let approximate = aligner.exhausted;
    if approximate {
        log::warn!("METEOR alignment search exceeded its state budget; using greedy alignment");
        quality = aligner.greedy(reference.len());
    }

    let mut score = MetricScore::new("meteor", 0.0)
        .with_detail("matches", f64::from(quality.matches))
        .with_detail("exact", f64::from(quality.exact))
        .with_detail("stem", f64::from(quality.stem))
        .with_detail("synonym", f64::from(quality.matches - quality.exact - quality.stem));
    if approximate {
        score.details.insert("approximate".into(), 1.0);
    }
    if quality.matches == 0 {
        score.details.insert("chunks".into(), 0.0);
        return score;
    }
    let matches = f64::from(quality.matches);
    let chunks = f64::from(quality.matches - quality.adjacent);
    let precision = matches / candidate.len() as f64;
    let recall = matches / reference.len() as f64;
    let fmean = precision * recall / (params.alpha * precision + (1.0 - params.alpha) * recall);
    let penalty = params.gamma * (chunks / matches).powf(params.beta);
    score.value = fmean * (1.0 - penalty);
    score.details.insert("chunks".into(), chunks);
    score.details.insert("precision".into(), precision);
    score.details.insert("recall".into(), recall);
    score.details.insert("fmean".into(), fmean);
    score.details.insert("penalty".into(), penalty);
    score
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn m(r: &str, c: &str) -> MetricScore {
        meteor(&tokenize(r), &tokenize(c), None)
    }

    #[test]
    fn examples() {
        assert_eq!(m("the cat sat", "").value, 0.0);
        let same = m("the cat sat", "the cat sat");
        assert_eq!(same.details["chunks"], 1.0);
        assert!((same.value - (1.0 - 0.5 / 27.0)).abs() < 1e-12);
        assert!((same.value - 0.9815).abs() < 1e-4);
        let stem = m("running fast", "runs fast");
        assert_eq!(stem.details["matches"], 2.0);
        assert_eq!(stem.details["stem"], 1.0);
        assert!((stem.value - 0.9375).abs() < 1e-4);
    }

    #[test]
    fn prefers_fewest_chunks() {
        // "a b" can align the candidate's "a" to either reference "a"; only
        // the second keeps one chunk.
        let s = m("a x a b", "a b");
        assert_eq!(s.details["matches"], 2.0);
        assert_eq!(s.details["chunks"], 1.0);
    }

    #[test]
    fn synonym_stage() {
        let lex = SynonymLexicon::read("quick\tfast\n# comment\n".as_bytes(), "mem").unwrap();
        let without = meteor(&tokenize("a quick fox"), &tokenize("a fast fox"), None);
        let with = meteor(&tokenize("a quick fox"), &tokenize("a fast fox"), Some(&lex));
        assert_eq!(without.details["matches"], 2.0);
        assert_eq!(with.details["matches"], 3.0);
        assert_eq!(with.details["synonym"], 1.0);
        assert!(with.value > without.value);
        assert!(SynonymLexicon::read("only-one-column\n".as_bytes(), "mem").is_err());
    }

    #[test]
    fn long_repetitive_input_terminates() {
        let text = vec!["the"; 60].join(" ");
        let s = m(&text, &text);
        assert!(s.value > 0.99 && s.value <= 1.0);
    }
}
