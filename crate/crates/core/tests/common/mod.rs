//! Independent reference implementations and generators shared by the
//! integration suites.
#![allow(dead_code)]

use std::path::PathBuf;

use posscore::embed::EmbeddingTable;
use posscore::text::{TaggedSentence, Token};
use posscore::PosTag;
use rand::seq::IndexedRandom;
use rand::{Rng, RngExt};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub const VOCAB: [&str; 12] = [
    "the", "cat", "sat", "on", "mat", "dog", "runs", "running", "quick", "quickly", "a", "chess",
];

pub fn random_words(rng: &mut impl Rng, len: usize) -> Vec<Token> {
    (0..len).map(|_| Token::new(*VOCAB.choose(rng).unwrap())).collect()
}

/// Every entry of `words` gets a distinct random vector, so cosines are
/// nondegenerate.
pub fn toy_table(words: &[&str], dim: usize, rng: &mut impl Rng) -> EmbeddingTable {
    let pairs: Vec<(&str, Vec<f64>)> = words
        .iter()
        .map(|w| (*w, (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    EmbeddingTable::from_pairs(dim, pairs).unwrap()
}

pub const TAGGED_VOCAB: [(&str, PosTag); 14] = [
    ("chess", PosTag::Noun),
    ("player", PosTag::Noun),
    ("tournament", PosTag::Noun),
    ("plays", PosTag::Verb),
    ("wins", PosTag::Verb),
    ("quick", PosTag::Adj),
    ("national", PosTag::Adj),
    ("often", PosTag::Adv),
    ("john", PosTag::Propn),
    ("the", PosTag::Det),
    ("a", PosTag::Det),
    ("i", PosTag::Pron),
    ("for", PosTag::Adp),
    (".", PosTag::Punct),
];

pub fn tagged_vocab_words() -> Vec<&'static str> {
    TAGGED_VOCAB.iter().map(|(w, _)| *w).collect()
}

/// A sentence holding at least one word inside and one outside the
/// default tag set.
pub fn random_tagged(rng: &mut impl Rng, max_len: usize) -> TaggedSentence {
    let len = rng.random_range(2..=max_len.max(2));
    let mut pairs: Vec<(&str, PosTag)> = (0..len - 2).map(|_| *TAGGED_VOCAB.choose(rng).unwrap()).collect();
    let inside = TAGGED_VOCAB[rng.random_range(0..9)];
    let outside = TAGGED_VOCAB[rng.random_range(9..TAGGED_VOCAB.len())];
    pairs.insert(rng.random_range(0..=pairs.len()), inside);
    pairs.insert(rng.random_range(0..=pairs.len()), outside);
    TaggedSentence::from_pairs(pairs)
}

fn count_occurrences(haystack: &[&str], gram: &[&str]) -> usize {
    if haystack.len() < gram.len() {
        return 0;
    }
    (0..=haystack.len() - gram.len())
        .filter(|&i| haystack[i..i + gram.len()] == *gram)
        .count()
}

/// Sentence BLEU by direct n-gram enumeration.
pub fn oracle_bleu(reference: &[Token], candidate: &[Token], n: usize) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let r: Vec<&str> = reference.iter().map(Token::norm).collect();
    let c: Vec<&str> = candidate.iter().map(Token::norm).collect();
    let mut log_sum = 0.0;
    for k in 1..=n {
        let mut total = 0usize;
        let mut clipped = 0usize;
        if c.len() >= k {
            let mut seen: Vec<&[&str]> = Vec::new();
            for i in 0..=c.len() - k {
                let gram = &c[i..i + k];
                total += 1;
                if !seen.contains(&gram) {
                    seen.push(gram);
                    clipped += count_occurrences(&c, gram).min(count_occurrences(&r, gram));
                }
            }
        }
        let p = if clipped == 0 { 1e-9 } else { clipped as f64 } / total.max(1) as f64;
        log_sum += p.ln();
    }
    let bp = if c.len() >= r.len() {
        1.0
    } else {
        (1.0 - r.len() as f64 / c.len() as f64).exp()
    };
    bp * (log_sum / n as f64).exp()
}

fn matchable(r: &Token, c: &Token) -> bool {
    r.norm() == c.norm() || porter_stemmer::stem(r.norm()) == porter_stemmer::stem(c.norm())
}

/// METEOR over the best of all one-to-one alignments: most matches, then
/// fewest chunks.
pub fn oracle_meteor(reference: &[Token], candidate: &[Token]) -> f64 {
    fn walk(
        i: usize,
        reference: &[Token],
        candidate: &[Token],
        used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        best: &mut (usize, usize),
    ) {
        if i == candidate.len() {
            let matches = current.len();
            let mut chunks = 0;
            for (k, &(ci, rj)) in current.iter().enumerate() {
                let continues = k > 0 && current[k - 1] == (ci.wrapping_sub(1), rj.wrapping_sub(1));
                if !continues {
                    chunks += 1;
                }
            }
            if matches > best.0 || (matches == best.0 && chunks < best.1) {
                *best = (matches, chunks);
            }
            return;
        }
        walk(i + 1, reference, candidate, used, current, best);
        for j in 0..reference.len() {
            if !used[j] && matchable(&reference[j], &candidate[i]) {
                used[j] = true;
                current.push((i, j));
                walk(i + 1, reference, candidate, used, current, best);
                current.pop();
                used[j] = false;
            }
        }
    }
    let mut best = (0, usize::MAX);
    walk(
        0,
        reference,
        candidate,
        &mut vec![false; reference.len()],
        &mut Vec::new(),
        &mut best,
    );
    let (m, chunks) = best;
    if m == 0 {
        return 0.0;
    }
    let m = m as f64;
    let p = m / candidate.len() as f64;
    let r = m / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    fmean * (1.0 - 0.5 * (chunks as f64 / m).powi(3))
}

/// Tau-b by counting every pair; `None` when either input is constant.
pub fn oracle_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut concordant, mut discordant, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if dx.signum() == dy.signum() {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let denom = (((concordant + discordant + tx) * (concordant + discordant + ty)) as f64).sqrt();
    if denom == 0.0 {
        None
    } else {
        Some((concordant - discordant) as f64 / denom)
    }
}

/// Two-sided paired t-test p-value through the statrs Student-t CDF.
pub fn oracle_ttest(a: &[bool], b: &[bool]) -> f64 {
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| f64::from(u8::from(*x)) - f64::from(u8::from(*y)))
        .collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return if mean == 0.0 { 1.0 } else { 0.0 };
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).unwrap();
    2.0 * (1.0 - dist.cdf(t.abs()))
}
