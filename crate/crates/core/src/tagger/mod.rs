//! Part-of-speech tag sources: CoNLL-style pre-tagged files and a small
//! greedy averaged-perceptron tagger.

mod conll;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use conll::{load_tagged, load_tagged_documents, read_tagged, write_tagged, TaggedDocument};

use crate::error::{Error, Result};
use crate::tags::PosTag;
use crate::text::{TaggedSentence, TaggedToken, Token};

const NTAGS: usize = PosTag::ALL.len();
const MODEL_MAGIC: &str = "posscore-tagger";
const MODEL_VERSION: u32 = 1;

/// Minimum count for a token to enter the unambiguous-vocabulary prior.
pub const PRIOR_MIN_COUNT: usize = 5;

pub const DEFAULT_SEED: u64 = 0x5eed;

type Weights = [f64; NTAGS];

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    feature_weights: HashMap<String, Weights>,
    tag_prior: HashMap<String, PosTag>,
    iterations_trained: usize,
}

impl TaggerModel {
    pub fn iterations_trained(&self) -> usize {
        self.iterations_trained
    }

    pub fn prior(&self, norm: &str) -> Option<PosTag> {
        self.tag_prior.get(norm).copied()
    }

    pub fn weight(&self, feature: &str, tag: PosTag) -> f64 {
        self.feature_weights.get(feature).map_or(0.0, |w| w[tag.index()])
    }

    pub fn tag(&self, tokens: &[Token]) -> TaggedSentence {
        let mut out = Vec::with_capacity(tokens.len());
        let mut prev = None;
        for i in 0..tokens.len() {
            let tag = match self.prior(tokens[i].norm()) {
                Some(tag) => tag,
                None => argmax(&self.scores(&features(tokens, i, prev))),
            };
            out.push(TaggedToken {
                token: tokens[i].clone(),
                tag,
            });
            prev = Some(tag);
        }
        TaggedSentence::new(out)
    }

    fn scores(&self, feats: &[String]) -> Weights {
        let mut scores = [0.0; NTAGS];
        for f in feats {
            if let Some(w) = self.feature_weights.get(f) {
                for (s, w) in scores.iter_mut().zip(w) {
                    *s += w;
                }
            }
        }
        scores
    }

    /// Writes the versioned `(feature, tag, weight)` flat file. Entries are
    /// sorted so equal models serialize identically.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{MODEL_MAGIC}\t{MODEL_VERSION}")?;
        writeln!(w, "iterations\t{}", self.iterations_trained)?;
        let mut prior: Vec<_> = self.tag_prior.iter().collect();
        prior.sort();
        for (token, tag) in prior {
            writeln!(w, "prior\t{token}\t{tag}")?;
        }
        let mut feats: Vec<_> = self.feature_weights.iter().collect();
        feats.sort_by(|a, b| a.0.cmp(b.0));
        let mut line = String::new();
        for (feat, weights) in feats {
            for tag in PosTag::ALL {
                let v = weights[tag.index()];
                if v != 0.0 {
                    line.clear();
                    write!(line, "weight\t{feat}\t{tag}\t{v}").unwrap();
                    writeln!(w, "{line}")?;
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_from(r: impl Read, origin: &str) -> Result<TaggerModel> {
        let mut lines = BufReader::new(r).lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::io(origin, e))?,
            None => return Err(Error::parse(origin, 1, "empty model file")),
        };
        let expected = format!("{MODEL_MAGIC}\t{MODEL_VERSION}");
        if header.trim_end() != expected {
            return Err(Error::parse(origin, 1, format!("unsupported model header `{header}`")));
        }
        let mut model = TaggerModel {
            feature_weights: HashMap::new(),
            tag_prior: HashMap::new(),
            iterations_trained: 0,
        };
        for (idx, line) in lines.enumerate() {
            let lineno = idx + 2;
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let bad = |msg: &str| Error::parse(origin, lineno, msg.to_string());
            let tag = |s: &str| s.parse::<PosTag>().map_err(|_| bad("unknown tag"));
            match fields.as_slice() {
                ["iterations", n] => model.iterations_trained = n.parse().map_err(|_| bad("bad iteration count"))?,
                ["prior", token, t] => {
                    model.tag_prior.insert((*token).to_string(), tag(t)?);
                }
                ["weight", feat, t, v] => {
                    let v: f64 = v.parse().map_err(|_| bad("bad weight"))?;
                    if !v.is_finite() {
                        return Err(bad("non-finite weight"));
                    }
                    model.feature_weights.entry((*feat).to_string()).or_insert([0.0; NTAGS])[tag(t)?.index()] = v;
                }
                _ => return Err(bad("unrecognized model line")),
            }
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<TaggerModel> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        TaggerModel::read_from(file, &path.display().to_string())
    }
}

fn argmax(scores: &Weights) -> PosTag {
    let mut best = 0;
    for i in 1..NTAGS {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    PosTag::ALL[best]
}

fn affix(s: &str, n: usize, suffix: bool) -> String {
    let chars: Vec<char> = s.chars().collect();
    let n = n.min(chars.len());
    if suffix {
        chars[chars.len() - n..].iter().collect()
    } else {
        chars[..n].iter().collect()
    }
}

fn features(tokens: &[Token], i: usize, prev_tag: Option<PosTag>) -> Vec<String> {
    let tok = &tokens[i];
    let norm = tok.norm();
    let mut feats = vec![
        format!("w={norm}"),
        format!("p3={}", affix(norm, 3, false)),
        format!("s3={}", affix(norm, 3, true)),
        format!("pt={}", prev_tag.map_or("<s>", PosTag::as_str)),
        format!("pw={}", if i == 0 { "<s>" } else { tokens[i - 1].norm() }),
        format!("nw={}", tokens.get(i + 1).map_or("</s>", |t| t.norm())),
    ];
    if norm.chars().all(|c| c.is_ascii_digit()) {
        feats.push("digit".into());
    }
    let mut chars = tok.surface().chars();
    if chars.next().is_some_and(char::is_uppercase) && chars.all(|c| !c.is_uppercase()) {
        feats.push("title".into());
    }
    feats
}

fn build_prior(corpus: &[TaggedSentence]) -> HashMap<String, PosTag> {
    let mut seen: HashMap<&str, (PosTag, usize, bool)> = HashMap::new();
    for sentence in corpus {
        for t in sentence {
            let entry = seen.entry(t.token.norm()).or_insert((t.tag, 0, true));
            entry.1 += 1;
            if entry.0 != t.tag {
                entry.2 = false;
            }
        }
    }
    seen.into_iter()
        .filter(|(_, (_, count, single))| *single && *count >= PRIOR_MIN_COUNT)
        .map(|(norm, (tag, _, _))| (norm.to_string(), tag))
        .collect()
}

#[derive(Clone)]
struct Accum {
    weights: Weights,
    totals: Weights,
    stamps: [u64; NTAGS],
}

/// Greedy left-to-right averaged-perceptron training. Sentence order is
/// shuffled each epoch from `seed`.
pub fn train(corpus: &[TaggedSentence], epochs: usize, seed: u64) -> Result<TaggerModel> {
    if corpus.iter().all(TaggedSentence::is_empty) {
        return Err(Error::EmptyTrainingCorpus);
    }
    if epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1".into()));
    }
    let tag_prior = build_prior(corpus);
    let mut accum: HashMap<String, Accum> = HashMap::new();
    let mut instances: u64 = 0;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &si in &order {
            let tokens = corpus[si].tokens();
            let gold = corpus[si].tags();
            let mut prev = None;
            for i in 0..tokens.len() {
                let guess = if let Some(tag) = tag_prior.get(tokens[i].norm()) {
                    *tag
                } else {
                    let feats = features(&tokens, i, prev);
                    let mut scores = [0.0; NTAGS];
                    for f in &feats {
                        if let Some(a) = accum.get(f) {
                            for (s, w) in scores.iter_mut().zip(&a.weights) {
                                *s += w;
                            }
                        }
                    }
                    let guess = argmax(&scores);
                    instances += 1;
                    if guess != gold[i] {
                        for f in feats {
                            let a = accum.entry(f).or_insert_with(|| Accum {
                                weights: [0.0; NTAGS],
                                totals: [0.0; NTAGS],
                                stamps: [0; NTAGS],
                            });
                            for (tag, delta) in [(gold[i], 1.0), (guess, -1.0)] {
                                let k = tag.index();
                                a.totals[k] += (instances - a.stamps[k]) as f64 * a.weights[k];
                                a.stamps[k] = instances;
                                a.weights[k] += delta;
                            }
                        }
                    }
                    guess
                };
                prev = Some(guess);
            }
        }
    }

    let denom = instances.max(1) as f64;
    let feature_weights = accum
        .into_iter()
        .filter_map(|(feat, a)| {
            let avg: [f64; NTAGS] =
                std::array::from_fn(|k| (a.totals[k] + (instances - a.stamps[k]) as f64 * a.weights[k]) / denom);
            avg.iter().any(|v| *v != 0.0).then_some((feat, avg))
        })
        .collect();

    Ok(TaggerModel {
        feature_weights,
        tag_prior,
        iterations_trained: epochs,
    })
}
