use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    fn enabled(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Usr,
    Msdialog,
}

/// Options shared by every command. Each may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with any of the options below (snake_case keys); flags win
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Evaluation sets in JSONL
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Word vectors in fastText `.vec` format, optionally gzipped
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// Pre-tagged responses in CoNLL(-U) format
    #[arg(long, value_name = "FILE")]
    pub tags: Option<PathBuf>,
    /// Tagger model used for responses missing from --tags
    #[arg(long, value_name = "FILE")]
    pub tagger_model: Option<PathBuf>,
    /// POS tag set: `default`, `all` or a `+`-joined list such as NOUN+VERB
    #[arg(long, value_name = "TAGS")]
    pub tagset: Option<String>,
    /// Comma-separated metric ids
    #[arg(long, value_name = "IDS")]
    pub metrics: Option<String>,
    /// `[NAME=]FILE` CSV of external scores, scored as `ext:NAME`; repeatable
    #[arg(long, value_name = "[NAME=]FILE")]
    pub external_scores: Vec<String>,
    /// Metric id the others are tested against
    #[arg(long, value_name = "ID")]
    pub baseline: Option<String>,
    /// Count punctuation in response lengths for the POS weight
    #[arg(long, value_enum)]
    pub count_punct: Option<Switch>,
    /// Treat AUX as VERB
    #[arg(long, value_enum)]
    pub aux_as_verb: Option<Switch>,
    /// METEOR synonym lexicon, `lemma<TAB>synonym` per line
    #[arg(long, value_name = "FILE")]
    pub synonyms: Option<PathBuf>,
    /// Repeat the lower-rated candidate of every set twice before scoring
    #[arg(long)]
    pub duplicate_bad: bool,
    /// Number of sets to sample when converting forum data
    #[arg(long)]
    pub sample: Option<usize>,
    /// Seed for forum sampling and tagger training (default 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (directory for `analyze`); stdout when absent
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// MSDialog-style JSON for the vote curve
    #[arg(long, value_name = "FILE")]
    pub forum: Option<PathBuf>,
    /// Source format for `convert`
    #[arg(long, value_enum)]
    pub from: Option<InputFormat>,
    /// Input file for `convert`, or plain text (one response per line) for `tag`
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Train a tagger model from this CoNLL(-U) file
    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,
    /// Training passes over the data for --train (default 5)
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    corpus: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    tags: Option<PathBuf>,
    tagger_model: Option<PathBuf>,
    tagset: Option<String>,
    metrics: Option<OneOrMany>,
    external_scores: Option<OneOrMany>,
    baseline: Option<String>,
    count_punct: Option<bool>,
    aux_as_verb: Option<bool>,
    synonyms: Option<PathBuf>,
    duplicate_bad: Option<bool>,
    sample: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    forum: Option<PathBuf>,
    from: Option<InputFormat>,
    input: Option<PathBuf>,
    train: Option<PathBuf>,
    epochs: Option<usize>,
}

/// Fully resolved options.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub tags: Option<PathBuf>,
    pub tagger_model: Option<PathBuf>,
    pub tagset: Option<String>,
    pub metrics: Option<String>,
    pub external_scores: Vec<(String, PathBuf)>,
    pub baseline: Option<String>,
    pub count_punct: bool,
    pub aux_as_verb: bool,
    pub synonyms: Option<PathBuf>,
    pub duplicate_bad: bool,
    pub sample: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub forum: Option<PathBuf>,
    pub from: Option<InputFormat>,
    pub input: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub epochs: usize,
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_EPOCHS: usize = 5;
pub const DATA_DIR_ENV: &str = "POSSCORE_DATA_DIR";

/// Input paths that do not exist as given are looked up under
/// `$POSSCORE_DATA_DIR`.
fn resolve_input(path: PathBuf, data_dir: Option<&Path>) -> PathBuf {
    match data_dir {
        Some(root) if path.is_relative() && !path.exists() => {
            let candidate = root.join(&path);
            if candidate.exists() {
                candidate
            } else {
                path
            }
        }
        _ => path,
    }
}

fn external_entry(spec: &str) -> Result<(String, PathBuf), CliError> {
    let (name, path) = match spec.split_once('=') {
        Some((n, p)) => (n.trim().to_string(), PathBuf::from(p.trim())),
        None => {
            let path = PathBuf::from(spec.trim());
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (stem, path)
        }
    };
    if name.is_empty() || name.contains([',', ':']) {
        return Err(CliError::Usage(format!("bad --external-scores value `{spec}`")));
    }
    Ok((name, path))
}

impl RunConfig {
    pub fn resolve(args: RunArgs) -> Result<RunConfig, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                let parsed: ConfigFile =
                    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
                Some((parsed, base))
            }
            None => None,
        };
        let (file, base) = file.unwrap_or_default();
        // Paths in a config file are relative to the file.
        let rel = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
        let data_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        let input = |flag: Option<PathBuf>, from_file: Option<PathBuf>| {
            flag.or_else(|| rel(from_file))
                .map(|p| resolve_input(p, data_dir.as_deref()))
        };

        let mut external_scores = Vec::new();
        let specs: Vec<(String, bool)> = if args.external_scores.is_empty() {
            file.external_scores
                .map(OneOrMany::into_vec)
                .unwrap_or_default()
                .into_iter()
                .map(|s| (s, true))
                .collect()
        } else {
            args.external_scores.iter().map(|s| (s.clone(), false)).collect()
        };
        for (spec, in_file) in specs {
            let (name, path) = external_entry(&spec)?;
            let path = if in_file { rel(Some(path)).expect("path") } else { path };
            if external_scores.iter().any(|(n, _)| *n == name) {
                return Err(CliError::Usage(format!("external score name `{name}` given twice")));
            }
            external_scores.push((name, resolve_input(path, data_dir.as_deref())));
        }

        Ok(RunConfig {
            corpus: input(args.corpus, file.corpus),
            embeddings: input(args.embeddings, file.embeddings),
            tags: input(args.tags, file.tags),
            tagger_model: input(args.tagger_model, file.tagger_model),
            tagset: args.tagset.or(file.tagset),
            metrics: args.metrics.or_else(|| file.metrics.map(|m| m.into_vec().join(","))),
            external_scores,
            baseline: args.baseline.or(file.baseline),
            count_punct: args
                .count_punct
                .map_or(file.count_punct.unwrap_or(true), Switch::enabled),
            aux_as_verb: args
                .aux_as_verb
                .map_or(file.aux_as_verb.unwrap_or(true), Switch::enabled),
            synonyms: input(args.synonyms, file.synonyms),
            duplicate_bad: args.duplicate_bad || file.duplicate_bad.unwrap_or(false),
            sample: args.sample.or(file.sample),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            out: args.out.or_else(|| rel(file.out)),
            forum: input(args.forum, file.forum),
            from: args.from.or(file.from),
            input: input(args.input, file.input),
            train: input(args.train, file.train),
            epochs: args.epochs.or(file.epochs).unwrap_or(DEFAULT_EPOCHS),
        })
    }
}
