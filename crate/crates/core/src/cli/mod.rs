mod config;

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use posscore::embed::load_vec;
use posscore::ingest::{
    build_forum_sets, build_usr_sets, load_jsonl, load_msdialog, load_usr, vote_gt_curve, write_jsonl,
};
use posscore::metaeval::pos_distribution;
use posscore::metrics::{load_external_scores, SynonymLexicon};
use posscore::pipeline::{
    correlate, duplicate_bad_prepared, evaluate, prepare, score_corpus, MetricSpec, PreparedSet, Resources, TagSource,
};
use posscore::posmetrics::PosOptions;
use posscore::tagger::{self, load_tagged_documents, write_tagged, TaggedDocument, TaggerModel};
use posscore::text::{tokenize, EvaluationSet, Slot, TaggedSentence};
use posscore::{Error, TagSet};

use config::InputFormat;
pub use config::{RunArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "posscore", version, about = "POS-aware evaluation of dialogue responses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score both candidates of every set with every metric
    Score(RunArgs),
    /// Predictive power of each metric and its significance against a baseline
    Evaluate(RunArgs),
    /// POS distributions per response group and the forum vote curve
    Analyze(RunArgs),
    /// Kendall tau-b between metrics over individual responses
    Correlate(RunArgs),
    /// Tag responses with a tagger model, or train one with --train
    Tag(RunArgs),
    /// Convert USR-style or MSDialog-style JSON to JSONL evaluation sets
    Convert(RunArgs),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration.
    Usage(String),
    Core(Error),
    Output {
        path: Option<PathBuf>,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(Error::Misaligned(_) | Error::ConstantInput) => 1,
            CliError::Core(_) => 2,
            CliError::Output { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output { path: Some(p), source } => write!(f, "{}: {source}", p.display()),
            CliError::Output { path: None, source } => write!(f, "stdout: {source}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn output_err(path: Option<&Path>) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.map(Path::to_path_buf),
        source,
    }
}

fn csv_err(path: Option<&Path>) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Output {
        path: path.map(Path::to_path_buf),
        source: e.into(),
    }
}

/// Writes to `path`, or stdout when absent.
fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(output_err(Some(p))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|()| out.flush())
                .map_err(output_err(None))
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Score(a) => cmd_score(&RunConfig::resolve(a)?),
        Command::Evaluate(a) => cmd_evaluate(&RunConfig::resolve(a)?),
        Command::Analyze(a) => cmd_analyze(&RunConfig::resolve(a)?),
        Command::Correlate(a) => cmd_correlate(&RunConfig::resolve(a)?),
        Command::Tag(a) => cmd_tag(&RunConfig::resolve(a)?),
        Command::Convert(a) => cmd_convert(&RunConfig::resolve(a)?),
    }
}

fn require<'a>(value: &'a Option<PathBuf>, flag: &str, command: &str) -> CliResult<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("{command} requires {flag}")))
}

fn tagset(cfg: &RunConfig) -> CliResult<TagSet> {
    Ok(match &cfg.tagset {
        Some(t) => t.parse()?,
        None => TagSet::recommended(),
    })
}

fn load_corpus(cfg: &RunConfig, command: &str) -> CliResult<Vec<EvaluationSet>> {
    let report = load_jsonl(require(&cfg.corpus, "--corpus", command)?)?;
    Ok(report.sets)
}

fn tag_source(cfg: &RunConfig) -> CliResult<Option<TagSource>> {
    if cfg.tags.is_none() && cfg.tagger_model.is_none() {
        return Ok(None);
    }
    let docs = match &cfg.tags {
        Some(p) => load_tagged_documents(p)?,
        None => Vec::new(),
    };
    let model = cfg.tagger_model.as_deref().map(TaggerModel::load).transpose()?;
    Ok(Some(TagSource::new(docs, model, cfg.aux_as_verb)))
}

/// Requested metrics, or every metric the configured resources allow.
fn metric_specs(cfg: &RunConfig, tags: &TagSet, has_tags: bool) -> CliResult<Vec<MetricSpec>> {
    if let Some(list) = &cfg.metrics {
        return Ok(MetricSpec::parse_list(list, tags)?);
    }
    let mut ids = vec!["bleu1", "bleu2", "bleu3", "bleu4", "meteor"];
    if cfg.embeddings.is_some() {
        ids.push("ea");
        if has_tags {
            ids.push("posscore");
        }
    }
    let mut specs = MetricSpec::parse_list(&ids.join(","), tags)?;
    for (name, _) in &cfg.external_scores {
        specs.push(MetricSpec::External(name.clone()));
    }
    Ok(specs)
}

/// Loads the corpus and every resource the requested metrics need, and
/// prepares the sets for scoring.
struct Session {
    specs: Vec<MetricSpec>,
    resources: Resources,
    prepared: Vec<PreparedSet>,
}

impl Session {
    fn open(cfg: &RunConfig, command: &str, extra: &[&str]) -> CliResult<Session> {
        let tags = tagset(cfg)?;
        let corpus = load_corpus(cfg, command)?;
        let source = tag_source(cfg)?;
        let mut specs = metric_specs(cfg, &tags, source.is_some())?;
        for id in extra {
            let spec = MetricSpec::parse(id, &tags)?;
            if !specs.iter().any(|s| s.id() == spec.id()) {
                specs.push(spec);
            }
        }

        let mut resources = Resources {
            pos_options: PosOptions {
                count_punct: cfg.count_punct,
            },
            ..Resources::default()
        };
        for (name, path) in &cfg.external_scores {
            let scores = load_external_scores(path)?;
            scores.validate(&corpus)?;
            resources.externals.insert(name.clone(), scores);
        }
        if cfg.duplicate_bad && specs.iter().any(|s| matches!(s, MetricSpec::External(_))) {
            return Err(CliError::Usage(
                "external scores refer to the original texts and cannot be used with --duplicate-bad".into(),
            ));
        }
        if let Some(p) = &cfg.synonyms {
            resources.synonyms = Some(SynonymLexicon::load(p)?);
        }
        // Embeddings load last, so check for their flag up front.
        for spec in &specs {
            if spec.needs_embeddings() && cfg.embeddings.is_none() {
                return Err(Error::MissingResource(format!("{} requires --embeddings", spec.id())).into());
            }
        }
        let needs_tags = specs.iter().any(MetricSpec::needs_tags);
        let needs_embeddings = specs.iter().any(MetricSpec::needs_embeddings);
        if needs_tags && source.is_none() {
            resources.check(&specs, false)?;
        }

        let mut prepared = prepare(&corpus, if needs_tags { source.as_ref() } else { None })?;
        if cfg.duplicate_bad {
            prepared = duplicate_bad_prepared(&prepared);
        }
        if needs_embeddings {
            let path = cfg.embeddings.as_deref().expect("checked above");
            let mut vocab: HashSet<String> = HashSet::new();
            for p in &prepared {
                for text in [&p.reference, &p.a, &p.b] {
                    vocab.extend(text.tokens.iter().map(|t| t.norm().to_string()));
                    if let Some(s) = &text.tagged {
                        vocab.extend(s.iter().map(|t| t.token.norm().to_string()));
                    }
                }
            }
            resources.embeddings = Some(load_vec(path, Some(&vocab))?);
        }
        resources.check(&specs, source.is_some())?;
        Ok(Session {
            specs,
            resources,
            prepared,
        })
    }

    fn corpus(&self) -> Vec<EvaluationSet> {
        self.prepared.iter().map(|p| p.set.clone()).collect()
    }
}

fn cmd_score(cfg: &RunConfig) -> CliResult<()> {
    let session = Session::open(cfg, "score", &[])?;
    let matrix = score_corpus(&session.prepared, &session.specs, &session.resources)?;
    let mut rows: Vec<(&str, Slot, &str, f64)> = Vec::new();
    for (m, id) in matrix.metric_ids.iter().enumerate() {
        for (s, set) in session.prepared.iter().enumerate() {
            let (a, b) = matrix.scores[m][s];
            rows.push((&set.set.id, Slot::A, id, a));
            rows.push((&set.set.id, Slot::B, id, b));
        }
    }
    rows.sort_by(|x, y| (x.0, x.1, x.2).cmp(&(y.0, y.1, y.2)));

    let out = cfg.out.as_deref();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["set_id", "slot", "metric_id", "score"])
        .map_err(csv_err(out))?;
    for (set, slot, metric, score) in rows {
        w.write_record([set, slot.as_str(), metric, &score.to_string()])
            .map_err(csv_err(out))?;
    }
    emit(out, &w.into_inner().map_err(|e| output_err(out)(e.into_error()))?)
}

fn cmd_evaluate(cfg: &RunConfig) -> CliResult<()> {
    let extra: Vec<&str> = cfg.baseline.iter().map(String::as_str).collect();
    let session = Session::open(cfg, "evaluate", &extra)?;
    let matrix = score_corpus(&session.prepared, &session.specs, &session.resources)?;
    let baseline = match &cfg.baseline {
        Some(b) => Some(MetricSpec::parse(b, &tagset(cfg)?)?.id()),
        None => None,
    };
    let report = evaluate(&session.corpus(), &session.specs, &matrix, baseline.as_deref())?;
    if let Some(b) = &report.baseline {
        log::info!("baseline: {b}");
    }

    let out = cfg.out.as_deref();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "metric_id",
        "tagset",
        "power",
        "correct",
        "total",
        "p_vs_baseline",
        "p_bonferroni",
    ])
    .map_err(csv_err(out))?;
    for row in &report.rows {
        w.write_record([
            row.power.metric_id.clone(),
            row.tagset.clone().unwrap_or_default(),
            row.power.power.to_string(),
            row.power.correct.to_string(),
            row.power.total.to_string(),
            fmt_opt(row.p_vs_baseline),
            fmt_opt(row.p_bonferroni),
        ])
        .map_err(csv_err(out))?;
    }
    emit(out, &w.into_inner().map_err(|e| output_err(out)(e.into_error()))?)
}

fn cmd_correlate(cfg: &RunConfig) -> CliResult<()> {
    let session = Session::open(cfg, "correlate", &[])?;
    let matrix = score_corpus(&session.prepared, &session.specs, &session.resources)?;
    let tau = correlate(&matrix)?;

    let out = cfg.out.as_deref();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["metric_id".to_string()];
    header.extend(matrix.metric_ids.iter().cloned());
    w.write_record(&header).map_err(csv_err(out))?;
    for (id, row) in matrix.metric_ids.iter().zip(&tau) {
        let mut record = vec![id.clone()];
        record.extend(
            row.iter()
                .map(|v| v.map_or_else(|| "NA".to_string(), |v| v.to_string())),
        );
        w.write_record(&record).map_err(csv_err(out))?;
    }
    emit(out, &w.into_inner().map_err(|e| output_err(out)(e.into_error()))?)
}

fn distribution_csv(groups: &[(&str, Vec<TaggedSentence>)], tags: &TagSet) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "tag", "mean_count"]).map_err(csv_err(None))?;
    for (name, responses) in groups {
        for (tag, mean) in pos_distribution(responses, tags)? {
            w.write_record([*name, tag.as_str(), &mean.to_string()])
                .map_err(csv_err(None))?;
        }
    }
    w.into_inner().map_err(|e| output_err(None)(e.into_error()))
}

fn vote_curve_csv(path: &Path) -> CliResult<Vec<u8>> {
    let dialogues = load_msdialog(path)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_lower", "bin_upper", "answers", "ground_truth", "proportion"])
        .map_err(csv_err(None))?;
    for bin in vote_gt_curve(&dialogues) {
        w.write_record([
            bin.lower.to_string(),
            bin.upper.to_string(),
            bin.answers.to_string(),
            bin.ground_truth.to_string(),
            bin.proportion.to_string(),
        ])
        .map_err(csv_err(None))?;
    }
    w.into_inner().map_err(|e| output_err(None)(e.into_error()))
}

/// With a corpus, one block each for references and the preferred and
/// dispreferred candidates (one response per set in each). With only a
/// tagged file, a single `all` block over its sentences.
fn cmd_analyze(cfg: &RunConfig) -> CliResult<()> {
    let tags = match &cfg.tagset {
        Some(t) => t.parse()?,
        None => TagSet::all_adopted(),
    };
    let mut groups: Vec<(&str, Vec<TaggedSentence>)> = Vec::new();
    if cfg.corpus.is_some() {
        let corpus = load_corpus(cfg, "analyze")?;
        let source = tag_source(cfg)?
            .ok_or_else(|| CliError::Usage("analyze with --corpus requires --tags or --tagger-model".into()))?;
        let prepared = prepare(&corpus, Some(&source))?;
        let mut reference = Vec::new();
        let mut good = Vec::new();
        let mut bad = Vec::new();
        for p in prepared {
            let tagged = |slot: Slot| p.candidate(slot).tagged.clone().expect("tag source given");
            good.push(tagged(p.set.good_slot()));
            bad.push(tagged(p.set.bad_slot()));
            reference.push(p.reference.tagged.clone().expect("tag source given"));
        }
        groups = vec![("reference", reference), ("good", good), ("bad", bad)];
    } else if let Some(path) = &cfg.tags {
        let mut all = tagger::load_tagged(path)?;
        if cfg.aux_as_verb {
            all = all
                .iter()
                .map(|s| s.remap(posscore::PosTag::Aux, posscore::PosTag::Verb))
                .collect();
        }
        groups.push(("all", all));
    }
    if groups.is_empty() && cfg.forum.is_none() {
        return Err(CliError::Usage("analyze requires --corpus, --tags or --forum".into()));
    }

    let distribution = if groups.is_empty() {
        None
    } else {
        Some(distribution_csv(&groups, &tags)?)
    };
    let curve = cfg.forum.as_deref().map(vote_curve_csv).transpose()?;
    match cfg.out.as_deref() {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(output_err(Some(dir)))?;
            if let Some(d) = distribution {
                emit(Some(&dir.join("pos_distribution.csv")), &d)?;
            }
            if let Some(c) = curve {
                emit(Some(&dir.join("vote_curve.csv")), &c)?;
            }
            Ok(())
        }
        None => {
            let blocks: Vec<Vec<u8>> = distribution.into_iter().chain(curve).collect();
            emit(None, &blocks.join(&b"\n"[..]))
        }
    }
}

fn cmd_tag(cfg: &RunConfig) -> CliResult<()> {
    if let Some(train_path) = &cfg.train {
        let out = require(&cfg.out, "--out", "tag --train")?;
        let corpus = tagger::load_tagged(train_path)?;
        let model = tagger::train(&corpus, cfg.epochs, cfg.seed)?;
        let mut buf = Vec::new();
        model.write_to(&mut buf).map_err(output_err(Some(out)))?;
        return emit(Some(out), &buf);
    }
    let model_path = require(&cfg.tagger_model, "--tagger-model (or --train)", "tag")?;
    let model = TaggerModel::load(model_path)?;

    let mut texts: Vec<String> = Vec::new();
    if let Some(input) = &cfg.input {
        let file = std::fs::File::open(input).map_err(|e| {
            CliError::Core(Error::Io {
                path: input.clone(),
                source: e,
            })
        })?;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| {
                CliError::Core(Error::Io {
                    path: input.clone(),
                    source: e,
                })
            })?;
            if !line.trim().is_empty() {
                texts.push(line.trim().to_string());
            }
        }
    } else if cfg.corpus.is_some() {
        for set in load_corpus(cfg, "tag")? {
            texts.extend([set.reference, set.candidate_a, set.candidate_b]);
        }
    } else {
        return Err(CliError::Usage("tag requires --corpus or --input".into()));
    }

    let mut seen = HashSet::new();
    let docs: Vec<TaggedDocument> = texts
        .into_iter()
        .filter(|t| !t.trim().is_empty() && seen.insert(t.clone()))
        .map(|t| TaggedDocument {
            sentence: model.tag(&tokenize(&t)),
            text: Some(t),
        })
        .collect();
    let out = cfg.out.as_deref();
    let mut buf = Vec::new();
    write_tagged(&mut buf, &docs).map_err(output_err(out))?;
    emit(out, &buf)
}

fn cmd_convert(cfg: &RunConfig) -> CliResult<()> {
    let format = cfg
        .from
        .ok_or_else(|| CliError::Usage("convert requires --from usr|msdialog".into()))?;
    let input = require(&cfg.input, "--input", "convert")?;
    let report = match format {
        InputFormat::Usr => build_usr_sets(&load_usr(input)?),
        InputFormat::Msdialog => build_forum_sets(&load_msdialog(input)?, cfg.sample, cfg.seed),
    };
    if report.skipped > 0 {
        log::warn!("skipped {} context(s) that yield no evaluation set", report.skipped);
    }
    if report.sets.is_empty() {
        return Err(Error::NoEvaluationSets.into());
    }
    log::info!("{} evaluation set(s)", report.sets.len());
    let out = cfg.out.as_deref();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &report.sets).map_err(output_err(out))?;
    emit(out, &buf)
}
