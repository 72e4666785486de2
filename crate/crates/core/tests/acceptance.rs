//! Acceptance run: one PASS / FAIL / SKIP line per criterion, nonzero exit
//! on any failure.

mod common;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use posscore::embed::load_vec;
use posscore::ingest::load_jsonl;
use posscore::metaeval::{kendall_tau, paired_ttest, predictive_power, AgreementVector};
use posscore::metrics::{bleu_n, meteor};
use posscore::pipeline::{evaluate, prepare, score_corpus, MetricSpec, Resources, TagSource};
use posscore::posmetrics::{pos_weight, posscore, PosOptions};
use posscore::tagger::load_tagged_documents;
use posscore::text::EvaluationSet;
use posscore::TagSet;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn weight_branches() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut branches = [0usize; 3];
    for i in 0..1000 {
        let nr: f64 = 1.0 - rng.random_range(0.0..1.0);
        let nc: f64 = if i % 10 == 0 {
            nr
        } else {
            1.0 - rng.random_range(0.0..1.0)
        };
        let w = pos_weight(nr, nc).unwrap().value;
        let law = if nr > nc {
            branches[0] += 1;
            w < 1.0
        } else if nr == nc {
            branches[1] += 1;
            w == 1.0
        } else {
            branches[2] += 1;
            w > 1.0
        };
        if !law {
            return Fail(format!("branch law broken at n_ref={nr}, n_cand={nc}, w={w}"));
        }
        worst = worst.max((w - (1.0 - nr / nc).exp()).abs());
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("branches {branches:?}, max error {worst:e}, {elapsed:?}"),
    )
}

fn identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let table = toy_table(&tagged_vocab_words(), 8, &mut rng);
    let tags = TagSet::recommended();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = random_tagged(&mut rng, 12);
        let s = posscore(&x, &x, &tags, &table, PosOptions::default()).value;
        worst = worst.max((s - 2.0).abs());
    }
    check(worst <= 1e-9, format!("100 sentences, max |score - 2| = {worst:e}"))
}

fn duplication() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let table = toy_table(&tagged_vocab_words(), 8, &mut rng);
    let tags = TagSet::recommended();
    let mut bleu_changed = 0;
    for i in 0..100 {
        let r = random_tagged(&mut rng, 12);
        let c = random_tagged(&mut rng, 12);
        let once = posscore(&r, &c, &tags, &table, PosOptions::default()).value;
        let twice = posscore(&r, &c.doubled(), &tags, &table, PosOptions::default()).value;
        if once.to_bits() != twice.to_bits() {
            return Fail(format!("pair {i}: {once} vs {twice}"));
        }
        let b1 = bleu_n(&r.tokens(), &c.tokens(), 4).unwrap().value;
        let b2 = bleu_n(&r.tokens(), &c.doubled().tokens(), 4).unwrap().value;
        if b1.to_bits() != b2.to_bits() {
            bleu_changed += 1;
        }
    }
    check(
        bleu_changed >= 1,
        format!("100 pairs bit-identical; BLEU-4 changed on {bleu_changed}"),
    )
}

fn baseline_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let rlen = rng.random_range(1..=8);
        let clen = rng.random_range(1..=8);
        let r = random_words(&mut rng, rlen);
        let c = random_words(&mut rng, clen);
        for n in 1..=4u8 {
            let got = bleu_n(&r, &c, n).unwrap().value;
            worst = worst.max((got - oracle_bleu(&r, &c, n as usize)).abs());
        }
        worst = worst.max((meteor(&r, &c, None).value - oracle_meteor(&r, &c)).abs());
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("20 pairs, max error {worst:e}, {elapsed:?}"),
    )
}

fn algorithm_semantics() -> Outcome {
    // (human a, human b, metric a, metric b); set 7 is a metric tie.
    let rows = [
        (5.0, 2.0, 0.9, 0.1),
        (1.0, 4.0, 0.2, 0.8),
        (3.0, 2.0, 0.3, 0.6),
        (2.0, 3.0, 0.7, 0.4),
        (4.0, 1.0, 0.5, 0.2),
        (2.5, 3.5, 0.1, 0.3),
        (3.0, 1.0, 0.4, 0.4),
        (1.0, 2.0, 0.6, 0.9),
        (4.5, 4.0, 0.8, 0.5),
        (2.0, 5.0, 0.9, 0.2),
    ];
    // Agreement by hand: sets 0, 1, 4, 5, 7 and 8.
    let expected = [true, true, false, false, true, true, false, true, true, false];
    let corpus: Vec<EvaluationSet> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| EvaluationSet::new(format!("s{i}"), vec![], "ref", "a", "b", r.0, r.1).unwrap())
        .collect();
    let scores: Vec<(f64, f64)> = rows.iter().map(|r| (r.2, r.3)).collect();
    let (power, agreement) = predictive_power("m", &corpus, &scores).unwrap();
    if agreement.correct != expected || power.correct != 6 || power.total != 10 || power.power != 0.6 {
        return Fail(format!(
            "got {}/{} ({:?})",
            power.correct, power.total, agreement.correct
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..5 {
        let a = rng.random_range(0.5..3.0);
        let b = rng.random_range(-2.0..2.0);
        let f = |x: f64| -> f64 {
            match k {
                0 => a * x + b,
                1 => (a * x).exp() + b,
                2 => (x + b).powi(3) * a,
                3 => (a * x).atan(),
                _ => (x + 1.0).ln() * a + b,
            }
        };
        let mapped: Vec<(f64, f64)> = scores.iter().map(|&(x, y)| (f(x), f(y))).collect();
        let (p2, v2) = predictive_power("m", &corpus, &mapped).unwrap();
        if v2 != agreement || p2.power.to_bits() != power.power.to_bits() {
            return Fail(format!("transform {k} changed the agreement vector"));
        }
    }
    Pass("6/10 with the tie counted incorrect; 5 monotone transforms bit-identical".into())
}

const VECTOR_NAMES: [&str; 6] = [
    "crawl-300d-2M.vec",
    "wiki-news-300d-1M.vec",
    "cc.en.300.vec",
    "crawl-300d-2M.vec.gz",
    "wiki-news-300d-1M.vec.gz",
    "cc.en.300.vec.gz",
];

fn data_dir() -> Option<PathBuf> {
    std::env::var_os("POSSCORE_DATA_DIR").map(PathBuf::from)
}

/// `POSSCORE_FASTTEXT`, or a standard fastText file under
/// `POSSCORE_DATA_DIR`.
fn fasttext_path() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os("POSSCORE_FASTTEXT").map(PathBuf::from) {
        return p.exists().then_some(p);
    }
    let dir = data_dir()?;
    VECTOR_NAMES.iter().map(|n| dir.join(n)).find(|p| p.exists())
}

fn corpus_vocab(corpus: &[EvaluationSet]) -> HashSet<String> {
    corpus
        .iter()
        .flat_map(|s| [&s.reference, &s.candidate_a, &s.candidate_b])
        .flat_map(|t| posscore::text::tokenize(t))
        .map(|t| t.norm().to_string())
        .collect()
}

fn worked_example() -> Outcome {
    let Some(vectors) = fasttext_path() else {
        return Skip("no fastText vectors (set POSSCORE_FASTTEXT or POSSCORE_DATA_DIR)".into());
    };
    let corpus = load_jsonl(&fixture("corpus.jsonl")).unwrap().sets;
    let set = corpus.iter().find(|s| s.id == "pc-example").unwrap().clone();
    let source = TagSource::new(load_tagged_documents(&fixture("tags.conllu")).unwrap(), None, true);
    let table = match load_vec(&vectors, Some(&corpus_vocab(std::slice::from_ref(&set)))) {
        Ok(t) => t,
        Err(e) => return Fail(format!("{}: {e}", vectors.display())),
    };
    let tags: TagSet = "ADJ+ADV+VERB+PROPN+NOUN".parse().unwrap();
    let tag = |t: &str| source.lookup(t).unwrap();
    let reference = tag(&set.reference);
    let good = posscore(&reference, &tag(&set.candidate_a), &tags, &table, PosOptions::default()).value;
    let bad = posscore(&reference, &tag(&set.candidate_b), &tags, &table, PosOptions::default()).value;
    check(
        good > bad,
        format!("good {good:.3} vs bad {bad:.3} (target 1.942 vs 1.476, not gated)"),
    )
}

fn replication() -> Outcome {
    let (Some(dir), Some(vectors)) = (data_dir(), fasttext_path()) else {
        return Skip("needs POSSCORE_DATA_DIR with <name>.jsonl and <name>.conllu plus fastText vectors".into());
    };
    let mut lines = Vec::new();
    for (name, target) in [("tc", 0.740), ("pc", 0.689), ("msdialog", 0.569)] {
        let (corpus_path, tags_path) = (dir.join(format!("{name}.jsonl")), dir.join(format!("{name}.conllu")));
        if !corpus_path.exists() || !tags_path.exists() {
            lines.push(format!("{name}: missing"));
            continue;
        }
        match replicate(&corpus_path, &tags_path, &vectors) {
            Ok((power, secs)) => lines.push(format!(
                "{name}: power {power:.3} (target {target:.3}, deviation {:+.3}, {secs:.1}s)",
                power - target
            )),
            Err(e) => lines.push(format!("{name}: {e}")),
        }
    }
    if lines.iter().all(|l| l.ends_with("missing")) {
        return Skip("no replication corpora found".into());
    }
    Pass(format!("reported only: {}", lines.join("; ")))
}

fn replicate(corpus: &Path, tags: &Path, vectors: &Path) -> posscore::Result<(f64, f64)> {
    let sets = load_jsonl(corpus)?.sets;
    let table = load_vec(vectors, Some(&corpus_vocab(&sets)))?;
    let start = Instant::now();
    let source = TagSource::new(load_tagged_documents(tags)?, None, true);
    let specs = vec![MetricSpec::PosScore(TagSet::recommended())];
    let prepared = prepare(&sets, Some(&source))?;
    let resources = Resources {
        embeddings: Some(table),
        ..Resources::default()
    };
    let matrix = score_corpus(&prepared, &specs, &resources)?;
    let report = evaluate(&sets, &specs, &matrix, None)?;
    Ok((report.rows[0].power.power, start.elapsed().as_secs_f64()))
}

fn statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_p, mut worst_tau) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let n = rng.random_range(5..60);
        let bits = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.random_range(0..2) == 1).collect::<Vec<bool>>();
        let (a, b) = (bits(&mut rng), bits(&mut rng));
        let ids: Vec<String> = (0..n).map(|k| k.to_string()).collect();
        let p = paired_ttest(
            &AgreementVector {
                set_ids: ids.clone(),
                correct: a.clone(),
            },
            &AgreementVector {
                set_ids: ids,
                correct: b.clone(),
            },
        )
        .unwrap();
        worst_p = worst_p.max((p - oracle_ttest(&a, &b)).abs());

        let x: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..6u8))).collect();
        let y: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..6u8))).collect();
        match (kendall_tau(&x, &y), oracle_tau_b(&x, &y)) {
            (Ok(t), Some(o)) => worst_tau = worst_tau.max((t - o).abs()),
            (Err(_), None) => {}
            (t, o) => return Fail(format!("fixture {i}: tau {t:?} vs oracle {o:?}")),
        }
    }
    check(
        worst_p <= 1e-6 && worst_tau <= 1e-6,
        format!("50 fixtures, max |dp| {worst_p:e}, max |dtau| {worst_tau:e}"),
    )
}

fn run_cli(args: &[String], dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_posscore"))
        .args(args)
        .current_dir(fixture(""))
        .env_remove("POSSCORE_DATA_DIR")
        .env("TMPDIR", dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

/// A file's bytes, or a directory's files concatenated in name order.
fn read_output(path: &Path) -> Vec<u8> {
    if !path.is_dir() {
        return std::fs::read(path).unwrap_or_default();
    }
    let mut names: Vec<PathBuf> = std::fs::read_dir(path).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    names
        .iter()
        .flat_map(|p| {
            [
                p.file_name().unwrap().to_string_lossy().as_bytes().to_vec(),
                read_output(p),
            ]
        })
        .flatten()
        .collect()
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let toy = "--corpus corpus.jsonl --tags tags.conllu --embeddings toy.vec";
    let metrics = "--metrics bleu1,bleu4,meteor,ea,posscore,pwe:bleu2,ptlc:bleu1,ptlc:ea,ext:bert --external-scores bert=external.csv";
    let runs: Vec<(String, Option<String>)> = vec![
        (format!("score {toy} {metrics}"), None),
        (format!("evaluate {toy} {metrics}"), None),
        (format!("evaluate {toy} --metrics posscore,bleu4 --duplicate-bad"), None),
        (format!("correlate {toy} {metrics}"), None),
        (format!("analyze {toy} --forum msdialog.json"), None),
        (
            format!("analyze {toy} --forum msdialog.json --out {{OUT}}"),
            Some("analysis".into()),
        ),
        (
            "tag --train tags.conllu --epochs 3 --seed 9 --out {OUT}".to_string(),
            Some("model".into()),
        ),
        (
            format!("tag --tagger-model {} --corpus corpus.jsonl", path("model-0")),
            None,
        ),
        ("convert --from usr --input usr.json".into(), None),
        (
            "convert --from msdialog --input msdialog.json --sample 3 --seed 17".into(),
            None,
        ),
    ];
    let mut checked = Vec::new();
    for (cmd, out_name) in &runs {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let line = match out_name {
                Some(n) => cmd.replace("{OUT}", &path(&format!("{n}-{round}"))),
                None => cmd.clone(),
            };
            let args: Vec<String> = line.split_whitespace().map(String::from).collect();
            let stdout = match run_cli(&args, dir.path()) {
                Ok(s) => s,
                Err(e) => return Fail(e),
            };
            let bytes = match out_name {
                Some(n) => read_output(Path::new(&path(&format!("{n}-{round}")))),
                None => stdout,
            };
            if bytes.is_empty() {
                return Fail(format!("`{line}` produced no output"));
            }
            outputs.push(bytes);
        }
        if outputs[0] != outputs[1] {
            return Fail(format!("`{cmd}` differs between runs"));
        }
        checked.push(cmd.split_whitespace().next().unwrap().to_string());
    }
    checked.dedup();
    Pass(format!("{} runs byte-identical ({})", runs.len(), checked.join(", ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("pos weight branches and closed form", weight_branches),
        ("posscore identity", identity),
        ("duplication invariance", duplication),
        ("BLEU and METEOR oracle equivalence", baseline_oracles),
        ("predictive power semantics", algorithm_semantics),
        ("worked-example ordering", worked_example),
        ("dataset-scale replication", replication),
        ("t-test and tau-b fidelity", statistics),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (status, detail) = match run() {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("{status} {}: {name}: {detail}", i + 1);
    }
    if failed > 0 {
        eprintln!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
