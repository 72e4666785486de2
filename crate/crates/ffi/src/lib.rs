//! C interface to the posscore library.
//!
//! Every function returns a [`PscStatus`] and writes results through out
//! pointers. On failure, [`psc_last_error_message`] describes the error for
//! the calling thread. Handles are opaque and released with their `_free`
//! function; passing NULL to a `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use posscore::embed::{load_vec, EmbeddingTable};
use posscore::metaeval::{kendall_tau, paired_ttest, predictive_power, AgreementVector};
use posscore::metrics::{BaseMetric, MetricContext};
use posscore::posmetrics::{pos_weight, posscore, ptlc, pwe, PosOptions};
use posscore::text::{tokenize, EvaluationSet, TaggedSentence};
use posscore::{Error, PosTag, TagSet};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    MissingResource = 5,
    /// The quantity is undefined for this input (constant ranks, too few
    /// pairs).
    Undefined = 6,
    Internal = 7,
}

/// Word vectors loaded from a `.vec` file or built from arrays.
pub struct PscEmbeddings(EmbeddingTable);

/// A tokenized, POS-tagged sentence.
pub struct PscSentence(TaggedSentence);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn psc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

struct Failure(PscStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => PscStatus::Io,
            Error::Parse { .. } => PscStatus::Parse,
            Error::MissingResource(_) => PscStatus::MissingResource,
            Error::ConstantInput | Error::InsufficientPairs => PscStatus::Undefined,
            _ => PscStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(PscStatus::NullPointer, format!("{name} is NULL"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(PscStatus::InvalidArgument, message.into())
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PscStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PscStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal error: panic in posscore".into());
            PscStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

/// NULL selects the recommended tag set.
unsafe fn tagset_arg(p: *const c_char) -> Result<TagSet, Failure> {
    if p.is_null() {
        return Ok(TagSet::recommended());
    }
    Ok(str_arg(p, "tagset")?.parse()?)
}

/// Loads a fastText-style `.vec` file (optionally gzipped).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn psc_embeddings_load(path: *const c_char, out: *mut *mut PscEmbeddings) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let table = load_vec(Path::new(str_arg(path, "path")?), None)?;
        *out = Box::into_raw(Box::new(PscEmbeddings(table)));
        Ok(())
    })
}

/// Builds a table from `count` words and a row-major `count * dim` array.
///
/// # Safety
/// `words` must hold `count` strings and `values` `count * dim` floats.
#[no_mangle]
pub unsafe extern "C" fn psc_embeddings_new(
    words: *const *const c_char,
    values: *const f64,
    count: usize,
    dim: usize,
    out: *mut *mut PscEmbeddings,
) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let words = slice_arg(words, count, "words")?;
        let len = count.checked_mul(dim).ok_or_else(|| invalid("count * dim overflows"))?;
        let values = slice_arg(values, len, "values")?;
        let mut pairs = Vec::with_capacity(count);
        for (i, w) in words.iter().enumerate() {
            pairs.push((str_arg(*w, "words[i]")?, values[i * dim..(i + 1) * dim].to_vec()));
        }
        *out = Box::into_raw(Box::new(PscEmbeddings(EmbeddingTable::from_pairs(dim, pairs)?)));
        Ok(())
    })
}

/// # Safety
/// `table` must come from a `psc_embeddings_*` constructor or be NULL.
#[no_mangle]
pub unsafe extern "C" fn psc_embeddings_free(table: *mut PscEmbeddings) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// # Safety
/// `table` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn psc_embeddings_dim(table: *const PscEmbeddings) -> usize {
    table.as_ref().map_or(0, |t| t.0.dim())
}

/// Builds a sentence from parallel arrays of words and UPOS tags. Tags
/// outside the universal set are kept as X.
///
/// # Safety
/// `words` and `tags` must each hold `count` strings.
#[no_mangle]
pub unsafe extern "C" fn psc_sentence_new(
    words: *const *const c_char,
    tags: *const *const c_char,
    count: usize,
    out: *mut *mut PscSentence,
) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let words = slice_arg(words, count, "words")?;
        let tags = slice_arg(tags, count, "tags")?;
        let mut pairs = Vec::with_capacity(count);
        for (w, t) in words.iter().zip(tags) {
            pairs.push((str_arg(*w, "words[i]")?, PosTag::from_label(str_arg(*t, "tags[i]")?)));
        }
        *out = Box::into_raw(Box::new(PscSentence(TaggedSentence::from_pairs(pairs))));
        Ok(())
    })
}

/// # Safety
/// `sentence` must come from `psc_sentence_new` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn psc_sentence_free(sentence: *mut PscSentence) {
    if !sentence.is_null() {
        drop(Box::from_raw(sentence));
    }
}

/// # Safety
/// `sentence` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn psc_sentence_len(sentence: *const PscSentence) -> usize {
    sentence.as_ref().map_or(0, |s| s.0.len())
}

/// POSSCORE of `candidate` against `reference`. `tagset` is a tag-set
/// name such as `ADJ+NOUN`, or NULL for the recommended set.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn psc_posscore(
    reference: *const PscSentence,
    candidate: *const PscSentence,
    tagset: *const c_char,
    table: *const PscEmbeddings,
    count_punct: bool,
    out: *mut f64,
) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let (r, c) = (ref_arg(reference, "reference")?, ref_arg(candidate, "candidate")?);
        let table = ref_arg(table, "table")?;
        let options = PosOptions { count_punct };
        *out = posscore(&r.0, &c.0, &tagset_arg(tagset)?, &table.0, options).value;
        Ok(())
    })
}

unsafe fn pos_metric(
    reference: *const PscSentence,
    candidate: *const PscSentence,
    tagset: *const c_char,
    base: *const c_char,
    table: *const PscEmbeddings,
    out: *mut f64,
    with_tags: bool,
) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let (r, c) = (ref_arg(reference, "reference")?, ref_arg(candidate, "candidate")?);
        let base: BaseMetric = str_arg(base, "base")?.parse()?;
        let tags = tagset_arg(tagset)?;
        let ctx = MetricContext {
            embeddings: table.as_ref().map(|t| &t.0),
            synonyms: None,
        };
        let score = if with_tags {
            ptlc(&r.0, &c.0, &tags, base, &ctx)?
        } else {
            pwe(&r.0, &c.0, &tags, base, &ctx)?
        };
        *out = score.value;
        Ok(())
    })
}

/// `base` (`bleu1`..`bleu4`, `meteor`, `ea`) on the POS words only.
/// `table` may be NULL unless `base` is `ea`.
///
/// # Safety
/// Handles must be live and strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn psc_pwe(
    reference: *const PscSentence,
    candidate: *const PscSentence,
    tagset: *const c_char,
    base: *const c_char,
    table: *const PscEmbeddings,
    out: *mut f64,
) -> PscStatus {
    pos_metric(reference, candidate, tagset, base, table, out, false)
}

/// Like `psc_pwe` with POS tag overlap added.
///
/// # Safety
/// Handles must be live and strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn psc_ptlc(
    reference: *const PscSentence,
    candidate: *const PscSentence,
    tagset: *const c_char,
    base: *const c_char,
    table: *const PscEmbeddings,
    out: *mut f64,
) -> PscStatus {
    pos_metric(reference, candidate, tagset, base, table, out, true)
}

/// A base metric on two raw texts, tokenized internally. `table` may be
/// NULL unless `metric` is `ea`.
///
/// # Safety
/// Strings must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn psc_base_metric(
    metric: *const c_char,
    reference: *const c_char,
    candidate: *const c_char,
    table: *const PscEmbeddings,
    out: *mut f64,
) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let metric: BaseMetric = str_arg(metric, "metric")?.parse()?;
        let r = tokenize(str_arg(reference, "reference")?);
        let c = tokenize(str_arg(candidate, "candidate")?);
        let ctx = MetricContext {
            embeddings: table.as_ref().map(|t| &t.0),
            synonyms: None,
        };
        *out = ctx.compute(metric, &r, &c)?.value;
        Ok(())
    })
}

/// Weight for the POS similarity term given the POS-word fractions of the
/// reference and candidate. `degenerate` (may be NULL) is set when the
/// candidate fraction is 0.
///
/// # Safety
/// `out` must be valid; `degenerate` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn psc_pos_weight(n_ref: f64, n_cand: f64, out: *mut f64, degenerate: *mut bool) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let w = pos_weight(n_ref, n_cand)?;
        *out = w.value;
        if let Some(d) = degenerate.as_mut() {
            *d = w.degenerate;
        }
        Ok(())
    })
}

/// Fraction of `count` sets where the metric orders the two candidates as
/// the human scores do. Metric ties count as wrong; human ties are
/// rejected. `correct` may be NULL.
///
/// # Safety
/// The four arrays must hold `count` values.
#[no_mangle]
pub unsafe extern "C" fn psc_predictive_power(
    human_a: *const f64,
    human_b: *const f64,
    metric_a: *const f64,
    metric_b: *const f64,
    count: usize,
    out: *mut f64,
    correct: *mut usize,
) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let ha = slice_arg(human_a, count, "human_a")?;
        let hb = slice_arg(human_b, count, "human_b")?;
        let ma = slice_arg(metric_a, count, "metric_a")?;
        let mb = slice_arg(metric_b, count, "metric_b")?;
        let corpus = (0..count)
            .map(|i| EvaluationSet::new(i.to_string(), vec![], "", "", "", ha[i], hb[i]))
            .collect::<posscore::Result<Vec<_>>>()?;
        let scores: Vec<(f64, f64)> = ma.iter().copied().zip(mb.iter().copied()).collect();
        let (power, _) = predictive_power("metric", &corpus, &scores)?;
        *out = power.power;
        if let Some(c) = correct.as_mut() {
            *c = power.correct;
        }
        Ok(())
    })
}

/// Two-sided p-value of a paired t-test on two 0/1 agreement arrays.
///
/// # Safety
/// `a` and `b` must hold `count` values.
#[no_mangle]
pub unsafe extern "C" fn psc_paired_ttest(a: *const bool, b: *const bool, count: usize, out: *mut f64) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let ids: Vec<String> = (0..count).map(|i| i.to_string()).collect();
        let vector = |v: &[bool]| AgreementVector {
            set_ids: ids.clone(),
            correct: v.to_vec(),
        };
        let (a, b) = (slice_arg(a, count, "a")?, slice_arg(b, count, "b")?);
        *out = paired_ttest(&vector(a), &vector(b))?;
        Ok(())
    })
}

/// Kendall tau-b. Returns `Undefined` when either input is constant.
///
/// # Safety
/// `x` and `y` must hold `count` values.
#[no_mangle]
pub unsafe extern "C" fn psc_kendall_tau(x: *const f64, y: *const f64, count: usize, out: *mut f64) -> PscStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = kendall_tau(slice_arg(x, count, "x")?, slice_arg(y, count, "y")?)?;
        Ok(())
    })
}
