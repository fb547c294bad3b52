//! C ABI for bibclass.
//!
//! Every fallible function returns a [`BcStatus`]. On failure the message is
//! kept per thread and can be fetched with [`bc_last_error_message`].
//! Handles are opaque; free each one with its matching `*_free` function.
//! Database sets are reported as bit masks where bit `i` is the database at
//! index `i` of the model or graph, so at most 64 databases are supported.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

use bibclass::bayes::score_record;
use bibclass::corpus;
use bibclass::{
    citation_ratio, classify_citations, BibRecord, CategoryModel, CitationClassifierConfig,
    CitationGraph, DatabaseId, Error, TextClassifierConfig, TokenizerConfig,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    CorruptModel = 5,
    VersionMismatch = 6,
    UnknownDatabase = 7,
    InvalidConfig = 8,
    BufferTooSmall = 9,
    Data = 10,
    Panic = 11,
}

const MAX_DATABASES: usize = 64;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(BcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => BcStatus::Io,
            Error::Parse { .. } => BcStatus::Parse,
            Error::CorruptModel { .. } => BcStatus::CorruptModel,
            Error::VersionMismatch { .. } => BcStatus::VersionMismatch,
            Error::UnknownDatabase(_) => BcStatus::UnknownDatabase,
            Error::InvalidConfig(_) => BcStatus::InvalidConfig,
            _ => BcStatus::Data,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            BcStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            BcStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(BcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(BcStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn opt_path(p: *const c_char, what: &str) -> Result<Option<PathBuf>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(|s| Some(PathBuf::from(s)))
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn names(databases: &[DatabaseId]) -> Result<Vec<CString>, Failure> {
    if databases.len() > MAX_DATABASES {
        return Err(Failure(
            BcStatus::InvalidConfig,
            format!("{} databases exceed the limit of {MAX_DATABASES}", databases.len()),
        ));
    }
    Ok(databases
        .iter()
        .map(|d| CString::new(d.as_str()).expect("database names contain no NUL"))
        .collect())
}

fn mask(set: &BTreeSet<DatabaseId>, databases: &[DatabaseId]) -> u64 {
    databases
        .iter()
        .enumerate()
        .filter(|(_, d)| set.contains(*d))
        .fold(0, |m, (i, _)| m | (1u64 << i))
}

/// A trained category model.
pub struct BcModel {
    model: Arc<CategoryModel>,
    names: Vec<CString>,
}

/// A model bundled with tokenizer settings, thresholds and triggers.
pub struct BcTextClassifier {
    model: Arc<CategoryModel>,
    tokenizer: TokenizerConfig,
    config: TextClassifierConfig,
}

/// A citation graph with citer memberships.
pub struct BcCitationGraph {
    graph: CitationGraph,
    databases: Vec<DatabaseId>,
    names: Vec<CString>,
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Returns a copy of the last error message on this thread, or null when the
/// last call succeeded. Release it with [`bc_string_free`].
#[no_mangle]
pub extern "C" fn bc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn bc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a model file into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bc_model_load(path: *const c_char, out: *mut *mut BcModel) -> BcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let model = corpus::load_model(path)?;
        let names = names(model.databases())?;
        *out = Box::into_raw(Box::new(BcModel {
            model: Arc::new(model),
            names,
        }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`bc_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bc_model_free(model: *mut BcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of databases in the model; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_model_database_count(model: *const BcModel) -> usize {
    model.as_ref().map_or(0, |m| m.names.len())
}

/// Name of database `index`, or null when out of range. The string lives as
/// long as the model handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_model_database_name(model: *const BcModel, index: usize) -> *const c_char {
    model
        .as_ref()
        .and_then(|m| m.names.get(index))
        .map_or(std::ptr::null(), |n| n.as_ptr())
}

/// Builds a text classifier over `model`. The stop list and trigger paths
/// may be null; null stop lists select the bundled defaults and a null
/// trigger path means no triggers. The classifier keeps its own reference to
/// the model, so the model handle may be freed first.
///
/// # Safety
/// `model` must be a live handle, each path null or NUL-terminated, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bc_text_classifier_new(
    model: *const BcModel,
    stopwords_path: *const c_char,
    stopphrases_path: *const c_char,
    triggers_path: *const c_char,
    min_words: usize,
    score_threshold: f64,
    trigger_boost: f64,
    out: *mut *mut BcTextClassifier,
) -> BcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = handle(model, "model")?;
        let stopwords = opt_path(stopwords_path, "stopwords_path")?;
        let stopphrases = opt_path(stopphrases_path, "stopphrases_path")?;
        let tokenizer = TokenizerConfig::from_files(
            stopwords.as_deref(),
            stopphrases.as_deref(),
            bibclass::textpipe::DEFAULT_MIN_TOKEN_LENGTH,
        )?;
        let triggers = match opt_path(triggers_path, "triggers_path")? {
            Some(p) => corpus::load_triggers(p, model.model.databases())?,
            None => Default::default(),
        };
        let config = TextClassifierConfig::new(min_words, score_threshold, triggers, trigger_boost)?;
        config.check_triggers(&tokenizer)?;
        *out = Box::into_raw(Box::new(BcTextClassifier {
            model: Arc::clone(&model.model),
            tokenizer,
            config,
        }));
        Ok(())
    })
}

/// # Safety
/// `classifier` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bc_text_classifier_free(classifier: *mut BcTextClassifier) {
    if !classifier.is_null() {
        drop(Box::from_raw(classifier));
    }
}

fn as_record(text: &str) -> BibRecord {
    BibRecord {
        id: String::new(),
        title: text.to_owned(),
        abstract_text: None,
        year: 0,
        journal: None,
        gold_labels: BTreeSet::new(),
    }
}

/// Writes the boosted per-database scores of `text` into `scores` in model
/// order and the surviving token count into `token_count` (which may be
/// null). `len` must be at least the model's database count.
///
/// # Safety
/// `classifier` must be a live handle, `text` NUL-terminated, and `scores`
/// valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn bc_text_classifier_score(
    classifier: *const BcTextClassifier,
    text: *const c_char,
    scores: *mut f64,
    len: usize,
    token_count: *mut usize,
) -> BcStatus {
    guard(|| {
        let c = handle(classifier, "classifier")?;
        let text = str_arg(text, "text")?;
        if scores.is_null() {
            return Err(null("scores"));
        }
        let k = c.model.databases().len();
        if len < k {
            return Err(Failure(
                BcStatus::BufferTooSmall,
                format!("score buffer holds {len} values, need {k}"),
            ));
        }
        let score = score_record(&c.model, &c.tokenizer, &c.config, &as_record(text));
        let out = std::slice::from_raw_parts_mut(scores, k);
        for (slot, db) in out.iter_mut().zip(c.model.databases()) {
            *slot = score.score(db).unwrap_or(0.0);
        }
        if !token_count.is_null() {
            *token_count = score.token_count;
        }
        Ok(())
    })
}

/// Writes the databases assigned to `text` as a bit mask in model order.
///
/// # Safety
/// `classifier` must be a live handle, `text` NUL-terminated and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bc_text_classifier_classify(
    classifier: *const BcTextClassifier,
    text: *const c_char,
    out: *mut u64,
) -> BcStatus {
    guard(|| {
        let c = handle(classifier, "classifier")?;
        let text = str_arg(text, "text")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let set = bibclass::classify_text(&c.model, &c.tokenizer, &c.config, &as_record(text));
        *out = mask(&set, c.model.databases());
        Ok(())
    })
}

/// Loads a citation graph. `memberships_path` lists citer memberships;
/// `records_path` adds corpus records as known citers without membership;
/// `databases` is a comma separated list. Any of the three may be null;
/// a null list selects the default databases.
///
/// # Safety
/// Every non-null pointer argument must be NUL-terminated and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bc_citation_graph_load(
    citations_path: *const c_char,
    memberships_path: *const c_char,
    records_path: *const c_char,
    databases: *const c_char,
    out: *mut *mut BcCitationGraph,
) -> BcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let citations = str_arg(citations_path, "citations_path")?;
        let databases = if databases.is_null() {
            corpus::default_databases()
        } else {
            corpus::parse_database_list(str_arg(databases, "databases")?)?
        };
        let names = names(&databases)?;
        let members = match opt_path(memberships_path, "memberships_path")? {
            Some(p) => corpus::load_memberships(p, &databases)?.memberships,
            None => Default::default(),
        };
        let records = match opt_path(records_path, "records_path")? {
            Some(p) => corpus::load_records(p)?.records,
            None => Vec::new(),
        };
        let known = corpus::known_universe(&records, &members);
        let (graph, _) = corpus::load_citations(citations, &known)?;
        *out = Box::into_raw(Box::new(BcCitationGraph {
            graph,
            databases,
            names,
        }));
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bc_citation_graph_free(graph: *mut BcCitationGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of databases in the graph; 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_citation_graph_database_count(graph: *const BcCitationGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.names.len())
}

/// Name of database `index`, or null when out of range.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bc_citation_graph_database_name(
    graph: *const BcCitationGraph,
    index: usize,
) -> *const c_char {
    graph
        .as_ref()
        .and_then(|g| g.names.get(index))
        .map_or(std::ptr::null(), |n| n.as_ptr())
}

/// Writes the number of distinct known citers of `record_id` and the share
/// of them that belong to `database`.
///
/// # Safety
/// `graph` must be a live handle, the strings NUL-terminated, and `total`
/// and `ratio` writable.
#[no_mangle]
pub unsafe extern "C" fn bc_citation_ratio(
    graph: *const BcCitationGraph,
    record_id: *const c_char,
    database: *const c_char,
    total: *mut usize,
    ratio: *mut f64,
) -> BcStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        let id = str_arg(record_id, "record_id")?;
        let name = str_arg(database, "database")?;
        if total.is_null() || ratio.is_null() {
            return Err(null("output"));
        }
        let db = g
            .databases
            .iter()
            .find(|d| d.as_str() == name)
            .ok_or_else(|| Failure::from(Error::UnknownDatabase(name.to_owned())))?;
        let (t, r) = citation_ratio(&g.graph, id, db);
        *total = t;
        *ratio = r;
        Ok(())
    })
}

/// Writes the databases assigned to `record_id` by citation as a bit mask in
/// graph order.
///
/// # Safety
/// `graph` must be a live handle, `record_id` NUL-terminated and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn bc_classify_citations(
    graph: *const BcCitationGraph,
    record_id: *const c_char,
    min_citations: usize,
    ratio_threshold: f64,
    out: *mut u64,
) -> BcStatus {
    guard(|| {
        let g = handle(graph, "graph")?;
        let id = str_arg(record_id, "record_id")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = CitationClassifierConfig::new(min_citations, ratio_threshold)?;
        let set = classify_citations(&g.graph, &config, id);
        *out = mask(&set, &g.databases);
        Ok(())
    })
}
