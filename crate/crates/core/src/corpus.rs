//! Record, citation, membership and model files.
//!
//! Every loader here is single-pass and returns an immutable result together
//! with counts of what it skipped, so callers can surface warnings without
//! re-reading input.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::bayes::CategoryModel;
use crate::citegraph::{CitationGraph, EdgeStats};
use crate::error::{Error, Result};

/// Name of a subject database (e.g. `astronomy`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DatabaseId(String);

impl DatabaseId {
    /// Database names are used as bare fields in tab and comma separated
    /// files, so they may not be empty or contain separators or whitespace.
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ',') {
            return Err(Error::config(format!("invalid database name {name:?}")));
        }
        Ok(DatabaseId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DatabaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub const DEFAULT_DATABASES: [&str; 3] = ["astronomy", "physics", "general"];

pub fn default_databases() -> Vec<DatabaseId> {
    DEFAULT_DATABASES
        .iter()
        .map(|name| DatabaseId((*name).to_owned()))
        .collect()
}

/// Parses a comma separated database list, rejecting duplicates.
pub fn parse_database_list(list: &str) -> Result<Vec<DatabaseId>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let db = DatabaseId::new(name)?;
        if !seen.insert(db.clone()) {
            return Err(Error::config(format!("database {name:?} listed twice")));
        }
        out.push(db);
    }
    if out.is_empty() {
        return Err(Error::config("database list is empty"));
    }
    Ok(out)
}

/// One bibliographic item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibRecord {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    pub year: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<String>,
    #[serde(rename = "labels", default)]
    pub gold_labels: BTreeSet<DatabaseId>,
}

impl BibRecord {
    /// Title and abstract joined by a space; this is what gets classified.
    pub fn text(&self) -> String {
        match &self.abstract_text {
            Some(abs) => format!("{} {}", self.title, abs),
            None => self.title.clone(),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.id.chars().any(char::is_whitespace) {
            return Err(format!("id {:?} contains whitespace", self.id));
        }
        if self.title.trim().is_empty() {
            return Err(format!("record {:?} has no title", self.id));
        }
        Ok(())
    }
}

/// A citation from `citing_id` to `cited_id`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CitationEdge {
    pub citing_id: String,
    pub cited_id: String,
}

/// Maps a record id to the databases it belongs to.
pub type Memberships = BTreeMap<String, BTreeSet<DatabaseId>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordLoad {
    pub records: Vec<BibRecord>,
    /// Malformed lines that were skipped.
    pub skipped: usize,
    /// Non-blank lines read.
    pub total_lines: usize,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Loads a line-delimited JSON records file.
///
/// Malformed lines are skipped with a warning. Blank lines are ignored and
/// not counted. A repeated id is fatal.
pub fn load_records(path: impl AsRef<Path>) -> Result<RecordLoad> {
    let path = path.as_ref();
    let reader = open(path)?;
    let mut ids = HashSet::new();
    let mut out = RecordLoad {
        records: Vec::new(),
        skipped: 0,
        total_lines: 0,
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.total_lines += 1;
        let parsed = serde_json::from_str::<BibRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|r| r.validate().map(|_| r));
        match parsed {
            Ok(record) => {
                if !ids.insert(record.id.clone()) {
                    return Err(Error::DuplicateId {
                        path: path.to_owned(),
                        id: record.id,
                        line: idx + 1,
                    });
                }
                out.records.push(record);
            }
            Err(reason) => {
                warn!("{}:{}: skipping record: {reason}", path.display(), idx + 1);
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

/// Writes records in the same line-delimited format `load_records` reads.
pub fn save_records(records: &[BibRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for record in records {
        let line = serde_json::to_string(record).expect("records always serialize");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Yields `(line_number, trimmed_line)` for every line that is neither blank
/// nor a `#` comment.
fn content_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (idx, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.push((idx + 1, trimmed.to_owned()));
    }
    Ok(out)
}

/// Reads a one-entry-per-line list (stop words, stop phrases).
pub fn read_term_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    Ok(content_lines(path.as_ref())?
        .into_iter()
        .map(|(_, line)| line)
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MembershipLoad {
    pub memberships: Memberships,
    /// Database names outside the configured set, dropped.
    pub unknown_labels: usize,
    pub skipped: usize,
}

/// Loads `record_id<TAB>db1,db2,...`. Names outside `databases` are dropped
/// with a warning so classification never emits an unconfigured database.
pub fn load_memberships(path: impl AsRef<Path>, databases: &[DatabaseId]) -> Result<MembershipLoad> {
    let path = path.as_ref();
    let mut out = MembershipLoad::default();
    for (line_no, line) in content_lines(path)? {
        let mut fields = line.splitn(2, '\t');
        let id = fields.next().unwrap_or("").trim();
        if id.is_empty() {
            warn!("{}:{line_no}: skipping membership line without id", path.display());
            out.skipped += 1;
            continue;
        }
        let entry = out.memberships.entry(id.to_owned()).or_default();
        for name in fields.next().unwrap_or("").split(',').map(str::trim) {
            if name.is_empty() {
                continue;
            }
            match databases.iter().find(|db| db.as_str() == name) {
                Some(db) => {
                    entry.insert(db.clone());
                }
                None => {
                    warn!("{}:{line_no}: unknown database {name:?}", path.display());
                    out.unknown_labels += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Every id a citation may come from: the corpus records (with whatever
/// membership the external map gives them, possibly none) plus all external
/// ids with memberships.
pub fn known_universe(records: &[BibRecord], external: &Memberships) -> Memberships {
    let mut known = external.clone();
    for record in records {
        known.entry(record.id.clone()).or_default();
    }
    known
}

/// Parses a `citing<TAB>cited` edge list. Returns the edges in file order and
/// the number of malformed lines.
pub fn read_edges(path: impl AsRef<Path>) -> Result<(Vec<CitationEdge>, usize)> {
    let path = path.as_ref();
    let mut edges = Vec::new();
    let mut malformed = 0;
    for (line_no, line) in content_lines(path)? {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        match fields.as_slice() {
            [citing, cited] if !citing.is_empty() && !cited.is_empty() => {
                edges.push(CitationEdge {
                    citing_id: (*citing).to_owned(),
                    cited_id: (*cited).to_owned(),
                })
            }
            _ => {
                warn!("{}:{line_no}: malformed citation line", path.display());
                malformed += 1;
            }
        }
    }
    Ok((edges, malformed))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CitationLoadStats {
    pub malformed: usize,
    pub edges: EdgeStats,
}

/// Loads a citation file into a graph. `known` supplies both the set of
/// acceptable citing ids and their database memberships.
pub fn load_citations(
    path: impl AsRef<Path>,
    known: &Memberships,
) -> Result<(CitationGraph, CitationLoadStats)> {
    let path = path.as_ref();
    let (edges, malformed) = read_edges(path)?;
    let (graph, stats) = CitationGraph::from_edges(edges, known);
    if stats.self_citations > 0 {
        warn!(
            "{}: dropped {} self-citation(s)",
            path.display(),
            stats.self_citations
        );
    }
    if stats.unknown_citers > 0 {
        warn!(
            "{}: dropped {} edge(s) from unknown citing records",
            path.display(),
            stats.unknown_citers
        );
    }
    Ok((
        graph,
        CitationLoadStats {
            malformed,
            edges: stats,
        },
    ))
}

/// Loads a `database<TAB>term` trigger list.
pub fn load_triggers(
    path: impl AsRef<Path>,
    databases: &[DatabaseId],
) -> Result<BTreeMap<DatabaseId, BTreeSet<String>>> {
    let path = path.as_ref();
    let mut out: BTreeMap<DatabaseId, BTreeSet<String>> = BTreeMap::new();
    for (line_no, line) in content_lines(path)? {
        let parse_err = |reason: String| Error::Parse {
            path: path.to_owned(),
            line: line_no,
            reason,
        };
        let (name, term) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected database<TAB>term".into()))?;
        let db = databases
            .iter()
            .find(|db| db.as_str() == name.trim())
            .ok_or_else(|| parse_err(format!("unknown database {:?}", name.trim())))?;
        let term = term.trim().to_lowercase();
        if term.is_empty() {
            return Err(parse_err("empty trigger term".into()));
        }
        out.entry(db.clone()).or_default().insert(term);
    }
    Ok(out)
}

pub const MODEL_MAGIC: &str = "bibclass-model";
pub const MODEL_VERSION: &str = "v1";

/// Writes the model in the versioned text format:
///
/// ```text
/// bibclass-model v1
/// alpha<TAB>1
/// databases<TAB>astronomy<TAB>physics
/// vocabulary<TAB>5
/// database<TAB>astronomy<TAB>docs<TAB>39<TAB>tokens<TAB>120<TAB>terms<TAB>4
/// galaxy<TAB>12
/// ...
/// end
/// ```
pub fn save_model(model: &CategoryModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    write_model(model, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn write_model(model: &CategoryModel, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{MODEL_MAGIC} {MODEL_VERSION}")?;
    writeln!(w, "alpha\t{}", model.smoothing_alpha())?;
    write!(w, "databases")?;
    for db in model.databases() {
        write!(w, "\t{db}")?;
    }
    writeln!(w)?;
    writeln!(w, "vocabulary\t{}", model.vocabulary_size())?;
    for (idx, db) in model.databases().iter().enumerate() {
        let terms = model.term_counts_at(idx);
        writeln!(
            w,
            "database\t{db}\tdocs\t{}\ttokens\t{}\tterms\t{}",
            model.doc_count_at(idx),
            model.total_tokens_at(idx),
            terms.len()
        )?;
        for (term, count) in terms {
            writeln!(w, "{term}\t{count}")?;
        }
    }
    writeln!(w, "end")
}

struct ModelReader<'a> {
    path: &'a Path,
    lines: std::iter::Peekable<std::vec::IntoIter<(usize, usize, String)>>,
    last: (usize, usize),
}

impl ModelReader<'_> {
    fn corrupt(&self, line: usize, offset: usize, reason: impl Into<String>) -> Error {
        Error::CorruptModel {
            path: self.path.to_owned(),
            line,
            offset,
            reason: reason.into(),
        }
    }

    fn next_line(&mut self) -> Result<(usize, usize, String)> {
        match self.lines.next() {
            Some(item) => {
                self.last = (item.0, item.1);
                Ok(item)
            }
            None => Err(self.corrupt(self.last.0 + 1, self.last.1, "unexpected end of file")),
        }
    }

    /// Reads a `key<TAB>fields...` line and returns the fields.
    fn keyed(&mut self, key: &str) -> Result<(usize, usize, Vec<String>)> {
        let (line, offset, text) = self.next_line()?;
        let mut fields = text.split('\t');
        if fields.next() != Some(key) {
            return Err(self.corrupt(line, offset, format!("expected `{key}` line")));
        }
        Ok((line, offset, fields.map(str::to_owned).collect()))
    }
}

fn parse_num<T: std::str::FromStr>(
    r: &ModelReader<'_>,
    line: usize,
    offset: usize,
    what: &str,
    s: &str,
) -> Result<T> {
    s.parse()
        .map_err(|_| r.corrupt(line, offset, format!("invalid {what} {s:?}")))
}

/// Reads a model written by [`save_model`]. Errors carry the line number and
/// byte offset of the offending line.
pub fn load_model(path: impl AsRef<Path>) -> Result<CategoryModel> {
    let path = path.as_ref();
    let mut raw = Vec::new();
    let mut offset = 0usize;
    let mut reader = open(path)?;
    let mut line_no = 0usize;
    loop {
        let mut buf = Vec::new();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let text = String::from_utf8(buf).map_err(|_| Error::CorruptModel {
            path: path.to_owned(),
            line: line_no,
            offset,
            reason: "invalid UTF-8".into(),
        })?;
        raw.push((line_no, offset, text.trim_end_matches(['\n', '\r']).to_owned()));
        offset += n;
    }

    let mut r = ModelReader {
        path,
        lines: raw.into_iter().peekable(),
        last: (0, 0),
    };

    let (line, off, header) = r.next_line()?;
    match header.split_once(' ') {
        Some((MODEL_MAGIC, version)) if version == MODEL_VERSION => {}
        Some((MODEL_MAGIC, version)) => {
            return Err(Error::VersionMismatch {
                path: path.to_owned(),
                found: version.to_owned(),
                expected: MODEL_VERSION.to_owned(),
            })
        }
        _ => return Err(r.corrupt(line, off, "missing `bibclass-model` header")),
    }

    let (line, off, fields) = r.keyed("alpha")?;
    let alpha: f64 = match fields.as_slice() {
        [a] => parse_num(&r, line, off, "alpha", a)?,
        _ => return Err(r.corrupt(line, off, "expected one alpha value")),
    };

    let (line, off, fields) = r.keyed("databases")?;
    let mut databases = Vec::with_capacity(fields.len());
    for name in &fields {
        databases.push(DatabaseId::new(name.as_str()).map_err(|e| r.corrupt(line, off, e.to_string()))?);
    }

    let (line, off, fields) = r.keyed("vocabulary")?;
    let vocabulary: usize = match fields.as_slice() {
        [v] => parse_num(&r, line, off, "vocabulary size", v)?,
        _ => return Err(r.corrupt(line, off, "expected one vocabulary value")),
    };
    let vocab_at = (line, off);

    let mut term_counts = Vec::with_capacity(databases.len());
    let mut doc_counts = Vec::with_capacity(databases.len());
    for db in &databases {
        let (line, off, fields) = r.keyed("database")?;
        let (docs, tokens, n_terms) = match fields.as_slice() {
            [name, k1, docs, k2, tokens, k3, terms]
                if name == db.as_str() && k1 == "docs" && k2 == "tokens" && k3 == "terms" =>
            {
                (
                    parse_num::<u64>(&r, line, off, "document count", docs)?,
                    parse_num::<u64>(&r, line, off, "token total", tokens)?,
                    parse_num::<usize>(&r, line, off, "term count", terms)?,
                )
            }
            _ => {
                return Err(r.corrupt(line, off, format!("malformed block header for database {db}")))
            }
        };
        let mut counts = BTreeMap::new();
        let mut sum = 0u64;
        for _ in 0..n_terms {
            let (line, off, text) = r.next_line()?;
            let (term, count) = text
                .split_once('\t')
                .ok_or_else(|| r.corrupt(line, off, "expected term<TAB>count"))?;
            if term.is_empty() || term.chars().any(char::is_whitespace) {
                return Err(r.corrupt(line, off, format!("invalid term {term:?}")));
            }
            let count: u64 = parse_num(&r, line, off, "term count", count)?;
            if counts.insert(term.to_owned(), count).is_some() {
                return Err(r.corrupt(line, off, format!("term {term:?} repeated")));
            }
            sum += count;
        }
        if sum != tokens {
            return Err(r.corrupt(
                line,
                off,
                format!("token total {tokens} does not match term counts ({sum})"),
            ));
        }
        term_counts.push(counts);
        doc_counts.push(docs);
    }

    let (line, off, fields) = r.keyed("end")?;
    if !fields.is_empty() {
        return Err(r.corrupt(line, off, "trailing fields after `end`"));
    }
    if let Some((line, off, _)) = r.lines.find(|(_, _, t)| !t.trim().is_empty()) {
        return Err(r.corrupt(line, off, "content after `end`"));
    }

    CategoryModel::from_parts(databases, term_counts, doc_counts, alpha).and_then(|model| {
        if model.vocabulary_size() != vocabulary {
            Err(r.corrupt(
                vocab_at.0,
                vocab_at.1,
                format!(
                    "vocabulary size {vocabulary} does not match terms ({})",
                    model.vocabulary_size()
                ),
            ))
        } else {
            Ok(model)
        }
    })
}
