//! Combining the classifiers and scoring them against gold labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bayes::{classify_text, score_record, CategoryModel, TextClassifierConfig};
use crate::citegraph::{classify_citations, CitationClassifierConfig, CitationGraph};
use crate::corpus::{BibRecord, DatabaseId};
use crate::error::{Error, Result};
use crate::textpipe::TokenizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Text,
    Citation,
    Combined,
}

impl Mode {
    pub fn uses_text(self) -> bool {
        matches!(self, Mode::Text | Mode::Combined)
    }

    pub fn uses_citations(self) -> bool {
        matches!(self, Mode::Citation | Mode::Combined)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Text => "text",
            Mode::Citation => "citation",
            Mode::Combined => "combined",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Mode::Text),
            "citation" => Ok(Mode::Citation),
            "combined" => Ok(Mode::Combined),
            other => Err(Error::config(format!(
                "unknown mode {other:?} (expected text, citation or combined)"
            ))),
        }
    }
}

/// Databases assigned to one record, and which classifier proposed them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub record_id: String,
    pub databases: BTreeSet<DatabaseId>,
    pub via_text: BTreeSet<DatabaseId>,
    pub via_citation: BTreeSet<DatabaseId>,
}

impl Assignment {
    pub fn new(
        record_id: impl Into<String>,
        via_text: BTreeSet<DatabaseId>,
        via_citation: BTreeSet<DatabaseId>,
    ) -> Self {
        Assignment {
            record_id: record_id.into(),
            databases: via_text.union(&via_citation).cloned().collect(),
            via_text,
            via_citation,
        }
    }
}

/// Union of the text and citation classifiers' assignments.
pub fn classify_combined(
    model: &CategoryModel,
    tokenizer: &TokenizerConfig,
    text_config: &TextClassifierConfig,
    graph: &CitationGraph,
    cite_config: &CitationClassifierConfig,
    record: &BibRecord,
) -> Assignment {
    Assignment::new(
        record.id.clone(),
        classify_text(model, tokenizer, text_config, record),
        classify_citations(graph, cite_config, &record.id),
    )
}

/// The inputs a mode needs. Text and combined modes need a model; citation
/// and combined modes need a graph.
#[derive(Debug, Clone, Copy)]
pub struct Pipeline<'a> {
    pub model: Option<&'a CategoryModel>,
    pub tokenizer: &'a TokenizerConfig,
    pub graph: Option<&'a CitationGraph>,
}

impl<'a> Pipeline<'a> {
    pub fn check(&self, mode: Mode) -> Result<()> {
        if mode.uses_text() && self.model.is_none() {
            return Err(Error::config(format!("{mode} mode requires a model")));
        }
        if mode.uses_citations() && self.graph.is_none() {
            return Err(Error::config(format!("{mode} mode requires citation data")));
        }
        Ok(())
    }

    /// Classifies one record under `mode`. A classifier the mode does not use
    /// contributes nothing.
    pub fn assign(
        &self,
        mode: Mode,
        text_config: &TextClassifierConfig,
        cite_config: &CitationClassifierConfig,
        record: &BibRecord,
    ) -> Assignment {
        let via_text = match (mode.uses_text(), self.model) {
            (true, Some(model)) => classify_text(model, self.tokenizer, text_config, record),
            _ => BTreeSet::new(),
        };
        let via_citation = match (mode.uses_citations(), self.graph) {
            (true, Some(graph)) => classify_citations(graph, cite_config, &record.id),
            _ => BTreeSet::new(),
        };
        Assignment::new(record.id.clone(), via_text, via_citation)
    }

    pub fn assign_all(
        &self,
        mode: Mode,
        text_config: &TextClassifierConfig,
        cite_config: &CitationClassifierConfig,
        records: &[BibRecord],
    ) -> Result<Vec<Assignment>> {
        self.check(mode)?;
        Ok(records
            .par_iter()
            .map(|r| self.assign(mode, text_config, cite_config, r))
            .collect())
    }
}

/// One evaluated parameter combination. Parameters a mode does not use are
/// `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Params {
    pub min_words: Option<usize>,
    pub score_threshold: Option<f64>,
    pub min_citations: Option<usize>,
    pub ratio_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mode: Option<Mode>,
    pub db: DatabaseId,
    pub params: Params,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
}

impl EvalReport {
    /// Precision and recall from raw counts; an empty denominator yields 1.
    pub fn from_counts(db: DatabaseId, tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        EvalReport {
            mode: None,
            db,
            params: Params::default(),
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
        }
    }

    pub fn with_setting(mut self, mode: Mode, params: Params) -> Self {
        self.mode = Some(mode);
        self.params = params;
        self
    }
}

/// Scores assignments for one database against gold labels.
pub fn precision_recall(
    assignments: &[Assignment],
    gold: &BTreeMap<String, BTreeSet<DatabaseId>>,
    db: &DatabaseId,
) -> Result<EvalReport> {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for a in assignments {
        let labels = gold
            .get(&a.record_id)
            .ok_or_else(|| Error::MissingGold(a.record_id.clone()))?;
        match (a.databases.contains(db), labels.contains(db)) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(EvalReport::from_counts(db.clone(), tp, fp, fn_))
}

/// Gold labels keyed by record id.
pub fn gold_map(records: &[BibRecord]) -> BTreeMap<String, BTreeSet<DatabaseId>> {
    records
        .iter()
        .map(|r| (r.id.clone(), r.gold_labels.clone()))
        .collect()
}

/// Value lists for each parameter. Lists are sorted and deduplicated before
/// sweeping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub min_words: Vec<usize>,
    pub score_thresholds: Vec<f64>,
    pub min_citations: Vec<usize>,
    pub ratio_thresholds: Vec<f64>,
}

impl SweepGrid {
    fn normalized(&self, mode: Mode) -> Result<SweepGrid> {
        fn ints(v: &[usize], name: &str, used: bool) -> Result<Vec<usize>> {
            if !used {
                return Ok(Vec::new());
            }
            if v.is_empty() {
                return Err(Error::config(format!("{name} grid is empty")));
            }
            let mut v = v.to_vec();
            v.sort_unstable();
            v.dedup();
            Ok(v)
        }
        fn reals(v: &[f64], name: &str, used: bool) -> Result<Vec<f64>> {
            if !used {
                return Ok(Vec::new());
            }
            if v.is_empty() {
                return Err(Error::config(format!("{name} grid is empty")));
            }
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            Ok(v)
        }
        let grid = SweepGrid {
            min_words: ints(&self.min_words, "N_t", mode.uses_text())?,
            score_thresholds: reals(&self.score_thresholds, "S_t", mode.uses_text())?,
            min_citations: ints(&self.min_citations, "N_c", mode.uses_citations())?,
            ratio_thresholds: reals(&self.ratio_thresholds, "R_c", mode.uses_citations())?,
        };
        for &st in &grid.score_thresholds {
            TextClassifierConfig::new(0, st, BTreeMap::new(), 0.0)?;
        }
        for &nc in &grid.min_citations {
            for &rc in &grid.ratio_thresholds {
                CitationClassifierConfig::new(nc, rc)?;
            }
        }
        Ok(grid)
    }

    /// Parameter tuples in lexicographic order over (N_t, S_t, N_c, R_c).
    fn points(&self, mode: Mode) -> Vec<Params> {
        fn opt<T: Copy>(v: &[T]) -> Vec<Option<T>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for nt in opt(&self.min_words) {
            for st in opt(&self.score_thresholds) {
                for nc in opt(&self.min_citations) {
                    for rc in opt(&self.ratio_thresholds) {
                        out.push(Params {
                            min_words: nt.filter(|_| mode.uses_text()),
                            score_threshold: st.filter(|_| mode.uses_text()),
                            min_citations: nc.filter(|_| mode.uses_citations()),
                            ratio_threshold: rc.filter(|_| mode.uses_citations()),
                        });
                    }
                }
            }
        }
        out
    }
}

/// What a record contributes to every sweep point for one database. Text and
/// citation evidence do not depend on the thresholds, so they are computed
/// once.
struct RecordEvidence {
    gold: bool,
    token_count: usize,
    text_score: f64,
    citations: usize,
    citation_hits: usize,
}

impl RecordEvidence {
    fn text_assigns(&self, nt: usize, st: f64) -> bool {
        self.token_count >= nt && self.text_score >= st
    }

    fn citation_assigns(&self, nc: usize, rc: f64) -> bool {
        self.citations > 0
            && self.citations >= nc
            && self.citation_hits as f64 / self.citations as f64 >= rc
    }
}

/// Evaluates every parameter combination of `grid` over all `records`.
///
/// `text_config` supplies the triggers and boost; its thresholds are replaced
/// by the grid values. Output order is lexicographic over the parameter tuple
/// regardless of evaluation order.
pub fn sweep(
    records: &[BibRecord],
    pipeline: &Pipeline<'_>,
    text_config: &TextClassifierConfig,
    grid: &SweepGrid,
    mode: Mode,
    db: &DatabaseId,
) -> Result<Vec<EvalReport>> {
    pipeline.check(mode)?;
    let grid = grid.normalized(mode)?;
    if let Some(model) = pipeline.model.filter(|_| mode.uses_text()) {
        if model.database_index(db).is_none() {
            return Err(Error::UnknownDatabase(db.to_string()));
        }
    }

    let evidence: Vec<RecordEvidence> = records
        .par_iter()
        .map(|r| {
            let (token_count, text_score) = match pipeline.model.filter(|_| mode.uses_text()) {
                Some(model) => {
                    let s = score_record(model, pipeline.tokenizer, text_config, r);
                    (s.token_count, s.score(db).unwrap_or(0.0))
                }
                None => (0, 0.0),
            };
            let (citations, citation_hits) = match pipeline.graph.filter(|_| mode.uses_citations()) {
                Some(graph) => {
                    let (total, per_db) = graph.citation_counts(&r.id);
                    (total, per_db.get(db).copied().unwrap_or(0))
                }
                None => (0, 0),
            };
            RecordEvidence {
                gold: r.gold_labels.contains(db),
                token_count,
                text_score,
                citations,
                citation_hits,
            }
        })
        .collect();

    let reports = grid
        .points(mode)
        .into_par_iter()
        .map(|p| {
            let (mut tp, mut fp, mut fn_) = (0, 0, 0);
            for ev in &evidence {
                let by_text = match (p.min_words, p.score_threshold) {
                    (Some(nt), Some(st)) => ev.text_assigns(nt, st),
                    _ => false,
                };
                let by_cite = match (p.min_citations, p.ratio_threshold) {
                    (Some(nc), Some(rc)) => ev.citation_assigns(nc, rc),
                    _ => false,
                };
                match (by_text || by_cite, ev.gold) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            EvalReport::from_counts(db.clone(), tp, fp, fn_).with_setting(mode, p)
        })
        .collect();
    Ok(reports)
}

pub const GRID_CSV_HEADER: &str = "mode,db,N_t,S_t,N_c,R_c,tp,fp,fn,precision,recall";

/// Renders reports as CSV. Unused parameters are left blank; reals use six
/// decimal places.
pub fn grid_csv(grid: &[EvalReport]) -> String {
    let mut out = String::with_capacity(64 * (grid.len() + 1));
    out.push_str(GRID_CSV_HEADER);
    out.push('\n');
    for r in grid {
        let mode = r.mode.map(|m| m.to_string()).unwrap_or_default();
        let int = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
        let real = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{mode},{},{},{},{},{},{},{},{},{:.6},{:.6}",
            r.db,
            int(r.params.min_words),
            real(r.params.score_threshold),
            int(r.params.min_citations),
            real(r.params.ratio_threshold),
            r.true_positives,
            r.false_positives,
            r.false_negatives,
            r.precision,
            r.recall,
        );
    }
    out
}

pub fn emit_grid_csv(grid: &[EvalReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if grid.is_empty() {
        return Err(Error::config("refusing to write an empty grid"));
    }
    std::fs::write(path, grid_csv(grid)).map_err(|e| Error::io(path, e))
}
