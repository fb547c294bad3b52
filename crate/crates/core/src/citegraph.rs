//! Citation-ratio classification.
//!
//! A record belongs to a database when enough of the papers citing it come
//! from that database. Each citing paper counts once, and a citer in several
//! databases counts toward each of them.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{CitationEdge, DatabaseId, Memberships};
use crate::error::{Error, Result};

pub const DEFAULT_MIN_CITATIONS: usize = 4;
pub const DEFAULT_RATIO_THRESHOLD: f64 = 0.5;

/// Edges dropped while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeStats {
    pub kept: usize,
    pub duplicates: usize,
    pub self_citations: usize,
    pub unknown_citers: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CitationGraph {
    citers: BTreeMap<String, BTreeSet<String>>,
    memberships: Memberships,
}

impl CitationGraph {
    /// Builds the graph from raw edges. Self-citations and edges whose
    /// citing id is not in `known` are dropped; repeated edges collapse.
    pub fn from_edges(
        edges: impl IntoIterator<Item = CitationEdge>,
        known: &Memberships,
    ) -> (Self, EdgeStats) {
        let mut graph = CitationGraph::default();
        let mut stats = EdgeStats::default();
        for edge in edges {
            if edge.citing_id == edge.cited_id {
                stats.self_citations += 1;
                continue;
            }
            let Some(dbs) = known.get(&edge.citing_id) else {
                stats.unknown_citers += 1;
                continue;
            };
            let set = graph.citers.entry(edge.cited_id).or_default();
            if set.insert(edge.citing_id.clone()) {
                stats.kept += 1;
                graph
                    .memberships
                    .entry(edge.citing_id)
                    .or_insert_with(|| dbs.clone());
            } else {
                stats.duplicates += 1;
            }
        }
        (graph, stats)
    }

    pub fn is_empty(&self) -> bool {
        self.citers.is_empty()
    }

    /// Number of records with at least one citation.
    pub fn cited_count(&self) -> usize {
        self.citers.len()
    }

    pub fn citers_of(&self, record_id: &str) -> impl Iterator<Item = &String> {
        self.citers.get(record_id).into_iter().flatten()
    }

    pub fn membership(&self, citing_id: &str) -> Option<&BTreeSet<DatabaseId>> {
        self.memberships.get(citing_id)
    }

    /// Distinct citing papers and, per database, how many of them belong to it.
    pub fn citation_counts(&self, record_id: &str) -> (usize, BTreeMap<&DatabaseId, usize>) {
        let mut per_db = BTreeMap::new();
        let mut total = 0;
        for citer in self.citers_of(record_id) {
            total += 1;
            for db in self.memberships.get(citer).into_iter().flatten() {
                *per_db.entry(db).or_insert(0) += 1;
            }
        }
        (total, per_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CitationClassifierConfig {
    min_citations: usize,
    ratio_threshold: f64,
}

impl Default for CitationClassifierConfig {
    fn default() -> Self {
        CitationClassifierConfig {
            min_citations: DEFAULT_MIN_CITATIONS,
            ratio_threshold: DEFAULT_RATIO_THRESHOLD,
        }
    }
}

impl CitationClassifierConfig {
    pub fn new(min_citations: usize, ratio_threshold: f64) -> Result<Self> {
        if min_citations < 1 {
            return Err(Error::config("minimum citation count must be at least 1"));
        }
        if !(ratio_threshold > 0.0 && ratio_threshold <= 1.0) {
            return Err(Error::config(format!(
                "ratio threshold must lie in (0, 1], got {ratio_threshold}"
            )));
        }
        Ok(CitationClassifierConfig {
            min_citations,
            ratio_threshold,
        })
    }

    pub fn min_citations(&self) -> usize {
        self.min_citations
    }

    pub fn ratio_threshold(&self) -> f64 {
        self.ratio_threshold
    }
}

/// `(total citers, fraction of citers belonging to db)`; `(0, 0.0)` for an
/// uncited record.
pub fn citation_ratio(graph: &CitationGraph, record_id: &str, db: &DatabaseId) -> (usize, f64) {
    let (total, per_db) = graph.citation_counts(record_id);
    if total == 0 {
        return (0, 0.0);
    }
    let hits = per_db.get(db).copied().unwrap_or(0);
    (total, hits as f64 / total as f64)
}

/// Databases whose citation ratio reaches the threshold, or nothing when the
/// record has fewer than `min_citations` citers.
pub fn classify_citations(
    graph: &CitationGraph,
    config: &CitationClassifierConfig,
    record_id: &str,
) -> BTreeSet<DatabaseId> {
    let (total, per_db) = graph.citation_counts(record_id);
    if total == 0 || total < config.min_citations {
        return BTreeSet::new();
    }
    per_db
        .into_iter()
        .filter(|(_, hits)| *hits as f64 / total as f64 >= config.ratio_threshold)
        .map(|(db, _)| db.clone())
        .collect()
}
