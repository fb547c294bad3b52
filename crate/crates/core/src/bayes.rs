//! Multinomial Naive Bayes over per-database term frequencies.
//!
//! Scoring uses additive smoothing, averages the per-token log likelihood
//! over the document length so short and long records produce scores on the
//! same scale, and maps the per-database log posteriors through a softmax.
//! Database-specific trigger terms then add a capped boost.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use log::warn;
use rayon::prelude::*;

use crate::corpus::{BibRecord, DatabaseId};
use crate::error::{Error, Result};
use crate::textpipe::{filter_tokens, prepare, TokenizerConfig};

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_MIN_WORDS: usize = 5;
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.25;
pub const DEFAULT_TRIGGER_BOOST: f64 = 0.25;

/// Trained term statistics, one block per database.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryModel {
    databases: Vec<DatabaseId>,
    term_counts: Vec<BTreeMap<String, u64>>,
    total_tokens: Vec<u64>,
    doc_counts: Vec<u64>,
    vocabulary_size: usize,
    smoothing_alpha: f64,
}

impl CategoryModel {
    /// Assembles a model from raw counts. Token totals and vocabulary size
    /// are derived; zero counts are dropped.
    pub fn from_parts(
        databases: Vec<DatabaseId>,
        mut term_counts: Vec<BTreeMap<String, u64>>,
        doc_counts: Vec<u64>,
        smoothing_alpha: f64,
    ) -> Result<Self> {
        if !(smoothing_alpha > 0.0 && smoothing_alpha.is_finite()) {
            return Err(Error::config(format!(
                "smoothing alpha must be positive, got {smoothing_alpha}"
            )));
        }
        if term_counts.len() != databases.len() || doc_counts.len() != databases.len() {
            return Err(Error::config("one count block per database required"));
        }
        let unique: BTreeSet<_> = databases.iter().collect();
        if unique.len() != databases.len() {
            return Err(Error::config("database listed twice"));
        }
        for counts in &mut term_counts {
            counts.retain(|_, c| *c > 0);
        }
        let total_tokens = term_counts.iter().map(|c| c.values().sum()).collect();
        let vocabulary_size = term_counts
            .iter()
            .flat_map(|c| c.keys())
            .collect::<BTreeSet<_>>()
            .len();
        Ok(CategoryModel {
            databases,
            term_counts,
            total_tokens,
            doc_counts,
            vocabulary_size,
            smoothing_alpha,
        })
    }

    pub fn databases(&self) -> &[DatabaseId] {
        &self.databases
    }

    pub fn database_index(&self, db: &DatabaseId) -> Option<usize> {
        self.databases.iter().position(|d| d == db)
    }

    fn index_of(&self, db: &DatabaseId) -> Result<usize> {
        self.database_index(db)
            .ok_or_else(|| Error::UnknownDatabase(db.to_string()))
    }

    pub fn term_count(&self, db: &DatabaseId, term: &str) -> Result<u64> {
        let idx = self.index_of(db)?;
        Ok(self.term_counts[idx].get(term).copied().unwrap_or(0))
    }

    pub fn total_tokens(&self, db: &DatabaseId) -> Result<u64> {
        Ok(self.total_tokens[self.index_of(db)?])
    }

    pub fn doc_count(&self, db: &DatabaseId) -> Result<u64> {
        Ok(self.doc_counts[self.index_of(db)?])
    }

    pub(crate) fn term_counts_at(&self, idx: usize) -> &BTreeMap<String, u64> {
        &self.term_counts[idx]
    }

    pub(crate) fn total_tokens_at(&self, idx: usize) -> u64 {
        self.total_tokens[idx]
    }

    pub(crate) fn doc_count_at(&self, idx: usize) -> u64 {
        self.doc_counts[idx]
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary_size
    }

    pub fn smoothing_alpha(&self) -> f64 {
        self.smoothing_alpha
    }

    /// Class priors from document counts, renormalized. Uniform when no
    /// documents were seen at all.
    pub fn priors(&self) -> Vec<f64> {
        let total: u64 = self.doc_counts.iter().sum();
        if total == 0 {
            let n = self.databases.len() as f64;
            return vec![1.0 / n; self.databases.len()];
        }
        self.doc_counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect()
    }

    fn ln_denominator(&self, idx: usize) -> f64 {
        (self.total_tokens[idx] as f64 + self.smoothing_alpha * self.vocabulary_size as f64).ln()
    }

    fn ln_probability_at(&self, idx: usize, term: &str, ln_denom: f64) -> f64 {
        let count = self.term_counts[idx].get(term).copied().unwrap_or(0) as f64;
        (count + self.smoothing_alpha).ln() - ln_denom
    }
}

/// Accumulates counts from labeled documents. Merging is associative and
/// commutative, so partitions can be counted independently.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    databases: Vec<DatabaseId>,
    term_counts: Vec<BTreeMap<String, u64>>,
    doc_counts: Vec<u64>,
}

impl ModelBuilder {
    pub fn new(databases: Vec<DatabaseId>) -> Self {
        let n = databases.len();
        ModelBuilder {
            databases,
            term_counts: vec![BTreeMap::new(); n],
            doc_counts: vec![0; n],
        }
    }

    /// Adds one document to every database in `labels`. Labels outside the
    /// configured set are ignored. Returns whether any label matched.
    pub fn add_document<'a>(
        &mut self,
        tokens: &[String],
        labels: impl IntoIterator<Item = &'a DatabaseId>,
    ) -> bool {
        let mut matched = false;
        for label in labels {
            let Some(idx) = self.databases.iter().position(|d| d == label) else {
                continue;
            };
            matched = true;
            self.doc_counts[idx] += 1;
            let counts = &mut self.term_counts[idx];
            for token in tokens {
                *counts.entry(token.clone()).or_insert(0) += 1;
            }
        }
        matched
    }

    pub fn merge(mut self, other: ModelBuilder) -> Self {
        debug_assert_eq!(self.databases, other.databases);
        for (mine, theirs) in self.term_counts.iter_mut().zip(other.term_counts) {
            for (term, count) in theirs {
                *mine.entry(term).or_insert(0) += count;
            }
        }
        for (mine, theirs) in self.doc_counts.iter_mut().zip(other.doc_counts) {
            *mine += theirs;
        }
        self
    }

    pub fn finish(self, alpha: f64) -> Result<CategoryModel> {
        for (db, &docs) in self.databases.iter().zip(&self.doc_counts) {
            if docs == 0 {
                warn!("no training records labeled {db}; its text score is 0 unless a trigger fires");
            }
        }
        let model = CategoryModel::from_parts(self.databases, self.term_counts, self.doc_counts, alpha)?;
        if model.vocabulary_size == 0 {
            return Err(Error::EmptyVocabulary);
        }
        Ok(model)
    }
}

/// Counts every labeled record into each of its databases. Unlabeled records
/// are not training data and are skipped.
pub fn build_model(
    records: &[BibRecord],
    databases: &[DatabaseId],
    tokenizer: &TokenizerConfig,
    alpha: f64,
) -> Result<CategoryModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::config(format!("smoothing alpha must be positive, got {alpha}")));
    }
    let builder = records
        .par_chunks(256)
        .map(|chunk| {
            let mut b = ModelBuilder::new(databases.to_vec());
            for record in chunk {
                if record.gold_labels.is_empty() {
                    continue;
                }
                let tokens = prepare(&record.text(), tokenizer);
                b.add_document(&tokens, &record.gold_labels);
            }
            b
        })
        .reduce(|| ModelBuilder::new(databases.to_vec()), ModelBuilder::merge);
    builder.finish(alpha)
}

/// Smoothed P(term | db) = (count + α) / (total + α·V).
pub fn term_probability(model: &CategoryModel, term: &str, db: &DatabaseId) -> Result<f64> {
    let idx = model.index_of(db)?;
    let count = model.term_counts[idx].get(term).copied().unwrap_or(0) as f64;
    let alpha = model.smoothing_alpha;
    Ok((count + alpha) / (model.total_tokens[idx] as f64 + alpha * model.vocabulary_size as f64))
}

/// Thresholds and triggers for the text classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TextClassifierConfig {
    min_words: usize,
    score_threshold: f64,
    triggers: BTreeMap<DatabaseId, BTreeSet<String>>,
    trigger_boost: f64,
}

impl Default for TextClassifierConfig {
    fn default() -> Self {
        TextClassifierConfig {
            min_words: DEFAULT_MIN_WORDS,
            score_threshold: DEFAULT_SCORE_THRESHOLD,
            triggers: BTreeMap::new(),
            trigger_boost: DEFAULT_TRIGGER_BOOST,
        }
    }
}

impl TextClassifierConfig {
    pub fn new(
        min_words: usize,
        score_threshold: f64,
        triggers: BTreeMap<DatabaseId, BTreeSet<String>>,
        trigger_boost: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&score_threshold) {
            return Err(Error::config(format!(
                "score threshold must lie in [0, 1], got {score_threshold}"
            )));
        }
        if !(0.0..=1.0).contains(&trigger_boost) {
            return Err(Error::config(format!(
                "trigger boost must lie in [0, 1], got {trigger_boost}"
            )));
        }
        Ok(TextClassifierConfig {
            min_words,
            score_threshold,
            triggers,
            trigger_boost,
        })
    }

    pub fn min_words(&self) -> usize {
        self.min_words
    }

    pub fn score_threshold(&self) -> f64 {
        self.score_threshold
    }

    pub fn trigger_boost(&self) -> f64 {
        self.trigger_boost
    }

    pub fn triggers(&self) -> &BTreeMap<DatabaseId, BTreeSet<String>> {
        &self.triggers
    }

    /// Same config at different thresholds.
    pub fn with_thresholds(&self, min_words: usize, score_threshold: f64) -> Result<Self> {
        Self::new(min_words, score_threshold, self.triggers.clone(), self.trigger_boost)
    }

    /// Every trigger term must pass through `filter_tokens` unchanged or it
    /// could never fire.
    pub fn check_triggers(&self, tokenizer: &TokenizerConfig) -> Result<()> {
        for (db, terms) in &self.triggers {
            for term in terms {
                let as_token = vec![term.clone()];
                if filter_tokens(&as_token, tokenizer) != as_token {
                    return Err(Error::config(format!(
                        "trigger {term:?} for {db} is removed by the tokenizer filters"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-database scores for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct TextScore {
    pub per_db_score: IndexMap<DatabaseId, f64>,
    pub token_count: usize,
    pub classifiable: bool,
    pub triggered: IndexMap<DatabaseId, bool>,
}

impl TextScore {
    pub fn score(&self, db: &DatabaseId) -> Option<f64> {
        self.per_db_score.get(db).copied()
    }

    pub fn argmax(&self) -> Option<&DatabaseId> {
        let mut best: Option<(&DatabaseId, f64)> = None;
        for (db, &s) in &self.per_db_score {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((db, s));
            }
        }
        best.map(|(db, _)| db)
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let n = logits.len() as f64;
        return vec![1.0 / n; logits.len()];
    }
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Length-normalized Naive Bayes posterior for each database.
///
/// For each database the log prior is added to the mean log probability of
/// the tokens; the results are passed through a softmax. With no tokens the
/// scores are the priors.
pub fn score_text(model: &CategoryModel, config: &TextClassifierConfig, tokens: &[String]) -> TextScore {
    let n = tokens.len();
    let priors = model.priors();
    let scores = if n == 0 {
        priors
    } else {
        // Grouping by term makes the sum independent of token order, and
        // exactly doubles when every token is repeated.
        let mut bag: BTreeMap<&str, u64> = BTreeMap::new();
        for t in tokens {
            *bag.entry(t.as_str()).or_insert(0) += 1;
        }
        let logits: Vec<f64> = (0..model.databases.len())
            .map(|idx| {
                let ln_denom = model.ln_denominator(idx);
                let ll: f64 = bag
                    .iter()
                    .map(|(term, &c)| c as f64 * model.ln_probability_at(idx, term, ln_denom))
                    .sum();
                priors[idx].ln() + ll / n as f64
            })
            .collect();
        softmax(&logits)
    };
    TextScore {
        per_db_score: model.databases.iter().cloned().zip(scores).collect(),
        token_count: n,
        classifiable: n >= config.min_words,
        triggered: model.databases.iter().map(|db| (db.clone(), false)).collect(),
    }
}

/// Adds the trigger boost (capped at 1) to every database whose trigger set
/// shares a term with `tokens`.
pub fn apply_triggers(mut score: TextScore, tokens: &[String], config: &TextClassifierConfig) -> TextScore {
    if config.triggers.is_empty() {
        return score;
    }
    let present: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
    for (db, terms) in &config.triggers {
        if !terms.iter().any(|t| present.contains(t.as_str())) {
            continue;
        }
        if let Some(s) = score.per_db_score.get_mut(db) {
            *s = (*s + config.trigger_boost).min(1.0);
            score.triggered.insert(db.clone(), true);
        }
    }
    score
}

/// Databases a boosted score assigns under `config`'s thresholds.
pub fn assign_from_score(score: &TextScore, config: &TextClassifierConfig) -> BTreeSet<DatabaseId> {
    if score.token_count < config.min_words {
        return BTreeSet::new();
    }
    score
        .per_db_score
        .iter()
        .filter(|(_, &s)| s >= config.score_threshold)
        .map(|(db, _)| db.clone())
        .collect()
}

/// Tokenizes, scores and boosts a record's title and abstract.
pub fn score_record(
    model: &CategoryModel,
    tokenizer: &TokenizerConfig,
    config: &TextClassifierConfig,
    record: &BibRecord,
) -> TextScore {
    let tokens = prepare(&record.text(), tokenizer);
    let score = score_text(model, config, &tokens);
    apply_triggers(score, &tokens, config)
}

/// Databases the text classifier assigns to `record`; empty when the record
/// has fewer than `min_words` surviving tokens.
pub fn classify_text(
    model: &CategoryModel,
    tokenizer: &TokenizerConfig,
    config: &TextClassifierConfig,
    record: &BibRecord,
) -> BTreeSet<DatabaseId> {
    assign_from_score(&score_record(model, tokenizer, config, record), config)
}
