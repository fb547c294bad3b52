//! Brute-force reference computations. Nothing here calls into the scoring,
//! graph or evaluation code under test; only tokenization is shared.

use std::collections::{HashMap, HashSet};

/// Naive Bayes recomputed from raw training documents on every query.
pub struct OracleNb {
    databases: Vec<String>,
    alpha: f64,
    counts: HashMap<(usize, String), u64>,
    totals: Vec<u64>,
    docs: Vec<u64>,
    vocabulary: usize,
}

impl OracleNb {
    /// `docs` pairs each document's tokens with its labels.
    pub fn train(databases: &[&str], docs: &[(Vec<String>, Vec<String>)], alpha: f64) -> Self {
        let mut counts = HashMap::new();
        let mut totals = vec![0u64; databases.len()];
        let mut doc_counts = vec![0u64; databases.len()];
        let mut vocab = HashSet::new();
        for (tokens, labels) in docs {
            for (d, name) in databases.iter().enumerate() {
                if !labels.iter().any(|l| l == name) {
                    continue;
                }
                doc_counts[d] += 1;
                totals[d] += tokens.len() as u64;
                for t in tokens {
                    *counts.entry((d, t.clone())).or_insert(0) += 1;
                    vocab.insert(t.clone());
                }
            }
        }
        OracleNb {
            databases: databases.iter().map(|s| s.to_string()).collect(),
            alpha,
            counts,
            totals,
            docs: doc_counts,
            vocabulary: vocab.len(),
        }
    }

    pub fn probability(&self, d: usize, term: &str) -> f64 {
        let c = *self.counts.get(&(d, term.to_string())).unwrap_or(&0) as f64;
        (c + self.alpha) / (self.totals[d] as f64 + self.alpha * self.vocabulary as f64)
    }

    /// Posterior per database, in `databases` order, without triggers.
    pub fn posterior(&self, tokens: &[String]) -> Vec<f64> {
        let all_docs: u64 = self.docs.iter().sum();
        let k = self.databases.len();
        let prior: Vec<f64> = if all_docs == 0 {
            vec![1.0 / k as f64; k]
        } else {
            self.docs.iter().map(|&c| c as f64 / all_docs as f64).collect()
        };
        if tokens.is_empty() {
            return prior;
        }
        let n = tokens.len() as f64;
        let logit: Vec<f64> = (0..k)
            .map(|d| {
                let mut ll = 0.0;
                for t in tokens {
                    ll += self.probability(d, t).ln();
                }
                prior[d].ln() + ll / n
            })
            .collect();
        (0..k)
            .map(|i| {
                if logit[i] == f64::NEG_INFINITY {
                    return 0.0;
                }
                let denom: f64 = (0..k).map(|j| (logit[j] - logit[i]).exp()).sum();
                1.0 / denom
            })
            .collect()
    }

    /// Posterior with trigger boosts applied.
    pub fn boosted(&self, tokens: &[String], triggers: &[(String, String)], boost: f64) -> Vec<f64> {
        let mut scores = self.posterior(tokens);
        for (d, name) in self.databases.iter().enumerate() {
            let hit = triggers
                .iter()
                .any(|(db, term)| db == name && tokens.iter().any(|t| t == term));
            if hit {
                scores[d] = (scores[d] + boost).min(1.0);
            }
        }
        scores
    }

    /// Whether `db` is assigned under thresholds `nt` and `st`.
    pub fn assigns(
        &self,
        tokens: &[String],
        triggers: &[(String, String)],
        boost: f64,
        db: &str,
        nt: usize,
        st: f64,
    ) -> bool {
        if tokens.len() < nt {
            return false;
        }
        let d = self.databases.iter().position(|x| x == db).unwrap();
        self.boosted(tokens, triggers, boost)[d] >= st
    }
}

/// Citation classification recounted from the raw edge list.
pub struct OracleCitations<'a> {
    pub edges: &'a [(String, String)],
    pub known: &'a HashMap<String, Vec<String>>,
}

impl OracleCitations<'_> {
    /// Distinct known citers of `record`, excluding itself.
    pub fn citers(&self, record: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for (citing, cited) in self.edges {
            if cited == record && citing != record && self.known.contains_key(citing) && !out.contains(&citing.as_str()) {
                out.push(citing);
            }
        }
        out
    }

    pub fn counts(&self, record: &str, db: &str) -> (usize, usize) {
        let citers = self.citers(record);
        let hits = citers
            .iter()
            .filter(|c| self.known[**c].iter().any(|d| d == db))
            .count();
        (citers.len(), hits)
    }

    pub fn assigns(&self, record: &str, db: &str, nc: usize, rc: f64) -> bool {
        let (total, hits) = self.counts(record, db);
        total >= nc && total > 0 && hits as f64 / total as f64 >= rc
    }
}

/// `(tp, fp, fn)` for parallel slices of predictions and gold flags.
pub fn confusion(predicted: &[bool], gold: &[bool]) -> (usize, usize, usize) {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for i in 0..predicted.len() {
        if predicted[i] && gold[i] {
            tp += 1;
        }
        if predicted[i] && !gold[i] {
            fp += 1;
        }
        if !predicted[i] && gold[i] {
            fn_ += 1;
        }
    }
    (tp, fp, fn_)
}

pub fn parse_edges(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let mut parts = l.split('\t');
            Some((parts.next()?.to_string(), parts.next()?.to_string()))
        })
        .collect()
}

pub fn parse_memberships(text: &str) -> HashMap<String, Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (id, dbs) = l.split_once('\t').unwrap_or((l, ""));
            (
                id.to_string(),
                dbs.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect(),
            )
        })
        .collect()
}

pub fn parse_triggers(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t'))
        .map(|(d, t)| (d.to_string(), t.to_string()))
        .collect()
}
