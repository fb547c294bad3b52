#![allow(dead_code)]

pub mod oracle;
pub mod synth;

use std::collections::{BTreeSet, HashMap};

use bibclass::corpus::{known_universe, Memberships};
use bibclass::{BibRecord, CitationEdge, CitationGraph, DatabaseId};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const DB_NAMES: [&str; 3] = ["astronomy", "physics", "general"];

pub fn db(name: &str) -> DatabaseId {
    DatabaseId::new(name).unwrap()
}

/// Alphabetic tokens that pass the default filters unchanged.
pub fn toy_vocabulary(size: usize) -> Vec<String> {
    (0..size)
        .map(|i| format!("t{}{}", (b'a' + (i / 26) as u8) as char, (b'a' + (i % 26) as u8) as char))
        .collect()
}

pub fn record(id: String, tokens: &[String], labels: &[String]) -> BibRecord {
    BibRecord {
        id,
        title: if tokens.is_empty() { "1".into() } else { tokens.join(" ") },
        abstract_text: None,
        year: 1987,
        journal: None,
        gold_labels: labels.iter().map(|l| db(l)).collect(),
    }
}

/// A small random corpus with a citation graph, for oracle and property
/// checks.
pub struct ToyWorld {
    pub names: Vec<&'static str>,
    pub databases: Vec<DatabaseId>,
    pub vocabulary: Vec<String>,
    pub alpha: f64,
    pub train_docs: Vec<(Vec<String>, Vec<String>)>,
    pub train: Vec<BibRecord>,
    pub test_docs: Vec<Vec<String>>,
    pub test: Vec<BibRecord>,
    pub edges: Vec<(String, String)>,
    pub external: HashMap<String, Vec<String>>,
}

fn random_labels(rng: &mut ChaCha8Rng, names: &[&str], allow_empty: bool) -> Vec<String> {
    loop {
        let labels: Vec<String> = names
            .iter()
            .filter(|_| rng.random_bool(0.4))
            .map(|s| s.to_string())
            .collect();
        if allow_empty || !labels.is_empty() {
            return labels;
        }
    }
}

pub fn random_doc(rng: &mut ChaCha8Rng, vocabulary: &[String], max_len: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.1) {
                "zunseen".to_string()
            } else {
                vocabulary.choose(rng).unwrap().clone()
            }
        })
        .collect()
}

pub fn toy_world(rng: &mut ChaCha8Rng) -> ToyWorld {
    let k = rng.random_range(2..=3);
    let names: Vec<&'static str> = DB_NAMES[..k].to_vec();
    let vocabulary = toy_vocabulary(rng.random_range(3..=30));
    let alpha = [0.25, 0.5, 1.0, 2.0].choose(rng).copied().unwrap();

    let n_train = rng.random_range(1..=20);
    let mut train_docs = Vec::new();
    while train_docs.len() < n_train {
        let len = rng.random_range(1..=12);
        let tokens: Vec<String> = (0..len).map(|_| vocabulary.choose(rng).unwrap().clone()).collect();
        train_docs.push((tokens, random_labels(rng, &names, false)));
    }
    let train = train_docs
        .iter()
        .enumerate()
        .map(|(i, (t, l))| record(format!("train{i}"), t, l))
        .collect();

    let n_test = rng.random_range(1..=20);
    let test_docs: Vec<Vec<String>> = (0..n_test).map(|_| random_doc(rng, &vocabulary, 12)).collect();
    let test = test_docs
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let labels = random_labels(rng, &names, true);
            record(format!("test{i}"), t, &labels)
        })
        .collect::<Vec<_>>();

    let n_ext = rng.random_range(1..=8);
    let external: HashMap<String, Vec<String>> = (0..n_ext)
        .map(|i| (format!("ext{i}"), random_labels(rng, &names, true)))
        .collect();
    let mut citing_pool: Vec<String> = external.keys().cloned().collect();
    citing_pool.sort();
    citing_pool.extend((0..n_test).map(|i| format!("test{i}")));
    citing_pool.push("stranger".into());
    let n_edges = rng.random_range(0..=50);
    let edges = (0..n_edges)
        .map(|_| {
            let citing = citing_pool.choose(rng).unwrap().clone();
            let cited = format!("test{}", rng.random_range(0..n_test));
            (citing, cited)
        })
        .collect();

    ToyWorld {
        databases: names.iter().map(|n| db(n)).collect(),
        names,
        vocabulary,
        alpha,
        train_docs,
        train,
        test_docs,
        test,
        edges,
        external,
    }
}

impl ToyWorld {
    pub fn external_memberships(&self) -> Memberships {
        self.external
            .iter()
            .map(|(id, dbs)| (id.clone(), dbs.iter().map(|d| db(d)).collect::<BTreeSet<_>>()))
            .collect()
    }

    pub fn graph(&self) -> CitationGraph {
        let known = known_universe(&self.test, &self.external_memberships());
        let edges = self.edges.iter().map(|(a, b)| CitationEdge {
            citing_id: a.clone(),
            cited_id: b.clone(),
        });
        CitationGraph::from_edges(edges, &known).0
    }

    /// Known citing ids with memberships, as the oracle sees them.
    pub fn oracle_known(&self) -> HashMap<String, Vec<String>> {
        let mut known = self.external.clone();
        for r in &self.test {
            known.entry(r.id.clone()).or_default();
        }
        known
    }
}
