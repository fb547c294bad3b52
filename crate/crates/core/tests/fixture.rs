mod common;

use std::collections::BTreeSet;

use bibclass::corpus::{self, known_universe};
use bibclass::{build_model, TokenizerConfig};
use common::synth;

#[test]
fn bundled_fixture_matches_generator() {
    let fixture = synth::generate();
    let dir = synth::bundled_dir();
    if std::env::var_os("BIBCLASS_REGENERATE_FIXTURE").is_some() {
        fixture.write_to(&dir);
    }
    let fresh = tempfile::tempdir().unwrap();
    fixture.write_to(fresh.path());
    for name in synth::FILES {
        let bundled = std::fs::read(dir.join(name))
            .unwrap_or_else(|e| panic!("{name}: {e}; set BIBCLASS_REGENERATE_FIXTURE=1 to rebuild"));
        assert!(bundled == std::fs::read(fresh.path().join(name)).unwrap(), "{name} differs from generator output");
    }
}

#[test]
fn fixture_has_sample_shape() {
    let dir = synth::bundled_dir();
    let train = corpus::load_records(dir.join("train.jsonl")).unwrap();
    let test = corpus::load_records(dir.join("test.jsonl")).unwrap();
    assert_eq!((train.records.len(), train.skipped), (synth::TRAIN_RECORDS, 0));
    assert_eq!((test.records.len(), test.skipped), (synth::TEST_RECORDS, 0));

    let astro = common::db("astronomy");
    let positives = train.records.iter().filter(|r| r.gold_labels.contains(&astro)).count();
    assert_eq!(positives, synth::TRAIN_ASTRONOMY);

    let dbs = corpus::default_databases();
    let model = build_model(&train.records, &dbs, &TokenizerConfig::default(), 1.0).unwrap();
    assert_eq!(model.doc_count(&astro).unwrap(), 39);

    let members = corpus::load_memberships(dir.join("memberships.tsv"), &dbs).unwrap();
    let known = known_universe(&test.records, &members.memberships);
    let (graph, stats) = corpus::load_citations(dir.join("citations.tsv"), &known).unwrap();
    let test_ids: BTreeSet<&str> = test.records.iter().map(|r| r.id.as_str()).collect();
    let cited: Vec<&str> = test_ids
        .iter()
        .copied()
        .filter(|id| graph.citers_of(id).next().is_some())
        .collect();
    assert_eq!(cited.len(), synth::TEST_CITED);
    assert_eq!(graph.cited_count(), synth::TEST_CITED);
    assert!(cited.len() < test_ids.len());
    // the noise paths are all exercised
    assert!(stats.edges.duplicates > 0);
    assert!(stats.edges.self_citations > 0);
    assert!(stats.edges.unknown_citers > 0);
}

#[test]
fn ingest_is_idempotent() {
    let dir = synth::bundled_dir();
    let a = corpus::load_records(dir.join("test.jsonl")).unwrap();
    let b = corpus::load_records(dir.join("test.jsonl")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len() + a.skipped, a.total_lines);
}
