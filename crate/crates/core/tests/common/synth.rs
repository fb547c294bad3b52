//! Deterministic synthetic corpus shaped like a small journal sample: 400
//! training records with 39 astronomy positives, and 4033 test records of
//! which 434 are cited.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use bibclass::corpus::save_records;
use bibclass::{BibRecord, DatabaseId};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x00b1_bc1a_5519;
pub const TRAIN_RECORDS: usize = 400;
pub const TRAIN_ASTRONOMY: usize = 39;
pub const TRAIN_PHYSICS: usize = 60;
pub const TEST_RECORDS: usize = 4033;
pub const TEST_CITED: usize = 434;

const ASTRO: &[&str] = &[
    "galaxy", "galaxies", "quasar", "quasars", "pulsar", "pulsars", "nebula", "supernova",
    "supernovae", "stellar", "star", "stars", "telescope", "redshift", "cosmic", "cosmology",
    "interstellar", "accretion", "binary", "dwarf", "giant", "solar", "sunspot", "comet",
    "asteroid", "orbit", "photometry", "luminosity", "halo", "globular", "galactic",
    "extragalactic", "infrared", "gamma", "burst", "hubble", "eclipse", "corona", "protostar",
    "exoplanet", "meteorite", "lunar", "planetary", "jupiter", "saturn", "magnitude",
];
const PHYSICS: &[&str] = &[
    "quantum", "laser", "lasers", "photon", "photons", "electron", "electrons",
    "superconductivity", "superconductor", "semiconductor", "lattice", "crystal", "phonon",
    "magnetic", "spin", "boson", "fermion", "quark", "quarks", "hadron", "collider", "neutrino",
    "plasma", "fluid", "turbulence", "condensate", "optical", "atom", "atoms", "atomic",
    "nuclear", "fusion", "entropy", "thermodynamics", "dielectric", "tunnelling",
    "interferometer", "scattering", "resonance", "oscillator", "topological", "superfluid",
];
const GENERAL: &[&str] = &[
    "protein", "proteins", "gene", "genes", "genome", "cell", "cells", "enzyme", "virus",
    "bacteria", "immune", "neuron", "neurons", "brain", "evolution", "species", "fossil",
    "ecology", "climate", "forest", "soil", "plant", "plants", "disease", "vaccine", "dna", "rna",
    "mutation", "chemistry", "catalyst", "synthesis", "receptor", "hormone", "tissue", "embryo",
    "primate", "insect", "mammal", "malaria", "agriculture", "policy", "funding", "research",
    "university", "science", "government", "economy", "education",
];
const GEO: &[&str] = &[
    "earthquake", "seismic", "mantle", "crust", "volcano", "volcanic", "magnetosphere",
    "ionosphere", "atmosphere", "ozone", "tectonic", "geomagnetic", "aurora", "glacier",
    "meteor", "impact", "crater", "core",
];
const COMMON: &[&str] = &[
    "study", "evidence", "results", "analysis", "observations", "measurements", "model",
    "models", "structure", "properties", "effect", "effects", "role", "origin", "nature",
    "high", "low", "large", "small", "first", "rapid", "early", "system", "systems", "dynamics",
    "formation", "distribution", "energy", "temperature", "density", "signal", "detection",
];
const STOP: &[&str] = &["the", "of", "and", "in", "on", "a", "for", "with"];
const PREFIXES: &[&str] = &["Obituary:", "Book review:", "Editorial:", "News and views:"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Topic {
    Astro,
    Physics,
    General,
    Geo,
}

impl Topic {
    fn pool(self) -> &'static [&'static str] {
        match self {
            Topic::Astro => ASTRO,
            Topic::Physics => PHYSICS,
            Topic::General => GENERAL,
            Topic::Geo => GEO,
        }
    }
}

pub struct Fixture {
    pub train: Vec<BibRecord>,
    pub test: Vec<BibRecord>,
    pub citations: String,
    pub memberships: String,
    pub triggers: String,
}

pub const FILES: [&str; 5] = [
    "train.jsonl",
    "test.jsonl",
    "citations.tsv",
    "memberships.tsv",
    "triggers.tsv",
];

fn db(name: &str) -> DatabaseId {
    DatabaseId::new(name).unwrap()
}

fn labels(names: &[&str]) -> BTreeSet<DatabaseId> {
    names.iter().map(|n| db(n)).collect()
}

fn word(rng: &mut ChaCha8Rng, topic: Topic) -> String {
    let roll: f64 = rng.random();
    let pool = if roll < 0.55 {
        topic.pool()
    } else if roll < 0.80 {
        COMMON
    } else if roll < 0.90 {
        [ASTRO, PHYSICS, GENERAL, GEO].choose(rng).unwrap()
    } else if roll < 0.98 {
        STOP
    } else {
        return rng.random_range(1900..2000).to_string();
    };
    pool.choose(rng).unwrap().to_string()
}

fn sentence(rng: &mut ChaCha8Rng, topic: Topic, len: usize) -> String {
    let words: Vec<String> = (0..len).map(|_| word(rng, topic)).collect();
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s
}

fn make_record(
    rng: &mut ChaCha8Rng,
    id: String,
    year: i32,
    topic: Topic,
    gold: BTreeSet<DatabaseId>,
    abstract_rate: f64,
) -> BibRecord {
    let short_item = rng.random_bool(0.12);
    let title_len = if short_item { rng.random_range(1..5) } else { rng.random_range(3..13) };
    let mut title = sentence(rng, topic, title_len);
    if short_item {
        title = format!("{} {title}", PREFIXES.choose(rng).unwrap());
    }
    if rng.random_bool(0.05) {
        title = title.replacen(' ', "-", 1);
    }
    let abstract_text = (!short_item && rng.random_bool(abstract_rate)).then(|| {
        let len = rng.random_range(20..50);
        format!("{}.", sentence(rng, topic, len))
    });
    BibRecord {
        id,
        title,
        abstract_text,
        year,
        journal: Some("Synthetic Letters".into()),
        gold_labels: gold,
    }
}

fn test_topic(rng: &mut ChaCha8Rng) -> (Topic, BTreeSet<DatabaseId>) {
    let roll: f64 = rng.random();
    if roll < 0.08 {
        let gold = if rng.random_bool(0.2) {
            labels(&["astronomy", "physics"])
        } else {
            labels(&["astronomy"])
        };
        (Topic::Astro, gold)
    } else if roll < 0.22 {
        (Topic::Physics, labels(&["physics"]))
    } else if roll < 0.30 {
        let gold = if rng.random_bool(0.35) {
            labels(&["astronomy"])
        } else {
            labels(&["general"])
        };
        (Topic::Geo, gold)
    } else {
        (Topic::General, labels(&["general"]))
    }
}

pub fn generate() -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // training: exactly 39 astronomy-labeled records
    let mut plan: Vec<(Topic, BTreeSet<DatabaseId>)> = Vec::with_capacity(TRAIN_RECORDS);
    for i in 0..TRAIN_ASTRONOMY {
        let topic = if i < 34 { Topic::Astro } else { Topic::Geo };
        plan.push((topic, labels(&["astronomy"])));
    }
    for i in 0..TRAIN_PHYSICS {
        let topic = if i < 55 { Topic::Physics } else { Topic::Geo };
        plan.push((topic, labels(&["physics"])));
    }
    while plan.len() < TRAIN_RECORDS {
        plan.push((Topic::General, labels(&["general"])));
    }
    plan.shuffle(&mut rng);
    let train: Vec<BibRecord> = plan
        .into_iter()
        .enumerate()
        .map(|(i, (topic, gold))| make_record(&mut rng, format!("n1987.{:04}", i + 1), 1987, topic, gold, 0.6))
        .collect();

    let mut topics = Vec::with_capacity(TEST_RECORDS);
    let test: Vec<BibRecord> = (0..TEST_RECORDS)
        .map(|i| {
            let (topic, gold) = test_topic(&mut rng);
            topics.push(topic);
            make_record(&mut rng, format!("n1997.{:04}", i + 1), 1997, topic, gold, 0.35)
        })
        .collect();

    // external citing papers with known memberships
    let pools: [(&str, &[&str]); 4] = [
        ("ext.a", &["astronomy"]),
        ("ext.p", &["physics"]),
        ("ext.g", &["general"]),
        ("ext.ap", &["astronomy", "physics"]),
    ];
    let pool_size = 400;
    let mut memberships = String::from("# citing record memberships\n");
    for (prefix, dbs) in pools {
        for j in 0..pool_size {
            let _ = writeln!(memberships, "{prefix}.{j:04}\t{}", dbs.join(","));
        }
    }

    let mut cited: Vec<usize> = (0..TEST_RECORDS).collect();
    cited.shuffle(&mut rng);
    cited.truncate(TEST_CITED);
    cited.sort_unstable();

    let mut citations = String::from("# citing_id\tcited_id\n");
    for &idx in &cited {
        let record = &test[idx];
        let gold = &record.gold_labels;
        // pool weights: astronomy, physics, general, astro+physics
        let weights: [f64; 4] = if gold.contains(&db("astronomy")) {
            [0.70, 0.12, 0.10, 0.08]
        } else if topics[idx] == Topic::Geo {
            [0.35, 0.15, 0.45, 0.05]
        } else if gold.contains(&db("physics")) {
            [0.10, 0.70, 0.12, 0.08]
        } else {
            [0.10, 0.15, 0.72, 0.03]
        };
        let n = rng.random_range(1..=12);
        for k in 0..n {
            // corpus records cite too; they carry no membership
            if k > 0 && rng.random_bool(0.06) {
                let citer = &test[rng.random_range(0..TEST_RECORDS)].id;
                let _ = writeln!(citations, "{citer}\t{}", record.id);
                continue;
            }
            let roll: f64 = rng.random();
            let mut acc = 0.0;
            let mut which = 3;
            for (p, w) in weights.iter().enumerate() {
                acc += w;
                if roll < acc {
                    which = p;
                    break;
                }
            }
            let citer = format!("{}.{:04}", pools[which].0, rng.random_range(0..pool_size));
            let _ = writeln!(citations, "{citer}\t{}", record.id);
            if rng.random_bool(0.03) {
                let _ = writeln!(citations, "{citer}\t{}", record.id);
            }
        }
        if rng.random_bool(0.02) {
            let _ = writeln!(citations, "{}\t{}", record.id, record.id);
        }
        if rng.random_bool(0.03) {
            let _ = writeln!(citations, "ext.unlisted.{:04}\t{}", rng.random_range(0..100), record.id);
        }
    }

    let triggers = "\
# database<TAB>term
astronomy\ttelescope
astronomy\tquasar
astronomy\tsupernova
astronomy\tpulsar
astronomy\tgalaxies
physics\tlaser
physics\tquantum
physics\tsuperconductivity
"
    .to_string();

    Fixture {
        train,
        test,
        citations,
        memberships,
        triggers,
    }
}

impl Fixture {
    pub fn write_to(&self, dir: &Path) {
        std::fs::create_dir_all(dir).unwrap();
        save_records(&self.train, dir.join("train.jsonl")).unwrap();
        save_records(&self.test, dir.join("test.jsonl")).unwrap();
        std::fs::write(dir.join("citations.tsv"), &self.citations).unwrap();
        std::fs::write(dir.join("memberships.tsv"), &self.memberships).unwrap();
        std::fs::write(dir.join("triggers.tsv"), &self.triggers).unwrap();
    }
}

/// Directory holding the checked-in copy of the fixture.
pub fn bundled_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/analog")
}
