//! Bibliographic record classification.
//!
//! Two independent classifiers assign records to subject databases:
//!
//! - a multinomial Naive Bayes text classifier over per-database term
//!   frequencies ([`bayes`]), fed by a deterministic tokenizer ([`textpipe`]);
//! - a citation-ratio classifier over the papers citing a record
//!   ([`citegraph`]).
//!
//! [`evalhub`] combines them, scores the result against gold labels and runs
//! parameter sweeps. [`corpus`] owns the file formats. The `bibclass` binary
//! wires everything together through [`cli`].

pub mod bayes;
pub mod citegraph;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evalhub;
pub mod textpipe;

pub use bayes::{
    apply_triggers, build_model, classify_text, score_text, term_probability, CategoryModel,
    TextClassifierConfig, TextScore,
};
pub use citegraph::{citation_ratio, classify_citations, CitationClassifierConfig, CitationGraph};
pub use corpus::{BibRecord, CitationEdge, DatabaseId};
pub use error::{Error, Result};
pub use evalhub::{
    classify_combined, emit_grid_csv, precision_recall, sweep, Assignment, EvalReport, Mode,
    Params, SweepGrid,
};
pub use textpipe::{filter_tokens, tokenize, TokenizerConfig};
