//! Tokenization and filtering of title/abstract text.
//!
//! The tokenizer is deterministic and locale-independent: text is
//! transliterated to ASCII, lowercased and split on anything that is not an
//! ASCII letter or digit. A hyphen between two alphanumerics joins a compound;
//! the compound is emitted with hyphens removed, followed by its parts.

use std::collections::BTreeSet;
use std::path::Path;

use crate::corpus::read_term_list;
use crate::error::{Error, Result};

const DEFAULT_STOP_WORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_STOP_PHRASES: &str = include_str!("../data/stopphrases.txt");

pub const DEFAULT_MIN_TOKEN_LENGTH: usize = 2;

/// Splits text into lowercase ASCII tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let folded = deunicode::deunicode(text).to_ascii_lowercase();
    let bytes = folded.as_bytes();
    let mut tokens = Vec::new();
    let mut parts: Vec<&str> = Vec::new();
    let mut start: Option<usize> = None;

    let flush = |parts: &mut Vec<&str>, tokens: &mut Vec<String>| {
        match parts.len() {
            0 => {}
            1 => tokens.push(parts[0].to_owned()),
            _ => {
                tokens.push(parts.concat());
                tokens.extend(parts.iter().map(|p| (*p).to_owned()));
            }
        }
        parts.clear();
    };

    for (i, &b) in bytes.iter().enumerate() {
        if b.is_ascii_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
            continue;
        }
        if let Some(s) = start.take() {
            parts.push(&folded[s..i]);
        }
        let joins = b == b'-'
            && !parts.is_empty()
            && i > 0
            && bytes[i - 1].is_ascii_alphanumeric()
            && bytes.get(i + 1).is_some_and(u8::is_ascii_alphanumeric);
        if !joins {
            flush(&mut parts, &mut tokens);
        }
    }
    if let Some(s) = start {
        parts.push(&folded[s..]);
    }
    flush(&mut parts, &mut tokens);
    tokens
}

/// Stop lists and length floor applied by [`filter_tokens`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    stop_words: BTreeSet<String>,
    /// Each phrase stored as the token sequence it matches after filtering.
    stop_phrases: BTreeSet<Vec<String>>,
    min_token_length: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        let lines = |s: &'static str| {
            s.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_owned)
                .collect::<Vec<_>>()
        };
        Self::new(
            lines(DEFAULT_STOP_WORDS),
            lines(DEFAULT_STOP_PHRASES),
            DEFAULT_MIN_TOKEN_LENGTH,
        )
        .expect("bundled stop lists are valid")
    }
}

impl TokenizerConfig {
    /// Builds a config from raw stop words and phrases. Entries are run
    /// through [`tokenize`] so they match the token stream they will be
    /// compared against. Phrase words that the single-token rules would
    /// remove anyway are dropped from the phrase.
    pub fn new<W, P>(stop_words: W, stop_phrases: P, min_token_length: usize) -> Result<Self>
    where
        W: IntoIterator,
        W::Item: AsRef<str>,
        P: IntoIterator,
        P::Item: AsRef<str>,
    {
        if min_token_length < 1 {
            return Err(Error::config("min_token_length must be at least 1"));
        }
        let mut config = TokenizerConfig {
            stop_words: BTreeSet::new(),
            stop_phrases: BTreeSet::new(),
            min_token_length,
        };
        for word in stop_words {
            config.stop_words.extend(tokenize(word.as_ref()));
        }
        for phrase in stop_phrases {
            let seq: Vec<String> = tokenize(phrase.as_ref())
                .into_iter()
                .filter(|t| config.keeps(t))
                .collect();
            if !seq.is_empty() {
                config.stop_phrases.insert(seq);
            }
        }
        Ok(config)
    }

    /// Loads stop lists from files, falling back to the bundled defaults for
    /// any list not given.
    pub fn from_files(
        stop_words: Option<&Path>,
        stop_phrases: Option<&Path>,
        min_token_length: usize,
    ) -> Result<Self> {
        let defaults = TokenizerConfig::default();
        let words = match stop_words {
            Some(p) => read_term_list(p)?,
            None => defaults.stop_words.iter().cloned().collect(),
        };
        let phrases = match stop_phrases {
            Some(p) => read_term_list(p)?,
            None => defaults.stop_phrases.iter().map(|p| p.join(" ")).collect(),
        };
        Self::new(words, phrases, min_token_length)
    }

    pub fn stop_words(&self) -> &BTreeSet<String> {
        &self.stop_words
    }

    pub fn stop_phrases(&self) -> impl Iterator<Item = String> + '_ {
        self.stop_phrases.iter().map(|p| p.join(" "))
    }

    pub fn min_token_length(&self) -> usize {
        self.min_token_length
    }

    /// Single-token rule: not digit-only, not a stop word, long enough.
    pub fn keeps(&self, token: &str) -> bool {
        !token.is_empty()
            && !token.bytes().all(|b| b.is_ascii_digit())
            && token.len() >= self.min_token_length
            && !self.stop_words.contains(token)
    }
}

/// Removes digit-only tokens, stop words, short tokens and stop phrases.
///
/// Phrase removal runs after the single-token rules and repeats until no
/// phrase matches, which makes the function idempotent.
pub fn filter_tokens(tokens: &[String], config: &TokenizerConfig) -> Vec<String> {
    let mut kept: Vec<String> = tokens.iter().filter(|t| config.keeps(t)).cloned().collect();
    if config.stop_phrases.is_empty() {
        return kept;
    }
    loop {
        let mut out = Vec::with_capacity(kept.len());
        let mut i = 0;
        let mut removed = false;
        while i < kept.len() {
            let hit = config
                .stop_phrases
                .iter()
                .find(|p| kept[i..].starts_with(p.as_slice()));
            match hit {
                Some(phrase) => {
                    i += phrase.len();
                    removed = true;
                }
                None => {
                    out.push(std::mem::take(&mut kept[i]));
                    i += 1;
                }
            }
        }
        kept = out;
        if !removed {
            return kept;
        }
    }
}

/// Tokenizes and filters in one step.
pub fn prepare(text: &str, config: &TokenizerConfig) -> Vec<String> {
    filter_tokens(&tokenize(text), config)
}
