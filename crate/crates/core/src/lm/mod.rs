//! Sentence-level probes over a pluggable sentence scorer: ranking the
//! fillers of a one-blank template and comparing contrasting sentence
//! pairs.

mod ngram;
mod stoplist;

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ngram::{ContextEntry, NgramConfig, NgramFile, NgramLM, BOS, EOS, UNK};
pub use stoplist::Stoplist;

pub const BLANK: char = '*';
pub const DEFAULT_TOP_N: usize = 5;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("invalid language model config: {0}")]
    InvalidConfig(String),
    #[error("corpus has no sentences to train on")]
    EmptyCorpus,
    #[error("template has no blank; mark it with \"*\"")]
    NoBlank,
    #[error("template has {0} blanks; exactly one \"*\" is allowed")]
    MultipleBlanks(usize),
    #[error("candidate {0:?} is not a single token")]
    MultiTokenCandidate(String),
    #[error("no candidate left to rank after exclusions")]
    NothingToRank,
    #[error("sentence {0:?} has no tokens")]
    EmptySentence(String),
    #[error("pair batch line {line}: {message}")]
    MalformedPair { line: usize, message: String },
    #[error("no built-in stoplist for language {0:?}")]
    UnknownLanguage(String),
}

impl LmError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidConfig(_) => "invalid_config",
            Self::EmptyCorpus => "empty_corpus",
            Self::NoBlank => "no_blank",
            Self::MultipleBlanks(_) => "multiple_blanks",
            Self::MultiTokenCandidate(_) => "multi_token_candidate",
            Self::NothingToRank => "nothing_to_rank",
            Self::EmptySentence(_) => "empty_sentence",
            Self::MalformedPair { .. } => "malformed_pair",
            Self::UnknownLanguage(_) => "unknown_language",
        }
    }
}

/// Log-probability of a whole sentence and the number of conditional
/// factors it is made of.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceLogProb {
    pub log_prob: f64,
    pub factors: usize,
}

impl SentenceLogProb {
    pub fn per_token(&self) -> f64 {
        self.log_prob / self.factors as f64
    }
}

/// Anything that can assign a probability to a sentence.
pub trait SentenceScorer: Send + Sync {
    fn id(&self) -> &str;

    /// Splits and normalizes raw text the way the model expects.
    fn tokenize(&self, text: &str) -> Vec<String>;

    fn score(&self, tokens: &[String]) -> SentenceLogProb;

    /// Log-probability of `prefix candidate suffix` for every candidate.
    fn fill(&self, prefix: &[String], suffix: &[String], candidates: &[String]) -> Vec<f64> {
        let mut sentence: Vec<String> = Vec::with_capacity(prefix.len() + suffix.len() + 1);
        candidates
            .iter()
            .map(|c| {
                sentence.clear();
                sentence.extend_from_slice(prefix);
                sentence.push(c.clone());
                sentence.extend_from_slice(suffix);
                self.score(&sentence).log_prob
            })
            .collect()
    }

    fn contains(&self, token: &str) -> bool;

    /// Words the model can propose for an open blank.
    fn vocabulary(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlankQuery {
    pub template: String,
    #[serde(default)]
    pub candidates: Option<Vec<String>>,
    #[serde(default)]
    pub unwanted: Vec<String>,
    #[serde(default)]
    pub exclude_function_words: bool,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
}

fn default_top_n() -> usize {
    DEFAULT_TOP_N
}

impl BlankQuery {
    pub fn new(template: impl Into<String>) -> Self {
        Self {
            template: template.into(),
            candidates: None,
            unwanted: Vec::new(),
            exclude_function_words: false,
            top_n: DEFAULT_TOP_N,
        }
    }

    pub fn with_candidates<S: Into<String>>(mut self, c: impl IntoIterator<Item = S>) -> Self {
        self.candidates = Some(c.into_iter().map(Into::into).collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub word: String,
    pub sentence: String,
    pub log_prob: f64,
    pub probability: f64,
}

/// Descending log-probability, ascending word on ties.
pub fn completion_order(a: &Completion, b: &Completion) -> Ordering {
    b.log_prob
        .total_cmp(&a.log_prob)
        .then_with(|| a.word.cmp(&b.word))
}

/// Splits a template around its single blank.
pub fn split_template(template: &str) -> Result<(&str, &str), LmError> {
    match template.matches(BLANK).count() {
        0 => Err(LmError::NoBlank),
        1 => Ok(template.split_once(BLANK).expect("one blank")),
        n => Err(LmError::MultipleBlanks(n)),
    }
}

fn single_token(scorer: &dyn SentenceScorer, word: &str) -> Result<String, LmError> {
    let mut toks = scorer.tokenize(word);
    if toks.len() != 1 {
        return Err(LmError::MultiTokenCandidate(word.to_owned()));
    }
    Ok(toks.pop().expect("one token"))
}

/// Ranks fillers of the template's blank by full-sentence probability.
///
/// With explicit candidates every candidate (minus exclusions) is
/// returned. Without, the model's whole vocabulary is scored and the
/// best `top_n` kept.
pub fn rank_blank(
    scorer: &dyn SentenceScorer,
    q: &BlankQuery,
    stoplist: Option<&Stoplist>,
) -> Result<Vec<Completion>, LmError> {
    let (before, after) = split_template(&q.template)?;
    let prefix = scorer.tokenize(before);
    let suffix = scorer.tokenize(after);

    let mut excluded: HashSet<String> = HashSet::new();
    for w in &q.unwanted {
        excluded.extend(scorer.tokenize(w));
    }
    if q.exclude_function_words {
        if let Some(s) = stoplist {
            excluded.extend(s.words().iter().cloned());
        }
    }

    let explicit = q.candidates.is_some();
    let pool: Vec<String> = match &q.candidates {
        Some(c) => {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for w in c {
                let t = single_token(scorer, w)?;
                if seen.insert(t.clone()) {
                    out.push(t);
                }
            }
            out
        }
        None => scorer.vocabulary(),
    };
    let pool: Vec<String> = pool.into_iter().filter(|w| !excluded.contains(w)).collect();
    if pool.is_empty() {
        return Err(LmError::NothingToRank);
    }

    let scores = scorer.fill(&prefix, &suffix, &pool);
    let mut out: Vec<Completion> = pool
        .into_iter()
        .zip(scores)
        .map(|(word, log_prob)| Completion {
            sentence: format!("{before}{word}{after}"),
            word,
            log_prob,
            probability: log_prob.exp(),
        })
        .collect();
    out.sort_by(completion_order);
    if !explicit {
        out.truncate(q.top_n);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceResult {
    pub sentence: String,
    pub tokens: usize,
    pub log_prob: f64,
    pub mean_log_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub stereo: SentenceResult,
    pub anti: SentenceResult,
    /// `mean_log_prob(stereo) - mean_log_prob(anti)`; positive means the
    /// model prefers the stereotyped sentence.
    pub preference: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairQuery {
    pub stereo: String,
    pub anti: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

fn sentence_result(scorer: &dyn SentenceScorer, text: &str) -> Result<SentenceResult, LmError> {
    let toks = scorer.tokenize(text);
    if toks.is_empty() {
        return Err(LmError::EmptySentence(text.to_owned()));
    }
    let s = scorer.score(&toks);
    Ok(SentenceResult {
        sentence: text.to_owned(),
        tokens: toks.len(),
        log_prob: s.log_prob,
        mean_log_prob: s.per_token(),
    })
}

pub fn compare_pair(scorer: &dyn SentenceScorer, q: &PairQuery) -> Result<PairResult, LmError> {
    let stereo = sentence_result(scorer, &q.stereo)?;
    let anti = sentence_result(scorer, &q.anti)?;
    Ok(PairResult {
        preference: stereo.mean_log_prob - anti.mean_log_prob,
        stereo,
        anti,
        tag: q.tag.clone(),
    })
}

/// Reads a pair batch: one JSON object per line with `stereo`, `anti`
/// and an optional `tag`.
pub fn parse_pair_batch(text: &str) -> Result<Vec<PairQuery>, LmError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| LmError::MalformedPair {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
