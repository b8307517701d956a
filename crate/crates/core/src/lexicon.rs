//! Seed word lists and the word-list manifest file.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingStore;
use crate::text::Normalizer;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("word list {0:?} is empty")]
    EmptyList(String),
    #[error("word list {list:?} contains {word:?} more than once")]
    DuplicateWord { list: String, word: String },
    #[error("word list needs a name")]
    MissingName,
    #[error("word list manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("duplicate list name {0:?} in manifest")]
    DuplicateName(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LexiconError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyList(_) => "empty_list",
            Self::DuplicateWord { .. } => "duplicate_word",
            Self::MissingName => "missing_name",
            Self::Manifest(_) => "malformed_manifest",
            Self::DuplicateName(_) => "duplicate_list_name",
            Self::Io(_) => "io",
        }
    }
}

/// A named, duplicate-free list of seed words with optional provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordList {
    pub name: String,
    pub words: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Deserialize)]
struct RawList {
    name: String,
    words: Vec<String>,
    #[serde(default)]
    language: Option<String>,
    #[serde(default)]
    provenance: Option<String>,
}

impl<'de> Deserialize<'de> for WordList {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawList::deserialize(d)?;
        let mut list = WordList::new(raw.name, raw.words).map_err(serde::de::Error::custom)?;
        list.language = raw.language;
        list.provenance = raw.provenance;
        Ok(list)
    }
}

impl WordList {
    /// Validates and builds a list. Words are trimmed; blank entries are
    /// ignored. Duplicates are detected after default normalization.
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        words: impl IntoIterator<Item = S>,
    ) -> Result<Self, LexiconError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(LexiconError::MissingName);
        }
        let norm = Normalizer::default();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for w in words {
            let w: String = w.into();
            let w = w.trim().to_owned();
            if w.is_empty() {
                continue;
            }
            if !seen.insert(norm.normalize(&w)) {
                return Err(LexiconError::DuplicateWord {
                    list: name,
                    word: w,
                });
            }
            out.push(w);
        }
        if out.is_empty() {
            return Err(LexiconError::EmptyList(name));
        }
        Ok(Self {
            name,
            words: out,
            language: None,
            provenance: None,
        })
    }

    pub fn with_language(mut self, lang: impl Into<String>) -> Self {
        self.language = Some(lang.into());
        self
    }

    pub fn with_provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance = Some(note.into());
        self
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Splits the list into in-vocabulary and missing words for `store`.
    pub fn resolve(&self, store: &EmbeddingStore) -> ResolvedList {
        let mut resolved = Vec::new();
        let mut missing = Vec::new();
        for w in &self.words {
            if store.contains(w) {
                resolved.push(store.normalize(w));
            } else {
                missing.push(w.clone());
            }
        }
        ResolvedList {
            name: self.name.clone(),
            words: self.words.clone(),
            resolved,
            missing,
        }
    }
}

/// A word list resolved against one embedding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedList {
    pub name: String,
    pub words: Vec<String>,
    /// Normalized in-vocabulary words, in list order.
    pub resolved: Vec<String>,
    /// Words as written by the user that are not in the vocabulary.
    pub missing: Vec<String>,
}

impl ResolvedList {
    pub fn oov_rate(&self) -> f64 {
        self.missing.len() as f64 / self.words.len() as f64
    }
}

/// Reads a manifest: a JSON array of `{name, words, language?, provenance?}`
/// (or an object with a `lists` field holding that array).
pub fn parse_manifest(text: &str) -> Result<Vec<WordList>, LexiconError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Manifest {
        Bare(Vec<WordList>),
        Wrapped { lists: Vec<WordList> },
    }
    let lists = match serde_json::from_str::<Manifest>(text)? {
        Manifest::Bare(l) | Manifest::Wrapped { lists: l } => l,
    };
    let mut names = HashSet::new();
    for l in &lists {
        if !names.insert(l.name.clone()) {
            return Err(LexiconError::DuplicateName(l.name.clone()));
        }
    }
    Ok(lists)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<WordList>, LexiconError> {
    parse_manifest(&std::fs::read_to_string(path)?)
}
