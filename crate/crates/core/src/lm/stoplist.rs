use std::collections::BTreeSet;

use super::LmError;
use crate::text::Normalizer;

const ENGLISH: &str = include_str!("../../data/stoplists/en.txt");
const SPANISH: &str = include_str!("../../data/stoplists/es.txt");

/// Function words to drop from open-blank rankings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist {
    words: BTreeSet<String>,
}

impl Stoplist {
    /// One token per line; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        let norm = Normalizer::default();
        let words = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| norm.normalize(l))
            .collect();
        Self { words }
    }

    pub fn builtin(language: &str) -> Result<Self, LmError> {
        match language.to_ascii_lowercase().as_str() {
            "en" | "english" => Ok(Self::parse(ENGLISH)),
            "es" | "spanish" | "español" => Ok(Self::parse(SPANISH)),
            other => Err(LmError::UnknownLanguage(other.to_owned())),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn words(&self) -> &BTreeSet<String> {
        &self.words
    }
}
