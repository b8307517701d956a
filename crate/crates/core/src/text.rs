//! Token normalization, tokenization and sentence splitting.
//!
//! Every module that matches words (embedding lookup, corpus indexing,
//! the language model) goes through [`Normalizer`], so a token typed by a
//! user and a token read from a file compare equal exactly when their
//! normalized forms do.

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// Single-pass token normalization: Unicode NFC followed by lowercasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalizer {
    #[serde(default = "yes")]
    pub nfc: bool,
    #[serde(default = "yes")]
    pub lowercase: bool,
}

fn yes() -> bool {
    true
}

impl Default for Normalizer {
    fn default() -> Self {
        Self {
            nfc: true,
            lowercase: true,
        }
    }
}

impl Normalizer {
    /// Normalizer that leaves tokens untouched.
    pub const fn identity() -> Self {
        Self {
            nfc: false,
            lowercase: false,
        }
    }

    pub fn normalize(&self, token: &str) -> String {
        match (self.nfc, self.lowercase) {
            (true, true) => token.nfc().collect::<String>().to_lowercase(),
            (true, false) => token.nfc().collect(),
            (false, true) => token.to_lowercase(),
            (false, false) => token.to_owned(),
        }
    }

    /// Applies only the NFC part, preserving case. Used for stored text so
    /// that byte spans stay valid after normalization.
    pub fn compose(&self, text: &str) -> String {
        if self.nfc {
            text.nfc().collect()
        } else {
            text.to_owned()
        }
    }
}

/// A token and its byte span in the text it was read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Splits on every character that is neither a letter nor a digit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    #[serde(default)]
    pub normalizer: Normalizer,
}

impl Tokenizer {
    pub fn new(normalizer: Normalizer) -> Self {
        Self { normalizer }
    }

    /// Tokenizes `text` as given. Spans index into `text`; callers that
    /// want NFC-consistent spans should compose the text first.
    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            if c.is_alphanumeric() {
                if start.is_none() {
                    start = Some(i);
                }
            } else if let Some(s) = start.take() {
                out.push(self.token(text, s, i));
            }
        }
        if let Some(s) = start {
            out.push(self.token(text, s, text.len()));
        }
        out
    }

    pub fn words(&self, text: &str) -> Vec<String> {
        self.tokenize(text).into_iter().map(|t| t.text).collect()
    }

    fn token(&self, text: &str, start: usize, end: usize) -> Token {
        Token {
            text: self.normalizer.normalize(&text[start..end]),
            start,
            end,
        }
    }
}

fn is_sentence_break(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '\n')
}

/// Byte spans of the sentences of `text`, trimmed of surrounding
/// whitespace. Breaks on `.`, `!`, `?` (kept with the sentence) and
/// newlines; segments without any alphanumeric character are skipped.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut seg_start = 0;
    let mut push = |s: usize, e: usize| {
        let seg = &text[s..e];
        let lead = seg.len() - seg.trim_start().len();
        let trimmed = seg.trim();
        if trimmed.chars().any(char::is_alphanumeric) {
            spans.push((s + lead, s + lead + trimmed.len()));
        }
    };
    for (i, c) in text.char_indices() {
        if is_sentence_break(c) {
            let end = if c == '\n' { i } else { i + c.len_utf8() };
            push(seg_start, end);
            seg_start = i + c.len_utf8();
        }
    }
    push(seg_start, text.len());
    spans
}

/// Converts a byte offset in `s` to a char offset.
pub fn char_offset(s: &str, byte: usize) -> usize {
    s[..byte].chars().count()
}
