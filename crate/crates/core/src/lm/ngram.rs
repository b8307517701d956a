//! Add-k smoothed n-gram language model.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{LmError, SentenceLogProb, SentenceScorer};
use crate::corpus::CorpusIndex;
use crate::text::Tokenizer;

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

const UNK_ID: u32 = 0;
const EOS_ID: u32 = 1;
const BOS_ID: u32 = 2;
const FIRST_WORD: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NgramConfig {
    pub order: usize,
    pub k: f64,
    pub min_count: u64,
}

impl Default for NgramConfig {
    fn default() -> Self {
        Self {
            order: 3,
            k: 0.1,
            min_count: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct ContextCounts {
    total: u64,
    next: HashMap<u32, u64>,
}

/// Order-n model over padded sentences. Outcomes are every vocabulary
/// word plus `<unk>` and `</s>`; `<s>` only ever appears as context.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramLM {
    id: String,
    cfg: NgramConfig,
    tokenizer: Tokenizer,
    // symbols[0..3] are UNK, EOS, BOS
    symbols: Vec<String>,
    index: HashMap<String, u32>,
    contexts: HashMap<Vec<u32>, ContextCounts>,
}

impl NgramLM {
    pub fn train(
        id: impl Into<String>,
        corpus: &CorpusIndex,
        cfg: NgramConfig,
    ) -> Result<Self, LmError> {
        let sentences: Vec<Vec<String>> = corpus
            .sentences()
            .map(|s| {
                s.iter()
                    .map(|&t| corpus.types()[t as usize].clone())
                    .collect()
            })
            .collect();
        Self::from_sentences(id, &sentences, cfg, corpus.tokenizer())
    }

    /// Trains on already tokenized sentences.
    pub fn from_sentences(
        id: impl Into<String>,
        sentences: &[Vec<String>],
        cfg: NgramConfig,
        tokenizer: Tokenizer,
    ) -> Result<Self, LmError> {
        if cfg.order == 0 {
            return Err(LmError::InvalidConfig("order must be at least 1".into()));
        }
        if !(cfg.k > 0.0 && cfg.k.is_finite()) {
            return Err(LmError::InvalidConfig("k must be positive".into()));
        }
        if sentences.iter().all(|s| s.is_empty()) {
            return Err(LmError::EmptyCorpus);
        }
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for s in sentences {
            for t in s {
                *freq.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut words: Vec<&str> = freq
            .iter()
            .filter(|&(_, &c)| c >= cfg.min_count)
            .map(|(&w, _)| w)
            .filter(|w| ![UNK, BOS, EOS].contains(w))
            .collect();
        words.sort_unstable();
        let mut symbols: Vec<String> = [UNK, EOS, BOS].map(String::from).to_vec();
        symbols.extend(words.iter().map(|w| w.to_string()));
        let index = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        let mut lm = Self {
            id: id.into(),
            cfg,
            tokenizer,
            symbols,
            index,
            contexts: HashMap::new(),
        };
        for s in sentences.iter().filter(|s| !s.is_empty()) {
            let ids = lm.encode(s);
            let padded = lm.pad(&ids);
            let h = cfg.order - 1;
            for i in h..padded.len() {
                let entry = lm.contexts.entry(padded[i - h..i].to_vec()).or_default();
                entry.total += 1;
                *entry.next.entry(padded[i]).or_default() += 1;
            }
        }
        Ok(lm)
    }

    pub fn config(&self) -> NgramConfig {
        self.cfg
    }

    pub fn order(&self) -> usize {
        self.cfg.order
    }

    /// Vocabulary words, excluding the special symbols.
    pub fn words(&self) -> &[String] {
        &self.symbols[FIRST_WORD as usize..]
    }

    /// Number of possible next-token outcomes (words, `<unk>`, `</s>`).
    pub fn outcomes(&self) -> usize {
        self.symbols.len() - 1
    }

    fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens
            .iter()
            .map(|t| match self.index.get(t) {
                Some(&i) if i >= FIRST_WORD => i,
                _ => UNK_ID,
            })
            .collect()
    }

    fn pad(&self, ids: &[u32]) -> Vec<u32> {
        let mut padded = vec![BOS_ID; self.cfg.order - 1];
        padded.extend_from_slice(ids);
        padded.push(EOS_ID);
        padded
    }

    fn prob_ids(&self, context: &[u32], next: u32) -> f64 {
        let k = self.cfg.k;
        let v = self.outcomes() as f64;
        match self.contexts.get(context) {
            Some(c) => {
                (c.next.get(&next).copied().unwrap_or(0) as f64 + k) / (c.total as f64 + k * v)
            }
            None => 1.0 / v,
        }
    }

    fn context_ids(&self, history: &[String]) -> Vec<u32> {
        let h = self.cfg.order - 1;
        let ids = self.encode(history);
        let mut ctx = vec![BOS_ID; h.saturating_sub(ids.len())];
        ctx.extend_from_slice(&ids[ids.len().saturating_sub(h)..]);
        ctx
    }

    fn symbol_id(&self, symbol: &str) -> u32 {
        match symbol {
            EOS => EOS_ID,
            _ => match self.index.get(symbol) {
                Some(&i) if i >= FIRST_WORD => i,
                _ => UNK_ID,
            },
        }
    }

    /// `p(next | history)`; `history` is the sentence so far (unpadded),
    /// `next` a word, `<unk>` or `</s>`.
    pub fn prob(&self, history: &[String], next: &str) -> f64 {
        self.prob_ids(&self.context_ids(history), self.symbol_id(next))
    }

    /// Full next-token distribution in symbol order (`<unk>`, `</s>`,
    /// then words alphabetically).
    pub fn distribution(&self, history: &[String]) -> Vec<(String, f64)> {
        let ctx = self.context_ids(history);
        self.symbols
            .iter()
            .enumerate()
            .filter(|&(i, _)| i as u32 != BOS_ID)
            .map(|(i, s)| (s.clone(), self.prob_ids(&ctx, i as u32)))
            .collect()
    }

    pub fn to_file(&self) -> NgramFile {
        let mut contexts: Vec<ContextEntry> = self
            .contexts
            .iter()
            .map(|(ctx, c)| {
                let mut next: Vec<(String, u64)> = c
                    .next
                    .iter()
                    .map(|(&n, &k)| (self.symbols[n as usize].clone(), k))
                    .collect();
                next.sort();
                ContextEntry {
                    context: ctx
                        .iter()
                        .map(|&i| self.symbols[i as usize].clone())
                        .collect(),
                    next,
                }
            })
            .collect();
        contexts.sort_by(|a, b| a.context.cmp(&b.context));
        NgramFile {
            id: self.id.clone(),
            config: self.cfg,
            tokenizer: self.tokenizer,
            words: self.words().to_vec(),
            contexts,
        }
    }

    pub fn from_file(file: NgramFile) -> Result<Self, LmError> {
        let mut symbols: Vec<String> = [UNK, EOS, BOS].map(String::from).to_vec();
        symbols.extend(file.words);
        let index: HashMap<String, u32> = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        if index.len() != symbols.len() {
            return Err(LmError::InvalidConfig(
                "duplicate word in model file".into(),
            ));
        }
        let lookup = |s: &String| {
            index.get(s).copied().ok_or_else(|| {
                LmError::InvalidConfig(format!("unknown symbol {s:?} in model file"))
            })
        };
        let mut contexts = HashMap::new();
        for e in file.contexts {
            if e.context.len() + 1 != file.config.order {
                return Err(LmError::InvalidConfig(
                    "context length does not match order".into(),
                ));
            }
            let ctx = e
                .context
                .iter()
                .map(lookup)
                .collect::<Result<Vec<_>, _>>()?;
            let mut c = ContextCounts::default();
            for (n, k) in &e.next {
                c.next.insert(lookup(n)?, *k);
                c.total += k;
            }
            contexts.insert(ctx, c);
        }
        Ok(Self {
            id: file.id,
            cfg: file.config,
            tokenizer: file.tokenizer,
            symbols,
            index,
            contexts,
        })
    }
}

/// Serialized form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramFile {
    pub id: String,
    pub config: NgramConfig,
    pub tokenizer: Tokenizer,
    pub words: Vec<String>,
    pub contexts: Vec<ContextEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub context: Vec<String>,
    pub next: Vec<(String, u64)>,
}

impl SentenceScorer for NgramLM {
    fn id(&self) -> &str {
        &self.id
    }

    fn tokenize(&self, text: &str) -> Vec<String> {
        self.tokenizer
            .words(&self.tokenizer.normalizer.compose(text))
    }

    fn score(&self, tokens: &[String]) -> SentenceLogProb {
        let padded = self.pad(&self.encode(tokens));
        let h = self.cfg.order - 1;
        let log_prob = (h..padded.len())
            .map(|i| self.prob_ids(&padded[i - h..i], padded[i]).ln())
            .sum();
        SentenceLogProb {
            log_prob,
            factors: padded.len() - h,
        }
    }

    fn contains(&self, token: &str) -> bool {
        matches!(self.index.get(token), Some(&i) if i >= FIRST_WORD)
    }

    fn vocabulary(&self) -> Vec<String> {
        self.words().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sents(text: &[&str]) -> Vec<Vec<String>> {
        text.iter()
            .map(|s| s.split_whitespace().map(String::from).collect())
            .collect()
    }

    fn bigram(k: f64) -> NgramLM {
        NgramLM::from_sentences(
            "t",
            &sents(&["a b"]),
            NgramConfig {
                order: 2,
                k,
                min_count: 1,
            },
            Tokenizer::default(),
        )
        .unwrap()
    }

    #[test]
    fn hand_bigram_probability() {
        let lm = bigram(1.0);
        assert_eq!(lm.outcomes(), 4);
        // (count(a b) + 1) / (count(a) + 1 * 4)
        assert!((lm.prob(&["a".into()], "b") - 0.4).abs() < 1e-15);
        let total: f64 = lm.distribution(&["a".into()]).iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unseen_context_is_uniform() {
        let lm = bigram(0.1);
        // an OOV history maps to the never-seen <unk> context
        assert!(!lm.contexts.contains_key(&vec![UNK_ID]));
        let d = lm.distribution(&["zzz".into()]);
        for (_, p) in d {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn min_count_maps_to_unk() {
        let lm = NgramLM::from_sentences(
            "t",
            &sents(&["a a b", "a c"]),
            NgramConfig {
                order: 2,
                k: 1.0,
                min_count: 2,
            },
            Tokenizer::default(),
        )
        .unwrap();
        assert_eq!(lm.words(), ["a"]);
        assert!(!lm.contains("b"));
        // a -> <unk> twice (b and c), a -> a once, a -> </s> never: 3 total
        assert!((lm.prob(&["a".into()], UNK) - 3.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn config_and_corpus_errors() {
        let t = Tokenizer::default();
        assert!(matches!(
            NgramLM::from_sentences("t", &[], NgramConfig::default(), t),
            Err(LmError::EmptyCorpus)
        ));
        let bad = NgramConfig {
            order: 0,
            ..Default::default()
        };
        assert!(NgramLM::from_sentences("t", &sents(&["a"]), bad, t).is_err());
        let bad = NgramConfig {
            k: 0.0,
            ..Default::default()
        };
        assert!(NgramLM::from_sentences("t", &sents(&["a"]), bad, t).is_err());
    }

    #[test]
    fn file_round_trip_preserves_scores() {
        let lm = NgramLM::from_sentences(
            "t",
            &sents(&["the nurse is here", "the doctor is there", "he is a leader"]),
            NgramConfig::default(),
            Tokenizer::default(),
        )
        .unwrap();
        let json = serde_json::to_string(&lm.to_file()).unwrap();
        let back = NgramLM::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, lm);
        let s: Vec<String> = ["the", "nurse", "is", "there"].map(String::from).to_vec();
        assert_eq!(back.score(&s), lm.score(&s));
    }

    #[test]
    fn unigram_order_works() {
        let lm = NgramLM::from_sentences(
            "t",
            &sents(&["a b", "a"]),
            NgramConfig {
                order: 1,
                k: 1.0,
                min_count: 1,
            },
            Tokenizer::default(),
        )
        .unwrap();
        // tokens: a a b </s> </s> = 5; outcomes 4
        assert!((lm.prob(&[], "a") - 3.0 / 9.0).abs() < 1e-15);
        assert_eq!(lm.score(&["a".into()]).factors, 2);
    }
}
