//! Collection-tagged document corpus with an inverted index, frequency
//! tables and seeded concordance sampling.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::text::{char_offset, sentence_spans, Tokenizer};

pub const DEFAULT_CONCORDANCE_LINES: usize = 5;
pub const HISTOGRAM_BINS: usize = 20;
pub const DEFAULT_COLLECTION: &str = "default";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("record {record}: {message}")]
    MalformedRecord { record: usize, message: String },
    #[error("record {record}: duplicate document id {id:?}")]
    DuplicateId { record: usize, id: String },
    #[error("corpus is empty: nothing to index")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::MalformedRecord { .. } => "malformed_record",
            Self::DuplicateId { .. } => "duplicate_doc_id",
            Self::Empty => "empty_corpus",
            Self::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub collection: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub docs: Vec<Document>,
}

impl Corpus {
    /// Parses a corpus file. If the first non-blank line starts with `{`
    /// the file is read as JSON lines (`id`, `collection`, `text`);
    /// otherwise every non-blank line is one document in collection
    /// `default`.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let jsonl = text
            .lines()
            .find(|l| !l.trim().is_empty())
            .ok_or(CorpusError::Empty)?
            .trim_start()
            .starts_with('{');
        let mut docs = Vec::new();
        let mut ids = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let record = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let doc = if jsonl {
                serde_json::from_str::<Document>(line).map_err(|e| {
                    CorpusError::MalformedRecord {
                        record,
                        message: e.to_string(),
                    }
                })?
            } else {
                Document {
                    id: format!("line-{record}"),
                    collection: DEFAULT_COLLECTION.into(),
                    text: line.to_owned(),
                }
            };
            if !ids.insert(doc.id.clone()) {
                return Err(CorpusError::DuplicateId { record, id: doc.id });
            }
            docs.push(doc);
        }
        Ok(Self { docs })
    }

    pub fn from_docs(docs: Vec<Document>) -> Result<Self, CorpusError> {
        let mut ids = HashSet::new();
        for (i, d) in docs.iter().enumerate() {
            if !ids.insert(d.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    record: i + 1,
                    id: d.id.clone(),
                });
            }
        }
        Ok(Self { docs })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Posting {
    sentence: u32,
    position: u32,
}

#[derive(Debug, Clone, Copy)]
struct SentenceSpan {
    doc: u32,
    start: usize,
    end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionShare {
    pub collection: String,
    pub count: u64,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    /// Number of vocabulary types whose count falls in `[lo, hi)`.
    pub types: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    pub query_bin: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub token: String,
    pub total_count: u64,
    pub per_collection: Vec<CollectionShare>,
    pub rank: Option<usize>,
    pub distribution: Histogram,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcordanceLine {
    pub doc_id: String,
    pub collection: String,
    pub sentence: String,
    /// Char (not byte) offsets of the first match inside `sentence`.
    pub char_span: (usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcordanceQuery {
    pub max_lines: Option<usize>,
    /// Restrict to these collections; `None` means all.
    pub collections: Option<Vec<String>>,
    pub seed: u64,
}

/// Immutable index over a corpus.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    tokenizer: Tokenizer,
    docs: Vec<Document>,
    doc_collection: Vec<u32>,
    collections: Vec<String>,
    sentences: Vec<SentenceSpan>,
    sentence_tokens: Vec<Vec<u32>>,
    types: Vec<String>,
    type_ids: HashMap<String, u32>,
    counts: Vec<u64>,
    // [type][collection]
    collection_counts: Vec<Vec<u64>>,
    postings: Vec<Vec<Posting>>,
    total_tokens: u64,
    sorted_counts: Vec<u64>,
}

impl CorpusIndex {
    pub fn build(corpus: Corpus, tokenizer: Tokenizer) -> Result<Self, CorpusError> {
        if corpus.docs.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut idx = Self {
            tokenizer,
            docs: Vec::with_capacity(corpus.docs.len()),
            doc_collection: Vec::with_capacity(corpus.docs.len()),
            collections: Vec::new(),
            sentences: Vec::new(),
            sentence_tokens: Vec::new(),
            types: Vec::new(),
            type_ids: HashMap::new(),
            counts: Vec::new(),
            collection_counts: Vec::new(),
            postings: Vec::new(),
            total_tokens: 0,
            sorted_counts: Vec::new(),
        };
        let mut collection_ids: HashMap<String, u32> = HashMap::new();
        for mut doc in corpus.docs {
            doc.text = tokenizer.normalizer.compose(&doc.text);
            let next = collection_ids.len() as u32;
            let cid = *collection_ids
                .entry(doc.collection.clone())
                .or_insert_with(|| {
                    idx.collections.push(doc.collection.clone());
                    next
                });
            let doc_no = idx.docs.len() as u32;
            idx.doc_collection.push(cid);
            for (start, end) in sentence_spans(&doc.text) {
                let toks = tokenizer.tokenize(&doc.text[start..end]);
                if toks.is_empty() {
                    continue;
                }
                let sentence = idx.sentences.len() as u32;
                let mut ids = Vec::with_capacity(toks.len());
                for (position, tok) in toks.into_iter().enumerate() {
                    let tid = idx.intern(tok.text);
                    ids.push(tid);
                    let t = tid as usize;
                    idx.counts[t] += 1;
                    let per = &mut idx.collection_counts[t];
                    if per.len() <= cid as usize {
                        per.resize(cid as usize + 1, 0);
                    }
                    per[cid as usize] += 1;
                    idx.postings[t].push(Posting {
                        sentence,
                        position: position as u32,
                    });
                }
                idx.total_tokens += ids.len() as u64;
                idx.sentence_tokens.push(ids);
                idx.sentences.push(SentenceSpan {
                    doc: doc_no,
                    start,
                    end,
                });
            }
            idx.docs.push(doc);
        }
        if idx.total_tokens == 0 {
            return Err(CorpusError::Empty);
        }
        let n = idx.collections.len();
        for per in &mut idx.collection_counts {
            per.resize(n, 0);
        }
        idx.sorted_counts = idx.counts.clone();
        idx.sorted_counts.sort_unstable();
        Ok(idx)
    }

    /// Parses and indexes a corpus file.
    pub fn ingest(text: &str, tokenizer: Tokenizer) -> Result<Self, CorpusError> {
        Self::build(Corpus::parse(text)?, tokenizer)
    }

    fn intern(&mut self, token: String) -> u32 {
        if let Some(&id) = self.type_ids.get(&token) {
            return id;
        }
        let id = self.types.len() as u32;
        self.type_ids.insert(token.clone(), id);
        self.types.push(token);
        self.counts.push(0);
        self.collection_counts.push(Vec::new());
        self.postings.push(Vec::new());
        id
    }

    pub fn tokenizer(&self) -> Tokenizer {
        self.tokenizer
    }

    pub fn collections(&self) -> &[String] {
        &self.collections
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn num_sentences(&self) -> usize {
        self.sentences.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Vocabulary types in order of first appearance.
    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn type_count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn type_id(&self, token: &str) -> Option<u32> {
        self.type_ids
            .get(&self.tokenizer.normalizer.normalize(token))
            .copied()
    }

    /// Token-id sequences of every sentence, in corpus order.
    pub fn sentences(&self) -> impl Iterator<Item = &[u32]> {
        self.sentence_tokens.iter().map(Vec::as_slice)
    }

    pub fn count(&self, token: &str) -> u64 {
        self.type_id(token).map_or(0, |t| self.counts[t as usize])
    }

    /// Percentage of vocabulary types whose count is at most `count`.
    pub fn percentile(&self, count: u64) -> f64 {
        let at_most = self.sorted_counts.partition_point(|&c| c <= count);
        100.0 * at_most as f64 / self.sorted_counts.len() as f64
    }

    /// 1-based rank; ties share the smaller rank.
    fn rank_of(&self, count: u64) -> usize {
        let greater =
            self.sorted_counts.len() - self.sorted_counts.partition_point(|&c| c <= count);
        greater + 1
    }

    fn histogram(&self, query: Option<u64>) -> Histogram {
        let max = *self.sorted_counts.last().unwrap_or(&1);
        // edges span [1, max + 1) so the largest count lands in the last bin
        let top = ((max + 1) as f64).log10();
        let edges: Vec<f64> = (0..=HISTOGRAM_BINS)
            .map(|i| {
                if i == 0 {
                    1.0
                } else if i == HISTOGRAM_BINS {
                    (max + 1) as f64
                } else {
                    10f64.powf(top * i as f64 / HISTOGRAM_BINS as f64)
                }
            })
            .collect();
        let bin_of = |c: u64| -> Option<usize> {
            let c = c as f64;
            if c < 1.0 {
                return None;
            }
            let i = edges.partition_point(|&e| e <= c);
            Some(i.saturating_sub(1).min(HISTOGRAM_BINS - 1))
        };
        let mut bins: Vec<HistogramBin> = edges
            .windows(2)
            .map(|w| HistogramBin {
                lo: w[0],
                hi: w[1],
                types: 0,
            })
            .collect();
        for &c in &self.counts {
            if let Some(b) = bin_of(c) {
                bins[b].types += 1;
            }
        }
        Histogram {
            bins,
            query_bin: query.and_then(bin_of),
        }
    }

    pub fn frequency(&self, token: &str) -> FrequencyReport {
        let norm = self.tokenizer.normalizer.normalize(token);
        let Some(t) = self.type_ids.get(&norm).map(|&t| t as usize) else {
            return FrequencyReport {
                token: norm,
                total_count: 0,
                per_collection: Vec::new(),
                rank: None,
                distribution: self.histogram(None),
            };
        };
        let total = self.counts[t];
        let per_collection = self.collection_counts[t]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(cid, &count)| CollectionShare {
                collection: self.collections[cid].clone(),
                count,
                percent: 100.0 * count as f64 / total as f64,
            })
            .collect();
        FrequencyReport {
            token: norm,
            total_count: total,
            per_collection,
            rank: Some(self.rank_of(total)),
            distribution: self.histogram(Some(total)),
        }
    }

    fn sentence_text(&self, s: usize) -> &str {
        let span = self.sentences[s];
        &self.docs[span.doc as usize].text[span.start..span.end]
    }

    /// Uniform sample without replacement of sentences containing `token`,
    /// reproducible for a given seed. Lines come back in corpus order.
    pub fn concordance(&self, token: &str, q: &ConcordanceQuery) -> Vec<ConcordanceLine> {
        let max = q.max_lines.unwrap_or(DEFAULT_CONCORDANCE_LINES);
        let norm = self.tokenizer.normalizer.normalize(token);
        let Some(&t) = self.type_ids.get(&norm) else {
            return Vec::new();
        };
        let allowed: Option<HashSet<u32>> = q.collections.as_ref().map(|names| {
            self.collections
                .iter()
                .enumerate()
                .filter(|(_, c)| names.contains(c))
                .map(|(i, _)| i as u32)
                .collect()
        });
        let mut matches: Vec<(u32, u32)> = Vec::new();
        for p in &self.postings[t as usize] {
            if matches.last().is_some_and(|&(s, _)| s == p.sentence) {
                continue;
            }
            let doc = self.sentences[p.sentence as usize].doc;
            let cid = self.doc_collection[doc as usize];
            if allowed.as_ref().is_none_or(|a| a.contains(&cid)) {
                matches.push((p.sentence, p.position));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(q.seed);
        let take = max.min(matches.len());
        let (sample, _) = matches.partial_shuffle(&mut rng, take);
        let mut sample = sample.to_vec();
        sample.sort_unstable();
        sample
            .into_iter()
            .map(|(s, position)| {
                let s = s as usize;
                let text = self.sentence_text(s);
                let tok = &self.tokenizer.tokenize(text)[position as usize];
                let doc = &self.docs[self.sentences[s].doc as usize];
                ConcordanceLine {
                    doc_id: doc.id.clone(),
                    collection: doc.collection.clone(),
                    sentence: text.to_owned(),
                    char_span: (char_offset(text, tok.start), char_offset(text, tok.end)),
                }
            })
            .collect()
    }

    /// Content hash over document ids, collections and texts.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for d in &self.docs {
            for part in [&d.id, &d.collection, &d.text] {
                h.update((part.len() as u64).to_le_bytes());
                h.update(part.as_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, collection: &str, text: &str) -> Document {
        Document {
            id: id.into(),
            collection: collection.into(),
            text: text.into(),
        }
    }

    fn small() -> CorpusIndex {
        CorpusIndex::build(
            Corpus::from_docs(vec![doc("d1", "news", "a b a"), doc("d2", "web", "b c")]).unwrap(),
            Tokenizer::default(),
        )
        .unwrap()
    }

    #[test]
    fn counts_on_two_docs() {
        let idx = small();
        assert_eq!(idx.count("a"), 2);
        assert_eq!(idx.count("b"), 2);
        assert_eq!(idx.count("c"), 1);
        assert_eq!(idx.total_tokens(), 5);
        let f = idx.frequency("a");
        assert_eq!(f.total_count, 2);
        assert_eq!(f.per_collection.len(), 1);
        assert_eq!(f.per_collection[0].collection, "news");
        assert_eq!(f.per_collection[0].percent, 100.0);
    }

    #[test]
    fn ranks_share_ties() {
        let idx = small();
        assert_eq!(idx.frequency("a").rank, Some(1));
        assert_eq!(idx.frequency("b").rank, Some(1));
        assert_eq!(idx.frequency("c").rank, Some(3));
        let z = idx.frequency("zzz");
        assert_eq!(z.total_count, 0);
        assert!(z.per_collection.is_empty());
        assert_eq!(z.rank, None);
        assert_eq!(z.distribution.query_bin, None);
    }

    #[test]
    fn query_bin_contains_count() {
        let idx = small();
        for t in ["a", "c"] {
            let f = idx.frequency(t);
            let b = &f.distribution.bins[f.distribution.query_bin.unwrap()];
            let c = f.total_count as f64;
            assert!(
                b.lo <= c && c < b.hi,
                "{t}: {c} not in [{}, {})",
                b.lo,
                b.hi
            );
        }
        let f = idx.frequency("a");
        assert_eq!(f.distribution.bins.len(), HISTOGRAM_BINS);
        assert_eq!(f.distribution.bins.iter().map(|b| b.types).sum::<u64>(), 3);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Corpus::parse(""), Err(CorpusError::Empty)));
        assert!(matches!(Corpus::parse("\n  \n"), Err(CorpusError::Empty)));
        let bad = "{\"id\":\"1\",\"collection\":\"x\",\"text\":\"a\"}\n{\"id\":\"2\"}\n";
        assert!(matches!(
            Corpus::parse(bad),
            Err(CorpusError::MalformedRecord { record: 2, .. })
        ));
        let dup = "{\"id\":\"1\",\"collection\":\"x\",\"text\":\"a\"}\n{\"id\":\"1\",\"collection\":\"x\",\"text\":\"b\"}\n";
        assert!(matches!(
            Corpus::parse(dup),
            Err(CorpusError::DuplicateId { record: 2, .. })
        ));
        assert!(matches!(
            CorpusIndex::ingest("...\n!!\n", Tokenizer::default()),
            Err(CorpusError::Empty)
        ));
    }

    #[test]
    fn plain_text_fallback() {
        let idx = CorpusIndex::ingest(
            "the nurse works\n\nthe doctor rests\n",
            Tokenizer::default(),
        )
        .unwrap();
        assert_eq!(idx.num_docs(), 2);
        assert_eq!(idx.collections(), ["default"]);
        assert_eq!(idx.frequency("the").per_collection[0].percent, 100.0);
    }

    #[test]
    fn concordance_exhaustion_and_spans() {
        let idx = CorpusIndex::build(
            Corpus::from_docs(vec![
                doc(
                    "d1",
                    "news",
                    "La enfermera llegó. Otra frase! La ENFERMERA y la enfermera.",
                ),
                doc("d2", "web", "Ninguna aquí.\nPero sí: enfermera."),
            ])
            .unwrap(),
            Tokenizer::default(),
        )
        .unwrap();
        let q = ConcordanceQuery {
            max_lines: Some(5),
            ..Default::default()
        };
        let lines = idx.concordance("Enfermera", &q);
        assert_eq!(lines.len(), 3);
        let picked: String = lines[1]
            .sentence
            .chars()
            .skip(lines[1].char_span.0)
            .take(lines[1].char_span.1 - lines[1].char_span.0)
            .collect();
        assert_eq!(picked, "ENFERMERA");
        assert_eq!(lines[2].sentence, "Pero sí: enfermera.");
        assert_eq!(lines[2].char_span, (9, 18));

        let only_web = idx.concordance(
            "enfermera",
            &ConcordanceQuery {
                collections: Some(vec!["web".into()]),
                ..q.clone()
            },
        );
        assert_eq!(only_web.len(), 1);
        assert_eq!(only_web[0].collection, "web");
        assert!(idx.concordance("nada", &q).is_empty());
    }

    #[test]
    fn fingerprint_changes_with_content() {
        let a = small();
        let b = CorpusIndex::build(
            Corpus::from_docs(vec![doc("d1", "news", "a b a"), doc("d2", "web", "b d")]).unwrap(),
            Tokenizer::default(),
        )
        .unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), small().fingerprint());
    }
}
