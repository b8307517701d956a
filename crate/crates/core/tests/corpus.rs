mod common;

use std::collections::{BTreeMap, HashSet};

use edia_core::corpus::HISTOGRAM_BINS;
use edia_core::{ConcordanceQuery, Corpus, CorpusError, CorpusIndex, Document, Tokenizer};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn docs(texts: &[(&str, &str)]) -> CorpusIndex {
    let docs = texts
        .iter()
        .enumerate()
        .map(|(i, (c, t))| Document {
            id: format!("d{i}"),
            collection: c.to_string(),
            text: t.to_string(),
        })
        .collect();
    CorpusIndex::build(Corpus::from_docs(docs).unwrap(), Tokenizer::default()).unwrap()
}

/// 1000 JSONL documents over 4 collections with a Zipf-ish vocabulary.
fn fixture_jsonl(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = ["news", "forum", "books", "wiki"];
    let words: Vec<String> = (0..300).map(|i| format!("t{i}")).collect();
    let mut out = String::new();
    for d in 0..1000 {
        let mut text = String::new();
        for s in 0..rng.random_range(1..4) {
            if s > 0 {
                text.push_str(". ");
            }
            let n = rng.random_range(3..12);
            let sent: Vec<&str> = (0..n)
                .map(|_| {
                    let r: f64 = rng.random();
                    words[((r * r * r) * 300.0) as usize].as_str()
                })
                .collect();
            text.push_str(&sent.join(" "));
        }
        let rec = serde_json::json!({"id": format!("doc{d}"), "collection": cols[d % 4], "text": text});
        out.push_str(&rec.to_string());
        out.push('\n');
    }
    out
}

/// Word counts by splitting raw text on anything that is not alphanumeric.
fn naive_counts(jsonl: &str) -> (BTreeMap<String, u64>, BTreeMap<(String, String), u64>) {
    let mut total = BTreeMap::new();
    let mut per = BTreeMap::new();
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let col = v["collection"].as_str().unwrap().to_owned();
        for w in v["text"]
            .as_str()
            .unwrap()
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
        {
            let w = w.to_lowercase();
            *total.entry(w.clone()).or_insert(0) += 1;
            *per.entry((w, col.clone())).or_insert(0) += 1;
        }
    }
    (total, per)
}

#[test]
fn two_doc_counts_and_ranks() {
    let idx = docs(&[("news", "a b a"), ("news", "b c")]);
    assert_eq!((idx.count("a"), idx.count("b"), idx.count("c")), (2, 2, 1));
    let fa = idx.frequency("a");
    assert_eq!(fa.total_count, 2);
    assert_eq!(fa.per_collection.len(), 1);
    assert_eq!(fa.per_collection[0].collection, "news");
    assert!((fa.per_collection[0].percent - 100.0).abs() < 1e-12);
    assert_eq!(fa.rank, Some(1));
    assert_eq!(idx.frequency("b").rank, Some(1));
    assert_eq!(idx.frequency("c").rank, Some(3));
    let z = idx.frequency("zzz");
    assert_eq!(z.total_count, 0);
    assert!(z.per_collection.is_empty() && z.rank.is_none());
}

#[test]
fn empty_and_bad_records() {
    assert!(matches!(Corpus::parse("  \n\n"), Err(CorpusError::Empty)));
    let bad = "{\"id\":\"x\",\"collection\":\"c\",\"text\":\"a\"}\n{\"id\":\"y\"}\n";
    assert!(matches!(Corpus::parse(bad), Err(CorpusError::MalformedRecord { record: 2, .. })));
    let dup = "{\"id\":\"x\",\"collection\":\"c\",\"text\":\"a\"}\n{\"id\":\"x\",\"collection\":\"c\",\"text\":\"b\"}\n";
    assert!(matches!(Corpus::parse(dup), Err(CorpusError::DuplicateId { .. })));
}

#[test]
fn plain_text_fallback() {
    let c = Corpus::parse("uno dos\ntres\n").unwrap();
    let idx = CorpusIndex::build(c, Tokenizer::default()).unwrap();
    assert_eq!(idx.num_docs(), 2);
    assert_eq!(idx.collections(), &["default"]);
}

#[test]
fn fixture_matches_naive_scan() {
    let text = fixture_jsonl(1);
    let idx = CorpusIndex::build(Corpus::parse(&text).unwrap(), Tokenizer::default()).unwrap();
    assert_eq!(idx.num_docs(), 1000);
    let (total, per) = naive_counts(&text);
    assert_eq!(idx.types().len(), total.len());
    for (w, &n) in &total {
        let f = idx.frequency(w);
        assert_eq!(f.total_count, n, "{w}");
        let mut sum_pct = 0.0;
        let mut sum = 0;
        for share in &f.per_collection {
            assert_eq!(share.count, per[&(w.clone(), share.collection.clone())]);
            sum += share.count;
            sum_pct += share.percent;
        }
        assert_eq!(sum, n);
        assert!((sum_pct - 100.0).abs() < 0.1);
        let greater = total.values().filter(|&&c| c > n).count();
        assert_eq!(f.rank, Some(greater + 1));
        let q = f.distribution.query_bin.unwrap();
        let bin = &f.distribution.bins[q];
        assert!(bin.lo <= n as f64 && (n as f64) < bin.hi);
    }
    assert_eq!(total.values().sum::<u64>(), idx.total_tokens());
    let f = idx.frequency("t0");
    assert_eq!(f.distribution.bins.len(), HISTOGRAM_BINS);
    let typed: u64 = f.distribution.bins.iter().map(|b| b.types).sum();
    assert_eq!(typed as usize, total.len());
}

#[test]
fn concordance_lines_contain_token_and_span() {
    let text = fixture_jsonl(2);
    let idx = CorpusIndex::build(Corpus::parse(&text).unwrap(), Tokenizer::default()).unwrap();
    let tok = Tokenizer::default();
    let q = ConcordanceQuery {
        max_lines: Some(50),
        collections: None,
        seed: 3,
    };
    let lines = idx.concordance("t5", &q);
    assert_eq!(lines.len(), 50);
    for l in &lines {
        assert!(tok.words(&l.sentence).contains(&"t5".to_string()));
        let chars: Vec<char> = l.sentence.chars().collect();
        let m: String = chars[l.char_span.0..l.char_span.1].iter().collect();
        assert_eq!(m.to_lowercase(), "t5");
    }
    let again = idx.concordance("t5", &q);
    assert_eq!(serde_json::to_string(&lines).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn concordance_collection_filter() {
    let text = fixture_jsonl(3);
    let idx = CorpusIndex::build(Corpus::parse(&text).unwrap(), Tokenizer::default()).unwrap();
    let q = ConcordanceQuery {
        max_lines: Some(20),
        collections: Some(vec!["wiki".into()]),
        seed: 1,
    };
    let lines = idx.concordance("t1", &q);
    assert!(!lines.is_empty());
    assert!(lines.iter().all(|l| l.collection == "wiki"));
}

#[test]
fn hundred_matches_two_seeds() {
    let mut texts = Vec::new();
    for i in 0..100 {
        texts.push(format!("sentence {i} mentions enfermera here."));
        texts.push(format!("filler {i} only."));
    }
    let pairs: Vec<(&str, &str)> = texts.iter().map(|t| ("c", t.as_str())).collect();
    let idx = docs(&pairs);
    let matches: HashSet<String> = texts
        .iter()
        .filter(|t| t.contains("enfermera"))
        .cloned()
        .collect();
    let mut samples = Vec::new();
    for seed in [1, 2] {
        let q = ConcordanceQuery {
            max_lines: Some(10),
            collections: None,
            seed,
        };
        let s = idx.concordance("enfermera", &q);
        assert_eq!(s.len(), 10);
        let uniq: HashSet<&str> = s.iter().map(|l| l.sentence.as_str()).collect();
        assert_eq!(uniq.len(), 10);
        assert!(s.iter().all(|l| matches.contains(&l.sentence)));
        samples.push(s);
    }
    assert_ne!(samples[0], samples[1]);
}

#[test]
fn exhaustion_and_default_size() {
    let idx = docs(&[("c", "x y. x z. x w. q q.")]);
    let all = idx.concordance("x", &ConcordanceQuery::default());
    assert_eq!(all.len(), 3);
    let mut many = String::new();
    for i in 0..20 {
        many.push_str(&format!("x {i}. "));
    }
    let idx = docs(&[("c", many.as_str())]);
    assert_eq!(idx.concordance("x", &ConcordanceQuery::default()).len(), 5);
    assert!(idx.concordance("nada", &ConcordanceQuery::default()).is_empty());
}

#[test]
fn unicode_spans_are_char_based() {
    let idx = docs(&[("es", "La Enfermera habló. Él también.")]);
    let l = &idx.concordance("enfermera", &ConcordanceQuery::default())[0];
    assert_eq!(l.sentence, "La Enfermera habló.");
    assert_eq!(l.char_span, (3, 12));
    assert_eq!(idx.concordance("él", &ConcordanceQuery::default()).len(), 1);
}

proptest! {
    #[test]
    fn totals_add_up(words in prop::collection::vec("[a-e]{1,3}", 1..60)) {
        let text = words.join(" ");
        let idx = CorpusIndex::ingest(&text, Tokenizer::default()).unwrap();
        let sum: u64 = idx.types().iter().map(|t| idx.count(t)).sum();
        prop_assert_eq!(sum, idx.total_tokens());
        prop_assert_eq!(sum as usize, words.len());
        for t in idx.types() {
            let f = idx.frequency(t);
            let q = f.distribution.query_bin.unwrap();
            let b = &f.distribution.bins[q];
            prop_assert!(b.lo <= f.total_count as f64 && (f.total_count as f64) < b.hi);
            let p = idx.percentile(f.total_count);
            prop_assert!((0.0..=100.0).contains(&p));
        }
    }

    #[test]
    fn same_seed_same_sample(seed in 0u64..1000, n in 1usize..15) {
        let text: String = (0..40).map(|i| format!("w {i}. ")).collect();
        let idx = CorpusIndex::ingest(&text, Tokenizer::default()).unwrap();
        let q = ConcordanceQuery { max_lines: Some(n), collections: None, seed };
        let a = idx.concordance("w", &q);
        prop_assert_eq!(a.len(), n);
        prop_assert_eq!(a, idx.concordance("w", &q));
    }
}
