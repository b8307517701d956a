//! Independent reference implementations used as test oracles. Nothing in
//! here calls into the library's numeric code.
#![allow(dead_code)]

use std::collections::HashMap;

use edia_core::EmbeddingStore;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn naive_cosine(u: &[f64], v: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for i in 0..u.len() {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    dot / (nu.sqrt() * nv.sqrt())
}

pub fn random_rows(n: usize, d: usize, seed: u64) -> Vec<(String, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let v = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            (format!("w{i:04}"), v)
        })
        .collect()
}

pub fn random_store(n: usize, d: usize, seed: u64) -> EmbeddingStore {
    EmbeddingStore::from_rows("rand", random_rows(n, d, seed)).unwrap()
}

/// Sorts every other row by cosine (desc, then token asc) and keeps `k`.
pub fn brute_nearest(rows: &[(String, Vec<f64>)], query: usize, k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = rows
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != query)
        .map(|(_, (t, v))| (t.clone(), naive_cosine(&rows[query].1, v)))
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Sample covariance (n - 1 denominator) of row vectors.
pub fn sample_covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= (n - 1) as f64;
        }
    }
    cov
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Add-k n-gram probability computed by rescanning the raw sentences.
/// Vocabulary is every token seen `>= min_count` times; others map to
/// `<unk>`.
pub struct NaiveNgram {
    pub sentences: Vec<Vec<String>>,
    pub order: usize,
    pub k: f64,
    pub vocab: Vec<String>,
}

impl NaiveNgram {
    pub fn new(sentences: Vec<Vec<String>>, order: usize, k: f64, min_count: u64) -> Self {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for s in &sentences {
            for t in s {
                *freq.entry(t).or_default() += 1;
            }
        }
        let mut vocab: Vec<String> = freq
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .map(|(w, _)| w.to_owned())
            .collect();
        vocab.sort();
        Self {
            sentences,
            order,
            k,
            vocab,
        }
    }

    fn map(&self, t: &str) -> String {
        if self.vocab.binary_search(&t.to_owned()).is_ok() {
            t.to_owned()
        } else {
            "<unk>".to_owned()
        }
    }

    fn padded(&self, s: &[String]) -> Vec<String> {
        let mut p = vec!["<s>".to_owned(); self.order - 1];
        p.extend(s.iter().map(|t| self.map(t)));
        p.push("</s>".to_owned());
        p
    }

    pub fn outcomes(&self) -> usize {
        self.vocab.len() + 2
    }

    /// `p(next | context)` where `context` is already padded and mapped.
    pub fn prob_ctx(&self, context: &[String], next: &str) -> f64 {
        let h = self.order - 1;
        let mut ctx_count = 0u64;
        let mut joint = 0u64;
        for s in self.sentences.iter().filter(|s| !s.is_empty()) {
            let p = self.padded(s);
            for i in h..p.len() {
                if p[i - h..i] == *context {
                    ctx_count += 1;
                    if p[i] == next {
                        joint += 1;
                    }
                }
            }
        }
        let v = self.outcomes() as f64;
        if ctx_count == 0 {
            1.0 / v
        } else {
            (joint as f64 + self.k) / (ctx_count as f64 + self.k * v)
        }
    }

    /// Chain-rule log-probability of a sentence, `</s>` included.
    pub fn sentence_log_prob(&self, s: &[String]) -> f64 {
        let p = self.padded(s);
        let h = self.order - 1;
        (h..p.len())
            .map(|i| self.prob_ctx(&p[i - h..i], &p[i]).ln())
            .sum()
    }
}

/// Pseudo-words for synthetic corpora.
pub fn filler_words(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i:03}")).collect()
}

pub const FEMALE_SEEDS: [&str; 5] = ["she", "woman", "her", "mother", "girl"];
pub const MALE_SEEDS: [&str; 5] = ["he", "man", "his", "father", "boy"];

/// Synthetic corpus of `n` sentences in which "nurse" only ever shares a
/// sentence with female seed words (`toward_female`) or only with male
/// ones. Every sentence holds two seeds of one gender and shared neutral
/// filler; one sentence in five also holds the probe.
pub fn skew_corpus(n: usize, toward_female: bool, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let neutral = filler_words(60);
    let mut out = String::new();
    for i in 0..n {
        let female = match i % 5 {
            0 => toward_female,
            1 | 2 => true,
            _ => false,
        };
        let seeds = if female { &FEMALE_SEEDS } else { &MALE_SEEDS };
        let a = rng.random_range(0..seeds.len());
        let b = (a + rng.random_range(1..seeds.len())) % seeds.len();
        let mut words = vec![seeds[a].to_owned(), seeds[b].to_owned()];
        if i % 5 == 0 {
            words.push("nurse".into());
        }
        while words.len() < 6 {
            words.push(neutral[rng.random_range(0..neutral.len())].clone());
        }
        out.push_str(&words.join(" "));
        out.push_str(".\n");
    }
    out
}

/// Random sentences over a small skewed vocabulary.
pub fn fixture_sentences(n: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<String> = (0..40).map(|i| format!("v{i}")).collect();
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..9);
            (0..len)
                .map(|_| {
                    let r: f64 = rng.random();
                    vocab[(r * r * 40.0) as usize].clone()
                })
                .collect()
        })
        .collect()
}
