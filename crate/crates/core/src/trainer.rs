//! Count-based embeddings: windowed co-occurrence counts, positive PMI
//! with a smoothed context distribution, and a truncated SVD.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusIndex;
use crate::embedding::{EmbeddingError, EmbeddingStore};
use crate::sparse::CsrMatrix;
use crate::svd::{self, RandomizedParams, TruncatedSvd};

pub const MIN_POWER_ITERATIONS: usize = 4;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid trainer config: {0}")]
    InvalidConfig(String),
    #[error("no token reaches min_count {0}")]
    EmptyVocabulary(u64),
    #[error("every trained vector is zero")]
    NoVectors,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

impl TrainError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::InvalidConfig(_) => "invalid_config",
            Self::EmptyVocabulary(_) => "empty_vocabulary",
            Self::NoVectors => "no_vectors",
            Self::Embedding(e) => e.code(),
        }
    }
}

/// Power of the singular values used to weight the word vectors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularWeighting {
    /// `U`
    None,
    /// `U · Σ^½`
    #[default]
    Sqrt,
    /// `U · Σ`
    Full,
}

impl SingularWeighting {
    fn apply(self, s: f64) -> f64 {
        match self {
            Self::None => 1.0,
            Self::Sqrt => s.sqrt(),
            Self::Full => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    /// Tokens on each side of the target.
    pub window: usize,
    pub min_count: u64,
    pub dim: usize,
    /// Exponent applied to context counts before normalizing.
    pub context_smoothing: f64,
    pub weighting: SingularWeighting,
    pub power_iterations: usize,
    pub oversamples: usize,
    pub seed: u64,
    /// Vocabularies smaller than this use the exact dense SVD.
    pub exact_below: usize,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            window: 5,
            min_count: 2,
            dim: 100,
            context_smoothing: 0.75,
            weighting: SingularWeighting::Sqrt,
            power_iterations: MIN_POWER_ITERATIONS,
            oversamples: 10,
            seed: 0,
            exact_below: 2000,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.into()));
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if !(self.context_smoothing > 0.0 && self.context_smoothing <= 1.0) {
            return bad("context_smoothing must be in (0, 1]");
        }
        if self.power_iterations < MIN_POWER_ITERATIONS {
            return bad("power_iterations must be at least 4");
        }
        Ok(())
    }
}

/// Symmetric within-window co-occurrence counts over the retained
/// vocabulary.
#[derive(Debug, Clone)]
pub struct CooccurrenceMatrix {
    pub vocab: Vec<String>,
    pub counts: CsrMatrix,
}

impl CooccurrenceMatrix {
    pub fn get(&self, w: &str, c: &str) -> f64 {
        let find = |t: &str| self.vocab.iter().position(|v| v == t);
        match (find(w), find(c)) {
            (Some(i), Some(j)) => self.counts.get(i, j),
            _ => 0.0,
        }
    }
}

/// Counts every ordered pair at distance `1..=window` inside a sentence.
/// Tokens below `min_count` are removed from the sequence first.
pub fn count_cooccurrences(
    corpus: &CorpusIndex,
    cfg: &TrainerConfig,
) -> Result<CooccurrenceMatrix, TrainError> {
    if cfg.window == 0 {
        return Err(TrainError::InvalidConfig(
            "window must be at least 1".into(),
        ));
    }
    let types = corpus.types();
    let mut kept: Vec<u32> = (0..types.len() as u32)
        .filter(|&t| corpus.type_count(t) >= cfg.min_count)
        .collect();
    if kept.is_empty() {
        return Err(TrainError::EmptyVocabulary(cfg.min_count));
    }
    kept.sort_by(|&a, &b| {
        corpus
            .type_count(b)
            .cmp(&corpus.type_count(a))
            .then_with(|| types[a as usize].cmp(&types[b as usize]))
    });
    let mut remap = vec![u32::MAX; types.len()];
    for (row, &t) in kept.iter().enumerate() {
        remap[t as usize] = row as u32;
    }

    let mut pairs: HashMap<(u32, u32), u64> = HashMap::new();
    let mut seq = Vec::new();
    for sentence in corpus.sentences() {
        seq.clear();
        seq.extend(
            sentence
                .iter()
                .map(|&t| remap[t as usize])
                .filter(|&r| r != u32::MAX),
        );
        for i in 0..seq.len() {
            for j in (i + 1)..seq.len().min(i + cfg.window + 1) {
                *pairs.entry((seq[i], seq[j])).or_default() += 1;
                *pairs.entry((seq[j], seq[i])).or_default() += 1;
            }
        }
    }
    let n = kept.len();
    let triplets = pairs
        .into_iter()
        .map(|((w, c), k)| (w as usize, c as usize, k as f64))
        .collect();
    Ok(CooccurrenceMatrix {
        vocab: kept.iter().map(|&t| types[t as usize].clone()).collect(),
        counts: CsrMatrix::from_triplets(n, n, triplets),
    })
}

/// `max(0, log(p(w,c) / (p(w) · p_α(c))))` where
/// `p_α(c) = count(c)^α / Σ count(·)^α` and counts are column sums.
pub fn ppmi(counts: &CsrMatrix, alpha: f64) -> CsrMatrix {
    let row = counts.row_sums();
    if row.iter().sum::<f64>() == 0.0 {
        return counts.clone();
    }
    let col_smoothed: Vec<f64> = counts.col_sums().iter().map(|c| c.powf(alpha)).collect();
    let smoothed_total: f64 = col_smoothed.iter().sum();
    counts
        .map_values(|w, c, n| {
            // p(w,c) / (p(w) p_α(c)) with the totals cancelled, so integer
            // counts of an independent table give exactly 1
            let ratio = (n * smoothed_total) / (row[w] * col_smoothed[c]);
            ratio.ln().max(0.0)
        })
        .filter(|v| v > 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingManifest {
    pub config: TrainerConfig,
    pub corpus_sha256: String,
    pub vocab_size: usize,
    pub dim: usize,
    pub solver: String,
    pub warnings: Vec<String>,
    pub version: String,
}

#[derive(Debug, Clone)]
pub struct TrainedEmbedding {
    pub store: EmbeddingStore,
    pub manifest: TrainingManifest,
}

fn factorize(m: &CsrMatrix, rank: usize, cfg: &TrainerConfig) -> (TruncatedSvd, &'static str) {
    if m.nrows() < cfg.exact_below {
        (svd::exact(&m.to_dense(), rank), "exact")
    } else {
        let params = RandomizedParams {
            oversamples: cfg.oversamples,
            power_iterations: cfg.power_iterations,
            seed: cfg.seed,
        };
        (svd::randomized(m, rank, params), "randomized")
    }
}

/// PPMI + truncated SVD embedding of `corpus`.
pub fn train(
    id: impl Into<String>,
    corpus: &CorpusIndex,
    cfg: &TrainerConfig,
) -> Result<TrainedEmbedding, TrainError> {
    cfg.validate()?;
    let cooc = count_cooccurrences(corpus, cfg)?;
    let pmi = ppmi(&cooc.counts, cfg.context_smoothing);
    let n = cooc.vocab.len();
    let mut warnings = Vec::new();

    let mut rank = cfg.dim;
    if rank > n {
        warnings.push(format!(
            "dim {} exceeds vocabulary size {n}; reduced",
            cfg.dim
        ));
        rank = n;
    }
    let (mut factors, solver) = factorize(&pmi, rank, cfg);
    let achievable = factors.numerical_rank(n, n);
    if achievable < factors.rank() {
        warnings.push(format!(
            "PPMI matrix has numerical rank {achievable}; dim reduced from {rank}"
        ));
        factors = factors.truncate(achievable);
    }
    if factors.rank() == 0 {
        return Err(TrainError::NoVectors);
    }

    let weights: Vec<f64> = factors
        .singular_values
        .iter()
        .map(|&s| cfg.weighting.apply(s))
        .collect();
    let vectors: DMatrix<f64> =
        DMatrix::from_fn(n, factors.rank(), |i, j| factors.u[(i, j)] * weights[j]);
    let mut rows = Vec::with_capacity(n);
    let mut dropped = Vec::new();
    for (i, token) in cooc.vocab.iter().enumerate() {
        let row: Vec<f64> = vectors.row(i).iter().copied().collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= f64::EPSILON {
            dropped.push(token.clone());
        } else {
            rows.push((token.clone(), row));
        }
    }
    if !dropped.is_empty() {
        warnings.push(format!(
            "dropped {} zero-norm rows: {:?}",
            dropped.len(),
            dropped
        ));
    }
    if rows.is_empty() {
        return Err(TrainError::NoVectors);
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let dim = factors.rank();
    let store = EmbeddingStore::from_rows_with(id, rows, corpus.tokenizer().normalizer)?;
    let manifest = TrainingManifest {
        config: cfg.clone(),
        corpus_sha256: corpus.fingerprint(),
        vocab_size: store.len(),
        dim,
        solver: solver.into(),
        warnings,
        version: crate::VERSION.into(),
    };
    Ok(TrainedEmbedding { store, manifest })
}
