//! Bias spaces built from two opposed seed lists, and the scores derived
//! from them.
//!
//! A space's direction points from the `b` extreme toward the `a`
//! extreme, so a positive score means a word sits closer to `a`. Scores
//! are cosines with the unit direction and therefore lie in `[-1, 1]`
//! regardless of the embedding's vector norms.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusIndex;
use crate::embedding::EmbeddingStore;
use crate::lexicon::{ResolvedList, WordList};

#[derive(Debug, Error)]
pub enum BiasError {
    #[error("no word of list {0:?} is in the vocabulary")]
    EmptyResolvedList(String),
    #[error("lists {a:?} and {b:?} share words: {shared:?}")]
    ListOverlap {
        a: String,
        b: String,
        shared: Vec<String>,
    },
    #[error("pca-pairs needs lists of equal length, got {a} and {b}")]
    UnequalPairs { a: usize, b: usize },
    #[error("lists {a:?} and {b:?} have identical centroids; no direction")]
    DegenerateDirection { a: String, b: String },
    #[error("space was built on embedding {space:?}, got {given:?}")]
    EmbeddingMismatch { space: String, given: String },
    #[error("comparison needs at least 2 embeddings, got {0}")]
    TooFewEmbeddings(usize),
}

impl BiasError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::EmptyResolvedList(_) => "empty_resolved_list",
            Self::ListOverlap { .. } => "list_overlap",
            Self::UnequalPairs { .. } => "unequal_pairs",
            Self::DegenerateDirection { .. } => "degenerate_direction",
            Self::EmbeddingMismatch { .. } => "embedding_mismatch",
            Self::TooFewEmbeddings(_) => "too_few_embeddings",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceMethod {
    /// Difference of the two list centroids.
    #[default]
    CentroidDiff,
    /// First principal axis of the aligned pair differences.
    PcaPairs,
}

/// Whether seed vectors are unit-normalized before averaging.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentroidMode {
    #[default]
    Unit,
    Raw,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceConfig {
    #[serde(default)]
    pub method: SpaceMethod,
    #[serde(default)]
    pub centroid: CentroidMode,
}

impl SpaceConfig {
    pub fn new(method: SpaceMethod) -> Self {
        Self {
            method,
            centroid: CentroidMode::Unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSpace {
    pub embedding_id: String,
    pub extreme_a: ResolvedList,
    pub extreme_b: ResolvedList,
    pub direction: Vec<f64>,
    pub config: SpaceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasScore {
    pub token: String,
    pub score: f64,
    pub space: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordScores {
    pub space: String,
    pub scores: Vec<BiasScore>,
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub token: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneScores {
    pub space_x: String,
    pub space_y: String,
    pub points: Vec<PlanePoint>,
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAsymmetry {
    pub word_a: String,
    pub word_b: String,
    pub score_a: f64,
    pub score_b: f64,
    /// `score_a + score_b`; zero when both forms sit symmetrically about
    /// the midpoint of the space.
    pub asymmetry: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub word_a: String,
    pub word_b: String,
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub space: String,
    pub pairs: Vec<PairAsymmetry>,
    pub skipped: Vec<SkippedPair>,
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn seed_vector(emb: &EmbeddingStore, token: &str, mode: CentroidMode) -> Vec<f64> {
    let i = emb.lookup(token).expect("resolved token");
    match mode {
        CentroidMode::Unit => emb.unit_row(i),
        CentroidMode::Raw => emb.row(i).to_vec(),
    }
}

fn centroid(emb: &EmbeddingStore, list: &ResolvedList, mode: CentroidMode) -> Vec<f64> {
    let mut c = vec![0.0; emb.dim()];
    for t in &list.resolved {
        for (acc, v) in c.iter_mut().zip(seed_vector(emb, t, mode)) {
            *acc += v;
        }
    }
    let n = list.resolved.len() as f64;
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// Builds the bias space spanned by extremes `a` (positive side) and `b`.
pub fn build_space(
    emb: &EmbeddingStore,
    a: &WordList,
    b: &WordList,
    cfg: SpaceConfig,
) -> Result<BiasSpace, BiasError> {
    let ra = a.resolve(emb);
    let rb = b.resolve(emb);
    if cfg.method == SpaceMethod::PcaPairs && a.len() != b.len() {
        return Err(BiasError::UnequalPairs {
            a: a.len(),
            b: b.len(),
        });
    }
    for r in [&ra, &rb] {
        if r.resolved.is_empty() {
            return Err(BiasError::EmptyResolvedList(r.name.clone()));
        }
    }
    let in_b: HashSet<&String> = rb.resolved.iter().collect();
    let shared: Vec<String> = ra
        .resolved
        .iter()
        .filter(|t| in_b.contains(t))
        .cloned()
        .collect();
    if !shared.is_empty() {
        return Err(BiasError::ListOverlap {
            a: ra.name.clone(),
            b: rb.name.clone(),
            shared,
        });
    }

    let ca = centroid(emb, &ra, cfg.centroid);
    let cb = centroid(emb, &rb, cfg.centroid);
    let diff: Vec<f64> = ca.iter().zip(&cb).map(|(x, y)| x - y).collect();
    let degenerate = || BiasError::DegenerateDirection {
        a: ra.name.clone(),
        b: rb.name.clone(),
    };

    let direction = match cfg.method {
        SpaceMethod::CentroidDiff => unit(&diff).ok_or_else(degenerate)?,
        SpaceMethod::PcaPairs => {
            let pairs: Vec<Vec<f64>> = a
                .words
                .iter()
                .zip(&b.words)
                .filter(|(x, y)| emb.contains(x) && emb.contains(y))
                .map(|(x, y)| {
                    let vx = seed_vector(emb, x, cfg.centroid);
                    let vy = seed_vector(emb, y, cfg.centroid);
                    vx.iter().zip(&vy).map(|(p, q)| p - q).collect()
                })
                .collect();
            if pairs.is_empty() {
                return Err(BiasError::EmptyResolvedList(format!(
                    "{}/{} pairs",
                    ra.name, rb.name
                )));
            }
            let mut axis = principal_axis(&pairs).ok_or_else(degenerate)?;
            let side = dot(&axis, &diff);
            if side < 0.0 {
                axis.iter_mut().for_each(|v| *v = -*v);
            } else if side == 0.0 {
                return Err(degenerate());
            }
            axis
        }
    };

    Ok(BiasSpace {
        embedding_id: emb.id().to_owned(),
        extreme_a: ra,
        extreme_b: rb,
        direction,
        config: cfg,
    })
}

/// Leading right singular vector of the (uncentered) pair-difference
/// matrix, i.e. the axis of largest spread of the differences.
fn principal_axis(rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let d = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let best = (0..svd.singular_values.len())
        .max_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]))?;
    if svd.singular_values[best] <= 0.0 {
        return None;
    }
    unit(&v_t.row(best).iter().copied().collect::<Vec<_>>())
}

impl BiasSpace {
    /// Human-readable identity: `<a>|<b>@<embedding>`.
    pub fn label(&self) -> String {
        format!(
            "{}|{}@{}",
            self.extreme_a.name, self.extreme_b.name, self.embedding_id
        )
    }

    fn check(&self, emb: &EmbeddingStore) -> Result<(), BiasError> {
        if emb.id() != self.embedding_id || emb.dim() != self.direction.len() {
            return Err(BiasError::EmbeddingMismatch {
                space: self.embedding_id.clone(),
                given: emb.id().to_owned(),
            });
        }
        Ok(())
    }

    /// Cosine of the word's vector with the direction.
    pub fn score_row(&self, emb: &EmbeddingStore, row: usize) -> f64 {
        (dot(emb.row(row), &self.direction) / emb.norm(row)).clamp(-1.0, 1.0)
    }

    pub fn score_token(&self, emb: &EmbeddingStore, token: &str) -> Option<f64> {
        emb.lookup(token).map(|i| self.score_row(emb, i))
    }
}

pub fn score_words(
    space: &BiasSpace,
    emb: &EmbeddingStore,
    words: &[String],
) -> Result<WordScores, BiasError> {
    space.check(emb)?;
    let label = space.label();
    let mut scores = Vec::new();
    let mut missing = Vec::new();
    for w in words {
        match emb.lookup(w) {
            Some(i) => scores.push(BiasScore {
                token: emb.token(i).to_owned(),
                score: space.score_row(emb, i),
                space: label.clone(),
            }),
            None => missing.push(w.clone()),
        }
    }
    Ok(WordScores {
        space: label,
        scores,
        missing,
    })
}

/// Scores every word against two spaces at once (x from `space_x`, y
/// from `space_y`).
pub fn score_words_2spaces(
    space_x: &BiasSpace,
    space_y: &BiasSpace,
    emb: &EmbeddingStore,
    words: &[String],
) -> Result<PlaneScores, BiasError> {
    space_x.check(emb)?;
    space_y.check(emb)?;
    let mut points = Vec::new();
    let mut missing = Vec::new();
    for w in words {
        match emb.lookup(w) {
            Some(i) => points.push(PlanePoint {
                token: emb.token(i).to_owned(),
                x: space_x.score_row(emb, i),
                y: space_y.score_row(emb, i),
            }),
            None => missing.push(w.clone()),
        }
    }
    Ok(PlaneScores {
        space_x: space_x.label(),
        space_y: space_y.label(),
        points,
        missing,
    })
}

/// Scores both forms of each pair. `word_a` is the form marked for the
/// space's `a` extreme.
pub fn pair_asymmetry(
    space: &BiasSpace,
    emb: &EmbeddingStore,
    pairs: &[(String, String)],
) -> Result<PairReport, BiasError> {
    space.check(emb)?;
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for (wa, wb) in pairs {
        match (emb.lookup(wa), emb.lookup(wb)) {
            (Some(ia), Some(ib)) => {
                let score_a = space.score_row(emb, ia);
                let score_b = space.score_row(emb, ib);
                out.push(PairAsymmetry {
                    word_a: emb.token(ia).to_owned(),
                    word_b: emb.token(ib).to_owned(),
                    score_a,
                    score_b,
                    asymmetry: score_a + score_b,
                });
            }
            (ia, ib) => {
                let mut missing = Vec::new();
                if ia.is_none() {
                    missing.push(wa.clone());
                }
                if ib.is_none() {
                    missing.push(wb.clone());
                }
                skipped.push(SkippedPair {
                    word_a: wa.clone(),
                    word_b: wb.clone(),
                    missing,
                });
            }
        }
    }
    Ok(PairReport {
        space: space.label(),
        pairs: out,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyStat {
    pub count: u64,
    pub percentile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordDiagnostic {
    pub token: String,
    pub oov: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencyStat>,
    /// Mean cosine of the word's top neighbours; high values suggest a
    /// tight, single-sense neighbourhood.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neighbor_dispersion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedDiagnostics {
    pub list: String,
    pub words: Vec<WordDiagnostic>,
    pub oov_rate: f64,
    pub min_frequency: Option<u64>,
    pub median_frequency: Option<f64>,
}

pub const DISPERSION_NEIGHBORS: usize = 10;

pub fn diagnose_list(
    list: &WordList,
    emb: &EmbeddingStore,
    corpus: Option<&CorpusIndex>,
) -> SeedDiagnostics {
    let mut words = Vec::with_capacity(list.len());
    let mut counts = Vec::new();
    let mut oov = 0usize;
    for w in &list.words {
        let Some(i) = emb.lookup(w) else {
            oov += 1;
            words.push(WordDiagnostic {
                token: w.clone(),
                oov: true,
                frequency: None,
                neighbor_dispersion: None,
            });
            continue;
        };
        let token = emb.token(i).to_owned();
        let frequency = corpus.map(|c| {
            let count = c.count(&token);
            counts.push(count);
            FrequencyStat {
                count,
                percentile: c.percentile(count),
            }
        });
        let neighbor_dispersion = emb
            .nearest(&token, DISPERSION_NEIGHBORS, &[])
            .ok()
            .filter(|n| !n.is_empty())
            .map(|n| n.iter().map(|x| x.similarity).sum::<f64>() / n.len() as f64);
        words.push(WordDiagnostic {
            token,
            oov: false,
            frequency,
            neighbor_dispersion,
        });
    }
    counts.sort_unstable();
    let median_frequency = match counts.len() {
        0 => None,
        n if n % 2 == 1 => Some(counts[n / 2] as f64),
        n => Some((counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0),
    };
    SeedDiagnostics {
        list: list.name.clone(),
        words,
        oov_rate: oov as f64 / list.len() as f64,
        min_frequency: counts.first().copied(),
        median_frequency,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonColumn {
    pub embedding_id: String,
    pub available: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub scores: Vec<BiasScore>,
    pub missing: Vec<String>,
    pub extreme_a_missing: Vec<String>,
    pub extreme_b_missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub extreme_a: String,
    pub extreme_b: String,
    pub columns: Vec<ComparisonColumn>,
}

/// Resolves the same lists independently in every embedding and scores
/// `words` in each. Embeddings where the space cannot be built are
/// reported as unavailable rather than failing the whole table.
pub fn compare_embeddings(
    a: &WordList,
    b: &WordList,
    cfg: SpaceConfig,
    words: &[String],
    embs: &[&EmbeddingStore],
) -> Result<Comparison, BiasError> {
    if embs.len() < 2 {
        return Err(BiasError::TooFewEmbeddings(embs.len()));
    }
    let columns = embs
        .iter()
        .map(|emb| {
            let extreme_a_missing = a.resolve(emb).missing;
            let extreme_b_missing = b.resolve(emb).missing;
            match build_space(emb, a, b, cfg).and_then(|s| score_words(&s, emb, words)) {
                Ok(ws) => ComparisonColumn {
                    embedding_id: emb.id().to_owned(),
                    available: true,
                    reason: None,
                    scores: ws.scores,
                    missing: ws.missing,
                    extreme_a_missing,
                    extreme_b_missing,
                },
                Err(e) => ComparisonColumn {
                    embedding_id: emb.id().to_owned(),
                    available: false,
                    reason: Some(e.to_string()),
                    scores: Vec::new(),
                    missing: words.to_vec(),
                    extreme_a_missing,
                    extreme_b_missing,
                },
            }
        })
        .collect();
    Ok(Comparison {
        extreme_a: a.name.clone(),
        extreme_b: b.name.clone(),
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(rows: &[(&str, &[f64])]) -> EmbeddingStore {
        EmbeddingStore::from_rows(
            "t",
            rows.iter()
                .map(|(t, v)| (t.to_string(), v.to_vec()))
                .collect(),
        )
        .unwrap()
    }

    fn list(name: &str, words: &[&str]) -> WordList {
        WordList::new(name, words.iter().copied()).unwrap()
    }

    fn words(w: &[&str]) -> Vec<String> {
        w.iter().map(|s| s.to_string()).collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn forced_direction() {
        let e = store(&[("p", &[1.0, 0.0]), ("q", &[-1.0, 0.0])]);
        let s = build_space(
            &e,
            &list("a", &["p"]),
            &list("b", &["q"]),
            SpaceConfig::default(),
        )
        .unwrap();
        assert!(close(&s.direction, &[1.0, 0.0], 1e-15));
    }

    #[test]
    fn hand_centroid_direction() {
        let e = store(&[("p", &[1.0, 0.0]), ("r", &[0.0, 1.0]), ("q", &[-1.0, 0.0])]);
        let s = build_space(
            &e,
            &list("a", &["p", "r"]),
            &list("b", &["q"]),
            SpaceConfig::default(),
        )
        .unwrap();
        // normalize((0.5, 0.5) - (-1, 0)) = (1.5, 0.5) / sqrt(2.5)
        let n = 2.5f64.sqrt();
        assert!(close(&s.direction, &[1.5 / n, 0.5 / n], 1e-15));
        let swapped = build_space(
            &e,
            &list("b", &["q"]),
            &list("a", &["p", "r"]),
            SpaceConfig::default(),
        )
        .unwrap();
        for (x, y) in s.direction.iter().zip(&swapped.direction) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn unit_and_raw_centroids_differ_for_long_vectors() {
        let e = store(&[("p", &[10.0, 0.0]), ("r", &[0.0, 1.0]), ("q", &[-1.0, 0.0])]);
        let a = list("a", &["p", "r"]);
        let b = list("b", &["q"]);
        let unit = build_space(&e, &a, &b, SpaceConfig::default()).unwrap();
        let raw = build_space(
            &e,
            &a,
            &b,
            SpaceConfig {
                method: SpaceMethod::CentroidDiff,
                centroid: CentroidMode::Raw,
            },
        )
        .unwrap();
        let n = 2.5f64.sqrt();
        assert!(close(&unit.direction, &[1.5 / n, 0.5 / n], 1e-15));
        // raw: (5, 0.5) - (-1, 0) = (6, 0.5)
        let n = (36.25f64).sqrt();
        assert!(close(&raw.direction, &[6.0 / n, 0.5 / n], 1e-15));
    }

    #[test]
    fn construction_errors() {
        let e = store(&[("p", &[1.0, 0.0]), ("q", &[-1.0, 0.0]), ("r", &[0.0, 1.0])]);
        let cfg = SpaceConfig::default();
        assert!(matches!(
            build_space(&e, &list("a", &["zz"]), &list("b", &["q"]), cfg),
            Err(BiasError::EmptyResolvedList(n)) if n == "a"
        ));
        assert!(matches!(
            build_space(&e, &list("a", &["p", "r"]), &list("b", &["q", "R"]), cfg),
            Err(BiasError::ListOverlap { shared, .. }) if shared == ["r"]
        ));
        assert!(matches!(
            build_space(
                &e,
                &list("a", &["p", "r"]),
                &list("b", &["q"]),
                SpaceConfig::new(SpaceMethod::PcaPairs)
            ),
            Err(BiasError::UnequalPairs { a: 2, b: 1 })
        ));
        let twin = store(&[("p", &[1.0, 0.0]), ("q", &[2.0, 0.0])]);
        assert!(matches!(
            build_space(&twin, &list("a", &["p"]), &list("b", &["q"]), cfg),
            Err(BiasError::DegenerateDirection { .. })
        ));
    }

    #[test]
    fn oov_seeds_are_reported_not_fatal() {
        let e = store(&[("p", &[1.0, 0.0]), ("q", &[-1.0, 0.0])]);
        let s = build_space(
            &e,
            &list("a", &["p", "ghost"]),
            &list("b", &["q"]),
            SpaceConfig::default(),
        )
        .unwrap();
        assert_eq!(s.extreme_a.missing, ["ghost"]);
    }

    #[test]
    fn pca_pairs_recovers_shared_axis() {
        // pairs differ along x plus small, opposite-sign y noise
        let e = store(&[
            ("she", &[1.0, 0.1, 0.3]),
            ("he", &[-1.0, 0.1, 0.3]),
            ("mother", &[0.9, -0.5, 1.0]),
            ("father", &[-0.9, -0.4, 1.0]),
        ]);
        let s = build_space(
            &e,
            &list("f", &["she", "mother"]),
            &list("m", &["he", "father"]),
            SpaceConfig {
                method: SpaceMethod::PcaPairs,
                centroid: CentroidMode::Raw,
            },
        )
        .unwrap();
        assert!((s.direction.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.direction[0] > 0.99);
        let swapped = build_space(
            &e,
            &list("m", &["he", "father"]),
            &list("f", &["she", "mother"]),
            SpaceConfig {
                method: SpaceMethod::PcaPairs,
                centroid: CentroidMode::Raw,
            },
        )
        .unwrap();
        assert!(close(
            &s.direction,
            &swapped.direction.iter().map(|v| -v).collect::<Vec<_>>(),
            1e-12
        ));
    }

    #[test]
    fn scores_alignment_and_orthogonality() {
        let e = store(&[
            ("p", &[1.0, 0.0, 0.0]),
            ("r", &[0.0, 1.0, 0.0]),
            ("q", &[-1.0, 0.0, 0.0]),
            ("mid", &[0.5, 0.5, 0.0]),
            ("ortho", &[0.0, 0.0, 2.0]),
        ]);
        let s = build_space(
            &e,
            &list("a", &["p", "r"]),
            &list("b", &["q"]),
            SpaceConfig::default(),
        )
        .unwrap();
        let ws = score_words(&s, &e, &words(&["mid", "ortho", "nope"])).unwrap();
        assert_eq!(ws.missing, ["nope"]);
        let mid = ws.scores[0].score;
        let expected = dot(&[0.5, 0.5, 0.0], &s.direction) / 0.5f64.sqrt();
        assert!((mid - expected).abs() < 1e-12);
        assert!(mid > 0.0);
        assert!(ws.scores[1].score.abs() < 1e-9);
    }

    #[test]
    fn two_space_scores_match_single_space_runs() {
        let e = store(&[
            ("man", &[1.0, 0.0, 0.0]),
            ("woman", &[-1.0, 0.0, 0.0]),
            ("old", &[0.0, 1.0, 0.0]),
            ("young", &[0.0, -1.0, 0.0]),
            ("fight", &[1.0, 1.0, 0.1]),
            ("makeup", &[-1.0, -0.9, 0.2]),
            ("axis", &[1.0, 0.0, 0.0001]),
        ]);
        let gender = build_space(
            &e,
            &list("m", &["man"]),
            &list("w", &["woman"]),
            SpaceConfig::default(),
        )
        .unwrap();
        let age = build_space(
            &e,
            &list("o", &["old"]),
            &list("y", &["young"]),
            SpaceConfig::default(),
        )
        .unwrap();
        let words: Vec<String> = ["fight", "makeup", "axis"].map(String::from).to_vec();
        let plane = score_words_2spaces(&gender, &age, &e, &words).unwrap();
        let fight = &plane.points[0];
        assert!(fight.x > 0.0 && fight.y > 0.0);
        let makeup = &plane.points[1];
        assert!(makeup.x < 0.0 && makeup.y < 0.0);
        let axis = &plane.points[2];
        assert!((axis.x - 1.0).abs() < 1e-6 && axis.y.abs() < 1e-9);
        let wl = &words;
        let xs = score_words(&gender, &e, &wl).unwrap();
        let ys = score_words(&age, &e, &wl).unwrap();
        for ((p, x), y) in plane.points.iter().zip(&xs.scores).zip(&ys.scores) {
            assert_eq!(p.x, x.score);
            assert_eq!(p.y, y.score);
        }
        assert!(score_words_2spaces(&gender, &age, &e, &[])
            .unwrap()
            .points
            .is_empty());
    }

    #[test]
    fn mismatched_embedding_is_rejected() {
        let e = store(&[("p", &[1.0, 0.0]), ("q", &[-1.0, 0.0])]);
        let other = e.clone().with_id("other");
        let s = build_space(
            &e,
            &list("a", &["p"]),
            &list("b", &["q"]),
            SpaceConfig::default(),
        )
        .unwrap();
        assert!(matches!(
            score_words(&s, &other, &words(&["p"])),
            Err(BiasError::EmbeddingMismatch { .. })
        ));
    }

    #[test]
    fn pair_asymmetry_hand_values() {
        // scores 0.9 and -0.2 against direction (1, 0)
        let e = store(&[
            ("pos", &[1.0, 0.0]),
            ("neg", &[-1.0, 0.0]),
            ("enfermera", &[0.9, 0.19f64.sqrt()]),
            ("enfermero", &[-0.2, 0.96f64.sqrt()]),
            ("abogada", &[0.6, 0.8]),
            ("abogado", &[-0.6, 0.8]),
        ]);
        let s = build_space(
            &e,
            &list("f", &["pos"]),
            &list("m", &["neg"]),
            SpaceConfig::default(),
        )
        .unwrap();
        let rep = pair_asymmetry(
            &s,
            &e,
            &[
                ("enfermera".into(), "enfermero".into()),
                ("abogada".into(), "abogado".into()),
                ("jueza".into(), "juez".into()),
            ],
        )
        .unwrap();
        assert!((rep.pairs[0].score_a - 0.9).abs() < 1e-12);
        assert!((rep.pairs[0].score_b + 0.2).abs() < 1e-12);
        assert!((rep.pairs[0].asymmetry - 0.7).abs() < 1e-12);
        assert!(rep.pairs[1].asymmetry.abs() < 1e-9);
        assert_eq!(rep.skipped.len(), 1);
        assert_eq!(rep.skipped[0].missing, ["jueza", "juez"]);

        let swapped = build_space(
            &e,
            &list("m", &["neg"]),
            &list("f", &["pos"]),
            SpaceConfig::default(),
        )
        .unwrap();
        let back =
            pair_asymmetry(&swapped, &e, &[("enfermero".into(), "enfermera".into())]).unwrap();
        assert!((back.pairs[0].asymmetry + 0.7).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_without_corpus() {
        let e = store(&[
            ("a", &[1.0, 0.0]),
            ("b", &[1.0, 0.001]),
            ("c", &[1.0, -0.001]),
        ]);
        let d = diagnose_list(&list("l", &["x", "y"]), &e, None);
        assert_eq!(d.oov_rate, 1.0);
        assert!(d.words.iter().all(|w| w.oov && w.frequency.is_none()));
        assert_eq!(d.min_frequency, None);
        let d = diagnose_list(&list("l", &["a"]), &e, None);
        assert!(d.words[0].neighbor_dispersion.unwrap() >= 0.99);
        assert!(d.words[0].frequency.is_none());
    }

    #[test]
    fn comparison_marks_unavailable_columns() {
        let e1 = store(&[("p", &[1.0, 0.0]), ("q", &[-1.0, 0.0]), ("w", &[0.5, 0.5])]);
        let e2 = EmbeddingStore::from_rows(
            "t2",
            vec![("q".into(), vec![-1.0, 0.0]), ("w".into(), vec![0.5, 0.5])],
        )
        .unwrap();
        let cmp = compare_embeddings(
            &list("a", &["p"]),
            &list("b", &["q"]),
            SpaceConfig::default(),
            &words(&["w"]),
            &[&e1, &e2],
        )
        .unwrap();
        assert!(cmp.columns[0].available);
        assert!(!cmp.columns[1].available);
        assert_eq!(cmp.columns[1].extreme_a_missing, ["p"]);
        assert!(matches!(
            compare_embeddings(
                &list("a", &["p"]),
                &list("b", &["q"]),
                SpaceConfig::default(),
                &words(&["w"]),
                &[&e1]
            ),
            Err(BiasError::TooFewEmbeddings(1))
        ));
    }
}
