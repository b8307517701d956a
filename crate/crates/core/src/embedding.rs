//! Word-vector storage: text-format loading, cosine similarity, exact
//! nearest neighbours and 2-D projection.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::Normalizer;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: malformed header: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse value {value:?}")]
    InvalidNumber { line: usize, value: String },
    #[error("line {line}: non-finite value in vector for {token:?}")]
    NonFinite { line: usize, token: String },
    #[error("line {line}: zero vector for {token:?}")]
    ZeroVector { line: usize, token: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("embedding file contains no vectors")]
    Empty,
    #[error("token not in vocabulary: {0:?}")]
    Oov(String),
    #[error("need at least 2 distinct in-vocabulary tokens to project, got {usable}")]
    TooFewTokens { usable: usize, missing: Vec<String> },
    #[error("tokens not in vocabulary: {0:?}")]
    OovTokens(Vec<String>),
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EmbeddingError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::MalformedHeader { .. } => "malformed_header",
            Self::DimensionMismatch { .. } => "dimension_mismatch",
            Self::InvalidNumber { .. } => "invalid_number",
            Self::NonFinite { .. } => "non_finite",
            Self::ZeroVector { .. } => "zero_vector",
            Self::Malformed { .. } => "malformed_embedding",
            Self::Empty => "empty_embedding",
            Self::Oov(_) | Self::OovTokens(_) => "oov",
            Self::TooFewTokens { .. } => "too_few_tokens",
            Self::ZeroK => "invalid_k",
            Self::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Maximum number of (unique) rows to keep, in file order.
    pub limit: Option<usize>,
    pub normalizer: Normalizer,
}

/// An immutable vocabulary with one dense vector per token.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    id: String,
    dim: usize,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    norms: Vec<f64>,
    normalizer: Normalizer,
    duplicates_dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub token: String,
    pub similarity: f64,
}

/// Descending similarity, ascending token on exact ties.
pub fn neighbor_order(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.token.cmp(&b.token))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPoint {
    pub token: String,
    pub x: f64,
    pub y: f64,
    /// Set when the point was added as a neighbour of a requested token.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neighbor_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub points: Vec<ProjectedPoint>,
    pub explained_variance: [f64; 2],
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    /// Add this many nearest neighbours of every requested token.
    #[serde(default)]
    pub neighbors: Option<usize>,
    /// Drop out-of-vocabulary tokens (they are still listed in `missing`)
    /// instead of failing.
    #[serde(default)]
    pub skip_oov: bool,
}

fn parse_row(
    line_no: usize,
    line: &str,
    dim: Option<usize>,
) -> Result<(String, Vec<f64>), EmbeddingError> {
    let mut fields = line.split_ascii_whitespace();
    let token = fields.next().ok_or_else(|| EmbeddingError::Malformed {
        line: line_no,
        message: "empty row".into(),
    })?;
    let values = fields
        .map(|f| {
            f.parse::<f64>().map_err(|_| EmbeddingError::InvalidNumber {
                line: line_no,
                value: f.to_owned(),
            })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if let Some(dim) = dim {
        if values.len() != dim {
            return Err(EmbeddingError::DimensionMismatch {
                line: line_no,
                expected: dim,
                found: values.len(),
            });
        }
    }
    if values.is_empty() {
        return Err(EmbeddingError::Malformed {
            line: line_no,
            message: format!("no vector values for {token:?}"),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EmbeddingError::NonFinite {
            line: line_no,
            token: token.to_owned(),
        });
    }
    if values.iter().all(|&v| v == 0.0) {
        return Err(EmbeddingError::ZeroVector {
            line: line_no,
            token: token.to_owned(),
        });
    }
    Ok((token.to_owned(), values))
}

/// `Some((vocab_size, dim))` if the line looks like a header.
fn parse_header(line_no: usize, line: &str) -> Result<Option<(usize, usize)>, EmbeddingError> {
    let fields: Vec<&str> = line.split_ascii_whitespace().collect();
    if fields.len() != 2 {
        return Ok(None);
    }
    match (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
        (Ok(n), Ok(d)) => {
            if d == 0 {
                Err(EmbeddingError::MalformedHeader {
                    line: line_no,
                    message: "dimension must be positive".into(),
                })
            } else if n == 0 {
                Err(EmbeddingError::MalformedHeader {
                    line: line_no,
                    message: "vocabulary size must be positive".into(),
                })
            } else {
                Ok(Some((n, d)))
            }
        }
        _ => Ok(None),
    }
}

impl EmbeddingStore {
    /// Reads the text word-vector format: an optional `<vocab> <dim>`
    /// header followed by `<token> <f1> ... <fdim>` rows.
    pub fn read_text<R: BufRead>(
        id: impl Into<String>,
        reader: R,
        opts: &LoadOptions,
    ) -> Result<Self, EmbeddingError> {
        let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        let mut declared: Option<usize> = None;
        let mut dim: Option<usize> = None;
        let mut data_rows = 0usize;
        let mut duplicates = 0usize;
        let mut first = true;
        let limit = opts.limit.unwrap_or(usize::MAX);

        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if first {
                first = false;
                if let Some((n, d)) = parse_header(line_no, &line)? {
                    declared = Some(n);
                    dim = Some(d);
                    continue;
                }
            }
            if rows.len() >= limit {
                break;
            }
            data_rows += 1;
            if let Some(n) = declared {
                if data_rows > n {
                    return Err(EmbeddingError::Malformed {
                        line: line_no,
                        message: format!("more rows than the {n} declared in the header"),
                    });
                }
            }
            let (token, values) = parse_row(line_no, &line, dim)?;
            dim.get_or_insert(values.len());
            let token = opts.normalizer.normalize(&token);
            if !seen.insert(token.clone()) {
                duplicates += 1;
                continue;
            }
            rows.push((token, values));
        }
        if let Some(n) = declared {
            if rows.len() < limit && data_rows < n {
                return Err(EmbeddingError::Malformed {
                    line: 1,
                    message: format!("header declares {n} rows, file has {data_rows}"),
                });
            }
        }
        if duplicates > 0 {
            log::warn!("dropped {duplicates} duplicate tokens while loading embedding");
        }
        let mut store = Self::build(id.into(), rows, opts.normalizer)?;
        store.duplicates_dropped = duplicates;
        Ok(store)
    }

    pub fn load(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "embedding".into());
        Self::read_text(id, BufReader::new(File::open(path)?), opts)
    }

    /// Builds a store from in-memory rows. Tokens are normalized with the
    /// default normalizer; duplicates are rejected.
    pub fn from_rows(
        id: impl Into<String>,
        rows: Vec<(String, Vec<f64>)>,
    ) -> Result<Self, EmbeddingError> {
        Self::from_rows_with(id, rows, Normalizer::default())
    }

    pub fn from_rows_with(
        id: impl Into<String>,
        rows: Vec<(String, Vec<f64>)>,
        normalizer: Normalizer,
    ) -> Result<Self, EmbeddingError> {
        let mut seen = HashSet::new();
        let mut dim = None;
        let mut norm_rows = Vec::with_capacity(rows.len());
        for (i, (token, values)) in rows.into_iter().enumerate() {
            let line = i + 1;
            let d = *dim.get_or_insert(values.len());
            if values.len() != d {
                return Err(EmbeddingError::DimensionMismatch {
                    line,
                    expected: d,
                    found: values.len(),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(EmbeddingError::NonFinite { line, token });
            }
            if values.iter().all(|&v| v == 0.0) {
                return Err(EmbeddingError::ZeroVector { line, token });
            }
            let token = normalizer.normalize(&token);
            if !seen.insert(token.clone()) {
                return Err(EmbeddingError::Malformed {
                    line,
                    message: format!("duplicate token {token:?}"),
                });
            }
            norm_rows.push((token, values));
        }
        Self::build(id.into(), norm_rows, normalizer)
    }

    fn build(
        id: String,
        rows: Vec<(String, Vec<f64>)>,
        normalizer: Normalizer,
    ) -> Result<Self, EmbeddingError> {
        let dim = match rows.first() {
            Some((_, v)) if !v.is_empty() => v.len(),
            _ => return Err(EmbeddingError::Empty),
        };
        let mut vocab = Vec::with_capacity(rows.len());
        let mut vectors = Vec::with_capacity(rows.len() * dim);
        let mut norms = Vec::with_capacity(rows.len());
        let mut index = HashMap::with_capacity(rows.len());
        for (i, (token, values)) in rows.into_iter().enumerate() {
            norms.push(values.iter().map(|v| v * v).sum::<f64>().sqrt());
            vectors.extend_from_slice(&values);
            index.insert(token.clone(), i);
            vocab.push(token);
        }
        Ok(Self {
            id,
            dim,
            vocab,
            index,
            vectors,
            norms,
            normalizer,
            duplicates_dropped: 0,
        })
    }

    /// Writes the store in the text word-vector format, with header.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, token) in self.vocab.iter().enumerate() {
            write!(w, "{token}")?;
            for v in self.row(i) {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn normalizer(&self) -> Normalizer {
        self.normalizer
    }

    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    pub fn normalize(&self, token: &str) -> String {
        self.normalizer.normalize(token)
    }

    pub fn lookup(&self, token: &str) -> Option<usize> {
        self.index.get(&self.normalize(token)).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.lookup(token).is_some()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn token(&self, i: usize) -> &str {
        &self.vocab[i]
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.lookup(token).map(|i| self.row(i))
    }

    fn require(&self, token: &str) -> Result<usize, EmbeddingError> {
        self.lookup(token)
            .ok_or_else(|| EmbeddingError::Oov(token.to_owned()))
    }

    /// Unit-length copy of row `i`.
    pub fn unit_row(&self, i: usize) -> Vec<f64> {
        let n = self.norms[i];
        self.row(i).iter().map(|v| v / n).collect()
    }

    fn cosine_rows(&self, i: usize, j: usize) -> f64 {
        let dot: f64 = self
            .row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| a * b)
            .sum();
        (dot / (self.norms[i] * self.norms[j])).clamp(-1.0, 1.0)
    }

    /// Cosine similarity of a stored row with an arbitrary vector.
    pub fn cosine_with(&self, i: usize, v: &[f64]) -> f64 {
        let dot: f64 = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (dot / (self.norms[i] * nv)).clamp(-1.0, 1.0)
    }

    pub fn cosine(&self, u: &str, v: &str) -> Result<f64, EmbeddingError> {
        let i = self.require(u)?;
        let j = self.require(v)?;
        Ok(self.cosine_rows(i, j))
    }

    /// The `k` most similar tokens by exact full scan, excluding the query
    /// itself and every token in `exclude`.
    pub fn nearest(
        &self,
        token: &str,
        k: usize,
        exclude: &[String],
    ) -> Result<Vec<Neighbor>, EmbeddingError> {
        if k == 0 {
            return Err(EmbeddingError::ZeroK);
        }
        let q = self.require(token)?;
        let excluded: HashSet<usize> = exclude.iter().filter_map(|t| self.lookup(t)).collect();
        let mut all: Vec<Neighbor> = (0..self.len())
            .filter(|&i| i != q && !excluded.contains(&i))
            .map(|i| Neighbor {
                token: self.vocab[i].clone(),
                similarity: self.cosine_rows(q, i),
            })
            .collect();
        if k < all.len() {
            all.select_nth_unstable_by(k - 1, neighbor_order);
            all.truncate(k);
        }
        all.sort_by(neighbor_order);
        Ok(all)
    }

    /// PCA projection of the selected tokens onto the top two principal
    /// components. Each component is signed so that its largest-magnitude
    /// loading is positive.
    pub fn project_2d(
        &self,
        tokens: &[String],
        opts: &ProjectionOptions,
    ) -> Result<Projection2D, EmbeddingError> {
        let mut missing = Vec::new();
        let mut chosen: Vec<(usize, Option<String>)> = Vec::new();
        let mut taken = HashSet::new();
        for t in tokens {
            match self.lookup(t) {
                Some(i) => {
                    if taken.insert(i) {
                        chosen.push((i, None));
                    }
                }
                None => missing.push(t.clone()),
            }
        }
        if !missing.is_empty() && !opts.skip_oov {
            return Err(EmbeddingError::OovTokens(missing));
        }
        if let Some(k) = opts.neighbors.filter(|&k| k > 0) {
            let roots: Vec<usize> = chosen.iter().map(|(i, _)| *i).collect();
            for root in roots {
                for n in self.nearest(&self.vocab[root], k, &[])? {
                    let i = self.index[&n.token];
                    if taken.insert(i) {
                        chosen.push((i, Some(self.vocab[root].clone())));
                    }
                }
            }
        }
        if chosen.len() < 2 {
            return Err(EmbeddingError::TooFewTokens {
                usable: chosen.len(),
                missing,
            });
        }

        let n = chosen.len();
        let rows: Vec<usize> = chosen.iter().map(|(i, _)| *i).collect();
        let (coords, explained_variance) = pca_2d(self, &rows);
        let points = chosen
            .into_iter()
            .zip(coords)
            .map(|((i, neighbor_of), (x, y))| ProjectedPoint {
                token: self.vocab[i].clone(),
                x,
                y,
                neighbor_of,
            })
            .collect::<Vec<_>>();
        debug_assert_eq!(points.len(), n);
        Ok(Projection2D {
            points,
            explained_variance,
            missing,
        })
    }
}

fn pca_2d(store: &EmbeddingStore, rows: &[usize]) -> (Vec<(f64, f64)>, [f64; 2]) {
    let n = rows.len();
    let d = store.dim();
    let mut mean = vec![0.0; d];
    for &r in rows {
        for (m, v) in mean.iter_mut().zip(store.row(r)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = DMatrix::from_fn(n, d, |i, j| store.row(rows[i])[j] - mean[j]);
    let svd = centered.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(2);
    let mut variance = [0.0; 2];
    for (slot, &c) in order.iter().take(2).enumerate() {
        let mut comp: Vec<f64> = v_t.row(c).iter().copied().collect();
        let mut lead = 0;
        for (j, v) in comp.iter().enumerate() {
            if v.abs() > comp[lead].abs() {
                lead = j;
            }
        }
        if comp[lead] < 0.0 {
            comp.iter_mut().for_each(|v| *v = -*v);
        }
        let s = svd.singular_values[c];
        variance[slot] = s * s / (n - 1) as f64;
        components.push(comp);
    }
    let coords = (0..n)
        .map(|i| {
            let row = centered.row(i);
            let proj = |c: Option<&Vec<f64>>| {
                c.map(|c| row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
                    .unwrap_or(0.0)
            };
            (proj(components.first()), proj(components.get(1)))
        })
        .collect();
    (coords, variance)
}
