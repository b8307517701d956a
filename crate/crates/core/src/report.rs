//! Exportable reports: CSV tables and a structured score report that
//! carries the lists and configuration it was computed from.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bias::{Comparison, PairReport, PlaneScores, SpaceConfig, WordScores};
use crate::lexicon::WordList;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serializes flat rows as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub embedding: String,
    pub space: String,
    pub token: String,
    pub score: f64,
}

pub fn score_rows(embedding: &str, scores: &WordScores) -> Vec<ScoreRow> {
    scores
        .scores
        .iter()
        .map(|s| ScoreRow {
            embedding: embedding.to_owned(),
            space: s.space.clone(),
            token: s.token.clone(),
            score: s.score,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneRow {
    pub embedding: String,
    pub space_x: String,
    pub space_y: String,
    pub token: String,
    pub x: f64,
    pub y: f64,
}

pub fn plane_rows(embedding: &str, plane: &PlaneScores) -> Vec<PlaneRow> {
    plane
        .points
        .iter()
        .map(|p| PlaneRow {
            embedding: embedding.to_owned(),
            space_x: plane.space_x.clone(),
            space_y: plane.space_y.clone(),
            token: p.token.clone(),
            x: p.x,
            y: p.y,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub embedding: String,
    pub space: String,
    pub word_a: String,
    pub word_b: String,
    pub score_a: f64,
    pub score_b: f64,
    pub asymmetry: f64,
}

pub fn pair_rows(embedding: &str, report: &PairReport) -> Vec<PairRow> {
    report
        .pairs
        .iter()
        .map(|p| PairRow {
            embedding: embedding.to_owned(),
            space: report.space.clone(),
            word_a: p.word_a.clone(),
            word_b: p.word_b.clone(),
            score_a: p.score_a,
            score_b: p.score_b,
            asymmetry: p.asymmetry,
        })
        .collect()
}

/// Wide table: one row per token, one score column per embedding. Cells
/// are empty where the token is missing or the column is unavailable.
pub fn comparison_csv(words: &[String], cmp: &Comparison) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["token".to_string()];
    header.extend(cmp.columns.iter().map(|c| c.embedding_id.clone()));
    w.write_record(&header)?;
    for word in words {
        let mut rec = vec![word.clone()];
        for col in &cmp.columns {
            let cell = col
                .scores
                .iter()
                .find(|s| s.token == *word || s.token == word.to_lowercase())
                .map(|s| s.score.to_string())
                .unwrap_or_default();
            rec.push(cell);
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactRef {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

/// Scores plus everything needed to reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub version: String,
    pub embedding: ArtifactRef,
    pub extreme_a: WordList,
    pub extreme_b: WordList,
    pub config: SpaceConfig,
    pub result: WordScores,
}
