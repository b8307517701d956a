//! Request bodies and query strings.

use edia_core::lm::{BlankQuery, PairQuery};
use edia_core::{CentroidMode, NgramConfig, SpaceConfig, SpaceMethod, TrainerConfig, WordList};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

/// A word list given inline, or `{"session": .., "list": ..}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ListRef {
    Session { session: String, list: String },
    Inline(WordList),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionList {
    session: String,
    list: String,
}

impl<'de> Deserialize<'de> for ListRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        if v.get("session").is_some() {
            let r: SessionList = serde_json::from_value(v).map_err(D::Error::custom)?;
            Ok(Self::Session {
                session: r.session,
                list: r.list,
            })
        } else {
            WordList::deserialize(v).map(Self::Inline).map_err(D::Error::custom)
        }
    }
}

/// A bias space given by its two extremes, or `{"session": .., "space": ..}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Session {
        session: String,
        space: String,
    },
    Inline {
        extreme_a: ListRef,
        extreme_b: ListRef,
        method: SpaceMethod,
        centroid: CentroidMode,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionSpace {
    session: String,
    space: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InlineSpace {
    extreme_a: ListRef,
    extreme_b: ListRef,
    #[serde(default)]
    method: SpaceMethod,
    #[serde(default)]
    centroid: CentroidMode,
}

impl<'de> Deserialize<'de> for SpaceRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        if v.get("session").is_some() {
            let r: SessionSpace = serde_json::from_value(v).map_err(D::Error::custom)?;
            Ok(Self::Session {
                session: r.session,
                space: r.space,
            })
        } else {
            let r: InlineSpace = serde_json::from_value(v).map_err(D::Error::custom)?;
            Ok(Self::Inline {
                extreme_a: r.extreme_a,
                extreme_b: r.extreme_b,
                method: r.method,
                centroid: r.centroid,
            })
        }
    }
}

/// A space with both lists looked up; echoed back as provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedSpace {
    pub extreme_a: WordList,
    pub extreme_b: WordList,
    pub method: SpaceMethod,
    pub centroid: CentroidMode,
}

impl ResolvedSpace {
    pub fn config(&self) -> SpaceConfig {
        SpaceConfig {
            method: self.method,
            centroid: self.centroid,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceRequest {
    pub embedding: String,
    pub space: SpaceRef,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoresRequest {
    pub embedding: String,
    pub space: SpaceRef,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scores2dRequest {
    pub embedding: String,
    pub space_x: SpaceRef,
    pub space_y: SpaceRef,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsRequest {
    pub embedding: String,
    pub space: SpaceRef,
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsRequest {
    pub embedding: String,
    #[serde(default)]
    pub corpus: Option<String>,
    pub lists: Vec<ListRef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareRequest {
    pub embeddings: Vec<String>,
    pub space: SpaceRef,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionRequest {
    pub embedding: String,
    pub words: Vec<String>,
    #[serde(default)]
    pub neighbors: Option<usize>,
    #[serde(default)]
    pub skip_oov: bool,
}

fn default_k() -> usize {
    10
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborsRequest {
    pub embedding: String,
    pub word: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub exclude: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlankRequest {
    pub lm: String,
    #[serde(flatten)]
    pub query: BlankQuery,
    /// Stoplist language, required with `exclude_function_words`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRequest {
    pub lm: String,
    #[serde(flatten)]
    pub pair: PairQuery,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainEmbeddingRequest {
    pub id: String,
    pub corpus: String,
    #[serde(default)]
    pub config: TrainerConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainLmRequest {
    pub id: String,
    pub corpus: String,
    #[serde(default)]
    pub config: NgramConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyParams {
    pub corpus: String,
    pub token: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcordanceParams {
    pub corpus: String,
    pub token: String,
    #[serde(default)]
    pub max_lines: Option<usize>,
    /// Comma-separated collection names.
    #[serde(default)]
    pub collections: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

impl ConcordanceParams {
    pub fn collections(&self) -> Option<Vec<String>> {
        self.collections.as_ref().map(|c| {
            c.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect()
        })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EmbeddingParams {
    #[serde(default)]
    pub limit: Option<usize>,
    #[serde(default)]
    pub nfc: Option<bool>,
    #[serde(default)]
    pub lowercase: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CorpusParams {
    #[serde(default)]
    pub nfc: Option<bool>,
    #[serde(default)]
    pub lowercase: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WaitParams {
    #[serde(default)]
    pub wait_ms: Option<u64>,
}
