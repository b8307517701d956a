use axum::response::{IntoResponse, Response};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    Embedding,
    Corpus,
    Lm,
}

impl ArtifactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Embedding => "embedding",
            Self::Corpus => "corpus",
            Self::Lm => "lm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactStamp {
    pub kind: ArtifactKind,
    pub id: String,
    pub sha256: String,
}

/// What a response was computed from: the service version, the content
/// hashes of every artifact read, and the request's own configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub artifacts: Vec<ArtifactStamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for Provenance {
    fn default() -> Self {
        Self {
            version: edia_core::VERSION.to_owned(),
            artifacts: Vec::new(),
            config: None,
            seed: None,
        }
    }
}

impl Provenance {
    pub fn artifact(mut self, kind: ArtifactKind, id: &str, sha256: &str) -> Self {
        self.artifacts.push(ArtifactStamp {
            kind,
            id: id.to_owned(),
            sha256: sha256.to_owned(),
        });
        self
    }

    pub fn config(mut self, cfg: &impl Serialize) -> Self {
        self.config = serde_json::to_value(cfg).ok();
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn wrap<T: Serialize>(self, result: T) -> Envelope<T> {
        Envelope {
            result,
            provenance: self,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub result: T,
    pub provenance: Provenance,
}

impl<T: Serialize> IntoResponse for Envelope<T> {
    fn into_response(self) -> Response {
        axum::Json(self).into_response()
    }
}
