//! Loaded artifacts and their files under the data directory.
//!
//! ```text
//! <data>/embeddings/<id>.vec            uploaded or trained vectors
//! <data>/embeddings/<id>.meta.json      load options
//! <data>/embeddings/<id>.manifest.json  training manifest, if trained
//! <data>/corpora/<id>.corpus            uploaded corpus file
//! <data>/corpora/<id>.meta.json         tokenizer
//! <data>/lms/<id>.json                  serialized n-gram model
//! <data>/sessions/<id>.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use edia_core::lm::NgramFile;
use edia_core::report::sha256_hex;
use edia_core::trainer::TrainingManifest;
use edia_core::{CorpusIndex, EmbeddingStore, LoadOptions, NgramConfig, NgramLM, Normalizer, Tokenizer};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::provenance::ArtifactKind;

/// A loaded artifact. `sha256` is the hash of its file on disk.
#[derive(Debug)]
pub struct Artifact<T> {
    pub value: Arc<T>,
    pub sha256: String,
}

impl<T> Clone for Artifact<T> {
    fn clone(&self) -> Self {
        Self {
            value: Arc::clone(&self.value),
            sha256: self.sha256.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    #[serde(default)]
    pub limit: Option<usize>,
    #[serde(default)]
    pub normalizer: Normalizer,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    #[serde(default)]
    pub tokenizer: Tokenizer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingInfo {
    pub id: String,
    pub sha256: String,
    pub vocab_size: usize,
    pub dim: usize,
    pub duplicates_dropped: usize,
    pub normalizer: Normalizer,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingManifest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub id: String,
    pub sha256: String,
    pub fingerprint: String,
    pub documents: usize,
    pub sentences: usize,
    pub tokens: u64,
    pub types: usize,
    pub collections: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmInfo {
    pub id: String,
    pub sha256: String,
    pub config: NgramConfig,
    pub vocab_size: usize,
}

#[derive(Debug, Default)]
pub struct Registry {
    pub embeddings: BTreeMap<String, (Artifact<EmbeddingStore>, Option<TrainingManifest>)>,
    pub corpora: BTreeMap<String, Artifact<CorpusIndex>>,
    pub lms: BTreeMap<String, Artifact<NgramLM>>,
}

impl Registry {
    pub fn embedding_info(&self, id: &str) -> Option<EmbeddingInfo> {
        self.embeddings.get(id).map(|(a, training)| EmbeddingInfo {
            id: id.to_owned(),
            sha256: a.sha256.clone(),
            vocab_size: a.value.len(),
            dim: a.value.dim(),
            duplicates_dropped: a.value.duplicates_dropped(),
            normalizer: a.value.normalizer(),
            training: training.clone(),
        })
    }

    pub fn corpus_info(&self, id: &str) -> Option<CorpusInfo> {
        self.corpora.get(id).map(|a| CorpusInfo {
            id: id.to_owned(),
            sha256: a.sha256.clone(),
            fingerprint: a.value.fingerprint(),
            documents: a.value.num_docs(),
            sentences: a.value.num_sentences(),
            tokens: a.value.total_tokens(),
            types: a.value.types().len(),
            collections: a.value.collections().to_vec(),
        })
    }

    pub fn lm_info(&self, id: &str) -> Option<LmInfo> {
        self.lms.get(id).map(|a| LmInfo {
            id: id.to_owned(),
            sha256: a.sha256.clone(),
            config: a.value.config(),
            vocab_size: a.value.words().len(),
        })
    }

    pub fn contains(&self, kind: ArtifactKind, id: &str) -> bool {
        match kind {
            ArtifactKind::Embedding => self.embeddings.contains_key(id),
            ArtifactKind::Corpus => self.corpora.contains_key(id),
            ArtifactKind::Lm => self.lms.contains_key(id),
        }
    }
}

/// Artifact and session ids double as file names.
pub fn validate_id(id: &str) -> Result<(), ApiError> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(ApiError::invalid(
            "invalid_id",
            format!("{id:?} is not a valid id; use 1-128 of [A-Za-z0-9._-], not starting with '.'"),
        ))
    }
}

/// Writes through a temporary file so readers never see half a file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        for sub in ["embeddings", "corpora", "lms", "sessions"] {
            fs::create_dir_all(root.join(sub))?;
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn sessions(&self) -> PathBuf {
        self.root.join("sessions")
    }

    pub fn embedding_paths(&self, id: &str) -> (PathBuf, PathBuf, PathBuf) {
        let dir = self.root.join("embeddings");
        (
            dir.join(format!("{id}.vec")),
            dir.join(format!("{id}.meta.json")),
            dir.join(format!("{id}.manifest.json")),
        )
    }

    pub fn corpus_paths(&self, id: &str) -> (PathBuf, PathBuf) {
        let dir = self.root.join("corpora");
        (dir.join(format!("{id}.corpus")), dir.join(format!("{id}.meta.json")))
    }

    pub fn lm_path(&self, id: &str) -> PathBuf {
        self.root.join("lms").join(format!("{id}.json"))
    }

    pub fn save_embedding(
        &self,
        id: &str,
        bytes: &[u8],
        meta: &EmbeddingMeta,
        training: Option<&TrainingManifest>,
    ) -> io::Result<()> {
        let (vec, meta_path, manifest) = self.embedding_paths(id);
        write_atomic(&meta_path, &serde_json::to_vec_pretty(meta)?)?;
        match training {
            Some(m) => write_atomic(&manifest, &serde_json::to_vec_pretty(m)?)?,
            None if manifest.exists() => fs::remove_file(&manifest)?,
            None => {}
        }
        write_atomic(&vec, bytes)
    }

    pub fn save_corpus(&self, id: &str, bytes: &[u8], meta: &CorpusMeta) -> io::Result<()> {
        let (file, meta_path) = self.corpus_paths(id);
        write_atomic(&meta_path, &serde_json::to_vec_pretty(meta)?)?;
        write_atomic(&file, bytes)
    }

    pub fn save_lm(&self, lm: &NgramLM) -> io::Result<Vec<u8>> {
        let bytes = serde_json::to_vec(&lm.to_file())?;
        write_atomic(&self.lm_path(edia_core::SentenceScorer::id(lm)), &bytes)?;
        Ok(bytes)
    }

    /// Reloads everything saved by earlier runs. Unreadable artifacts are
    /// logged and skipped rather than preventing startup.
    pub fn load_registry(&self) -> Registry {
        let mut reg = Registry::default();
        for id in self.ids("embeddings", ".vec") {
            match self.load_embedding(&id) {
                Ok(entry) => {
                    reg.embeddings.insert(id, entry);
                }
                Err(e) => log::warn!("skipping embedding {id:?}: {e}"),
            }
        }
        for id in self.ids("corpora", ".corpus") {
            match self.load_corpus(&id) {
                Ok(a) => {
                    reg.corpora.insert(id, a);
                }
                Err(e) => log::warn!("skipping corpus {id:?}: {e}"),
            }
        }
        for id in self.ids("lms", ".json") {
            match self.load_lm(&id) {
                Ok(a) => {
                    reg.lms.insert(id, a);
                }
                Err(e) => log::warn!("skipping language model {id:?}: {e}"),
            }
        }
        log::info!(
            "loaded {} embeddings, {} corpora, {} language models",
            reg.embeddings.len(),
            reg.corpora.len(),
            reg.lms.len()
        );
        reg
    }

    fn ids(&self, sub: &str, suffix: &str) -> Vec<String> {
        let Ok(rd) = fs::read_dir(self.root.join(sub)) else {
            return Vec::new();
        };
        let mut ids: Vec<String> = rd
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().to_str()?.strip_suffix(suffix).map(str::to_owned))
            .filter(|id| validate_id(id).is_ok() && !id.ends_with(".meta") && !id.ends_with(".manifest"))
            .collect();
        ids.sort();
        ids
    }

    fn load_embedding(
        &self,
        id: &str,
    ) -> Result<(Artifact<EmbeddingStore>, Option<TrainingManifest>), ApiError> {
        let (vec, meta_path, manifest) = self.embedding_paths(id);
        let meta: EmbeddingMeta = read_json_or_default(&meta_path)?;
        let bytes = fs::read(&vec)?;
        let opts = LoadOptions {
            limit: meta.limit,
            normalizer: meta.normalizer,
        };
        let store = EmbeddingStore::read_text(id, bytes.as_slice(), &opts)?;
        let training = if manifest.exists() {
            Some(read_json(&manifest)?)
        } else {
            None
        };
        Ok((
            Artifact {
                value: Arc::new(store),
                sha256: sha256_hex(&bytes),
            },
            training,
        ))
    }

    fn load_corpus(&self, id: &str) -> Result<Artifact<CorpusIndex>, ApiError> {
        let (file, meta_path) = self.corpus_paths(id);
        let meta: CorpusMeta = read_json_or_default(&meta_path)?;
        let bytes = fs::read(&file)?;
        let idx = index_corpus(&bytes, meta.tokenizer)?;
        Ok(Artifact {
            value: Arc::new(idx),
            sha256: sha256_hex(&bytes),
        })
    }

    fn load_lm(&self, id: &str) -> Result<Artifact<NgramLM>, ApiError> {
        let bytes = fs::read(self.lm_path(id))?;
        let file: NgramFile = serde_json::from_slice(&bytes)
            .map_err(|e| ApiError::internal(format!("language model {id:?}: {e}")))?;
        Ok(Artifact {
            value: Arc::new(NgramLM::from_file(file)?),
            sha256: sha256_hex(&bytes),
        })
    }
}

pub fn index_corpus(bytes: &[u8], tokenizer: Tokenizer) -> Result<CorpusIndex, ApiError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| ApiError::invalid("invalid_utf8", format!("corpus is not UTF-8: {e}")))?;
    Ok(CorpusIndex::ingest(text, tokenizer)?)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ApiError> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes)
        .map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))
}

fn read_json_or_default<T: Default + for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ApiError> {
    if path.exists() {
        read_json(path)
    } else {
        Ok(T::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_safe_file_names() {
        for ok in ["emb", "glove.6B-50d", "a_b"] {
            assert!(validate_id(ok).is_ok(), "{ok}");
        }
        for bad in ["", ".hidden", "../x", "a/b", "sp ace", "ñ"] {
            assert!(validate_id(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn meta_defaults_to_normalizing() {
        let m: EmbeddingMeta = serde_json::from_str("{}").unwrap();
        assert_eq!(m.normalizer, Normalizer::default());
        assert_eq!(m.limit, None);
    }
}
