use std::io;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use edia_core::{CorpusIndex, EmbeddingStore, NgramLM, WordList};

use crate::api::{ListRef, ResolvedSpace, SpaceRef};
use crate::error::ApiError;
use crate::jobs::Jobs;
use crate::provenance::ArtifactKind;
use crate::registry::{Artifact, DataDir, Registry};
use crate::session::{SessionDraft, SessionStore};

pub struct AppState {
    pub data: DataDir,
    pub registry: RwLock<Registry>,
    pub jobs: Jobs,
    pub sessions: SessionStore,
}

pub type Shared = Arc<AppState>;

impl AppState {
    /// Opens (creating if needed) a data directory and loads everything
    /// saved in it.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Shared> {
        let data = DataDir::open(dir)?;
        let registry = RwLock::new(data.load_registry());
        let sessions = SessionStore::open(data.sessions())?;
        Ok(Arc::new(Self {
            data,
            registry,
            jobs: Jobs::default(),
            sessions,
        }))
    }

    pub fn read(&self) -> std::sync::RwLockReadGuard<'_, Registry> {
        self.registry.read().expect("registry")
    }

    pub fn write(&self) -> std::sync::RwLockWriteGuard<'_, Registry> {
        self.registry.write().expect("registry")
    }

    pub fn embedding(&self, id: &str) -> Result<Artifact<EmbeddingStore>, ApiError> {
        self.read()
            .embeddings
            .get(id)
            .map(|(a, _)| a.clone())
            .ok_or_else(|| ApiError::not_found("embedding", id))
    }

    pub fn corpus(&self, id: &str) -> Result<Artifact<CorpusIndex>, ApiError> {
        self.read()
            .corpora
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("corpus", id))
    }

    pub fn lm(&self, id: &str) -> Result<Artifact<NgramLM>, ApiError> {
        self.read()
            .lms
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("language model", id))
    }

    pub fn resolve_list(&self, r: &ListRef) -> Result<WordList, ApiError> {
        match r {
            ListRef::Inline(l) => Ok(l.clone()),
            ListRef::Session { session, list } => self.sessions.get_list(session, list),
        }
    }

    pub fn resolve_space(&self, r: &SpaceRef) -> Result<ResolvedSpace, ApiError> {
        match r {
            SpaceRef::Inline {
                extreme_a,
                extreme_b,
                method,
                centroid,
            } => Ok(ResolvedSpace {
                extreme_a: self.resolve_list(extreme_a)?,
                extreme_b: self.resolve_list(extreme_b)?,
                method: *method,
                centroid: *centroid,
            }),
            SpaceRef::Session { session, space } => {
                let (a, b, cfg) = self.sessions.space(session, space)?;
                Ok(ResolvedSpace {
                    extreme_a: a,
                    extreme_b: b,
                    method: cfg.method,
                    centroid: cfg.centroid,
                })
            }
        }
    }

    /// Active artifact ids in a session must name loaded artifacts.
    pub fn check_active(&self, d: &SessionDraft) -> Result<(), ApiError> {
        let reg = self.read();
        for (kind, id) in [
            (ArtifactKind::Embedding, &d.active_embedding),
            (ArtifactKind::Corpus, &d.active_corpus),
            (ArtifactKind::Lm, &d.active_lm),
        ] {
            if let Some(id) = id {
                if !reg.contains(kind, id) {
                    return Err(ApiError::invalid(
                        "unknown_artifact",
                        format!("{} {id:?} does not exist", kind.as_str()),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Runs CPU-bound work off the async executor.
pub async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}
