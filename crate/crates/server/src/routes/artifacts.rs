//! Uploading, training and listing embeddings, corpora and language
//! models, and polling the jobs that build them.

use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use edia_core::report::sha256_hex;
use edia_core::trainer::train;
use edia_core::{EmbeddingStore, LoadOptions, NgramLM, Normalizer, Tokenizer};

use crate::api::{CorpusParams, EmbeddingParams, TrainEmbeddingRequest, TrainLmRequest, WaitParams};
use crate::error::ApiError;
use crate::extract::{Body, Params};
use crate::jobs::{JobView, MAX_WAIT_MS};
use crate::provenance::{ArtifactKind, Envelope, Provenance};
use crate::registry::{
    index_corpus, validate_id, Artifact, CorpusInfo, CorpusMeta, EmbeddingInfo, EmbeddingMeta, LmInfo,
};
use crate::state::{blocking, Shared};

type Created<T> = (StatusCode, Envelope<T>);

fn normalizer(nfc: Option<bool>, lowercase: Option<bool>) -> Normalizer {
    Normalizer {
        nfc: nfc.unwrap_or(true),
        lowercase: lowercase.unwrap_or(true),
    }
}

fn utf8(bytes: &[u8], what: &str) -> Result<(), ApiError> {
    std::str::from_utf8(bytes)
        .map(|_| ())
        .map_err(|e| ApiError::invalid("invalid_utf8", format!("{what} is not UTF-8: {e}")))
}

pub async fn put_embedding(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Params(p): Params<EmbeddingParams>,
    body: Bytes,
) -> Result<Created<EmbeddingInfo>, ApiError> {
    validate_id(&id)?;
    utf8(&body, "embedding file")?;
    let claim = st.jobs.claim(ArtifactKind::Embedding, &id)?;
    let meta = EmbeddingMeta {
        limit: p.limit,
        normalizer: normalizer(p.nfc, p.lowercase),
    };
    let prov = Provenance::default().config(&meta);
    let state = Arc::clone(&st);
    let info = blocking(move || {
        let _claim = claim;
        let opts = LoadOptions {
            limit: meta.limit,
            normalizer: meta.normalizer,
        };
        let store = EmbeddingStore::read_text(&id, body.as_ref(), &opts)?;
        state.data.save_embedding(&id, &body, &meta, None)?;
        let mut reg = state.write();
        let artifact = Artifact {
            value: Arc::new(store),
            sha256: sha256_hex(&body),
        };
        reg.embeddings.insert(id.clone(), (artifact, None));
        Ok(reg.embedding_info(&id).expect("just inserted"))
    })
    .await?;
    let prov = prov.artifact(ArtifactKind::Embedding, &info.id, &info.sha256);
    Ok((StatusCode::CREATED, prov.wrap(info)))
}

pub async fn list_embeddings(State(st): State<Shared>) -> Envelope<Vec<EmbeddingInfo>> {
    let reg = st.read();
    let all = reg.embeddings.keys().filter_map(|id| reg.embedding_info(id)).collect();
    Provenance::default().wrap(all)
}

pub async fn get_embedding(
    State(st): State<Shared>,
    Path(id): Path<String>,
) -> Result<Envelope<EmbeddingInfo>, ApiError> {
    let info = st
        .read()
        .embedding_info(&id)
        .ok_or_else(|| ApiError::not_found("embedding", &id))?;
    let prov = Provenance::default().artifact(ArtifactKind::Embedding, &id, &info.sha256);
    Ok(prov.wrap(info))
}

/// Stores the file and indexes it in the background.
pub async fn put_corpus(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Params(p): Params<CorpusParams>,
    body: Bytes,
) -> Result<Created<JobView>, ApiError> {
    validate_id(&id)?;
    utf8(&body, "corpus file")?;
    let claim = st.jobs.claim(ArtifactKind::Corpus, &id)?;
    let meta = CorpusMeta {
        tokenizer: Tokenizer::new(normalizer(p.nfc, p.lowercase)),
    };
    let prov = Provenance::default().config(&meta);
    let state = Arc::clone(&st);
    let job = st.jobs.submit("ingest", claim, move || {
        let idx = index_corpus(&body, meta.tokenizer)?;
        state.data.save_corpus(&id, &body, &meta)?;
        let mut reg = state.write();
        let artifact = Artifact {
            value: Arc::new(idx),
            sha256: sha256_hex(&body),
        };
        reg.corpora.insert(id.clone(), artifact);
        Ok(serde_json::to_value(reg.corpus_info(&id)).expect("serializable"))
    });
    Ok((StatusCode::ACCEPTED, prov.wrap(job)))
}

pub async fn list_corpora(State(st): State<Shared>) -> Envelope<Vec<CorpusInfo>> {
    let reg = st.read();
    let all = reg.corpora.keys().filter_map(|id| reg.corpus_info(id)).collect();
    Provenance::default().wrap(all)
}

pub async fn get_corpus(
    State(st): State<Shared>,
    Path(id): Path<String>,
) -> Result<Envelope<CorpusInfo>, ApiError> {
    let info = st
        .read()
        .corpus_info(&id)
        .ok_or_else(|| ApiError::not_found("corpus", &id))?;
    let prov = Provenance::default().artifact(ArtifactKind::Corpus, &id, &info.sha256);
    Ok(prov.wrap(info))
}

pub async fn list_lms(State(st): State<Shared>) -> Envelope<Vec<LmInfo>> {
    let reg = st.read();
    let all = reg.lms.keys().filter_map(|id| reg.lm_info(id)).collect();
    Provenance::default().wrap(all)
}

pub async fn get_lm(State(st): State<Shared>, Path(id): Path<String>) -> Result<Envelope<LmInfo>, ApiError> {
    let info = st
        .read()
        .lm_info(&id)
        .ok_or_else(|| ApiError::not_found("language model", &id))?;
    let prov = Provenance::default().artifact(ArtifactKind::Lm, &id, &info.sha256);
    Ok(prov.wrap(info))
}

pub async fn train_embedding(
    State(st): State<Shared>,
    Body(req): Body<TrainEmbeddingRequest>,
) -> Result<Created<JobView>, ApiError> {
    validate_id(&req.id)?;
    req.config.validate()?;
    let corpus = st.corpus(&req.corpus)?;
    let claim = st.jobs.claim(ArtifactKind::Embedding, &req.id)?;
    let prov = Provenance::default()
        .artifact(ArtifactKind::Corpus, &req.corpus, &corpus.sha256)
        .config(&req)
        .seed(req.config.seed);
    let state = Arc::clone(&st);
    let job = st.jobs.submit("train-embedding", claim, move || {
        let trained = train(&req.id, &corpus.value, &req.config)?;
        let mut bytes = Vec::new();
        trained.store.write_text(&mut bytes)?;
        let meta = EmbeddingMeta {
            limit: None,
            normalizer: trained.store.normalizer(),
        };
        state
            .data
            .save_embedding(&req.id, &bytes, &meta, Some(&trained.manifest))?;
        let mut reg = state.write();
        let artifact = Artifact {
            value: Arc::new(trained.store),
            sha256: sha256_hex(&bytes),
        };
        reg.embeddings
            .insert(req.id.clone(), (artifact, Some(trained.manifest)));
        Ok(serde_json::to_value(reg.embedding_info(&req.id)).expect("serializable"))
    });
    Ok((StatusCode::ACCEPTED, prov.wrap(job)))
}

pub async fn train_lm(
    State(st): State<Shared>,
    Body(req): Body<TrainLmRequest>,
) -> Result<Created<JobView>, ApiError> {
    validate_id(&req.id)?;
    let corpus = st.corpus(&req.corpus)?;
    let claim = st.jobs.claim(ArtifactKind::Lm, &req.id)?;
    let prov = Provenance::default()
        .artifact(ArtifactKind::Corpus, &req.corpus, &corpus.sha256)
        .config(&req);
    let state = Arc::clone(&st);
    let job = st.jobs.submit("train-lm", claim, move || {
        let lm = NgramLM::train(&req.id, &corpus.value, req.config)?;
        let bytes = state.data.save_lm(&lm)?;
        let mut reg = state.write();
        let artifact = Artifact {
            value: Arc::new(lm),
            sha256: sha256_hex(&bytes),
        };
        reg.lms.insert(req.id.clone(), artifact);
        Ok(serde_json::to_value(reg.lm_info(&req.id)).expect("serializable"))
    });
    Ok((StatusCode::ACCEPTED, prov.wrap(job)))
}

pub async fn get_job(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Params(p): Params<WaitParams>,
) -> Result<Envelope<JobView>, ApiError> {
    let wait = Duration::from_millis(p.wait_ms.unwrap_or(0).min(MAX_WAIT_MS));
    let view = st
        .jobs
        .get(&id, wait)
        .await
        .ok_or_else(|| ApiError::not_found("job", &id))?;
    Ok(Provenance::default().wrap(view))
}
