//! Read-only analysis endpoints. Each resolves its inputs, runs one core
//! operation off the executor and echoes the resolved request as
//! provenance.

use axum::extract::State;
use edia_core::bias::{
    build_space, compare_embeddings, diagnose_list, pair_asymmetry, score_words,
    score_words_2spaces, Comparison, PairReport, PlaneScores, SeedDiagnostics, WordScores,
};
use edia_core::corpus::{ConcordanceLine, FrequencyReport};
use edia_core::embedding::ProjectionOptions;
use edia_core::lm::{compare_pair, rank_blank, Completion, PairResult, Stoplist};
use edia_core::{BiasSpace, ConcordanceQuery, EmbeddingStore, Neighbor, Projection2D};
use serde_json::json;

use crate::api::{
    CompareRequest, ConcordanceParams, DiagnosticsRequest, FrequencyParams, NeighborsRequest,
    PairRequest, PairsRequest, ProjectionRequest, Scores2dRequest, ScoresRequest, SpaceRequest,
    BlankRequest,
};
use crate::error::ApiError;
use crate::extract::{Body, Params};
use crate::provenance::{ArtifactKind, Envelope, Provenance};
use crate::state::{blocking, Shared};

type Reply<T> = Result<Envelope<T>, ApiError>;

pub async fn frequency(State(st): State<Shared>, Params(p): Params<FrequencyParams>) -> Reply<FrequencyReport> {
    let corpus = st.corpus(&p.corpus)?;
    let prov = Provenance::default()
        .artifact(ArtifactKind::Corpus, &p.corpus, &corpus.sha256)
        .config(&p);
    let report = blocking(move || Ok(corpus.value.frequency(&p.token))).await?;
    Ok(prov.wrap(report))
}

pub async fn concordance(
    State(st): State<Shared>,
    Params(p): Params<ConcordanceParams>,
) -> Reply<Vec<ConcordanceLine>> {
    let corpus = st.corpus(&p.corpus)?;
    let q = ConcordanceQuery {
        max_lines: p.max_lines,
        collections: p.collections(),
        seed: p.seed,
    };
    let prov = Provenance::default()
        .artifact(ArtifactKind::Corpus, &p.corpus, &corpus.sha256)
        .config(&json!({ "corpus": p.corpus, "token": p.token, "query": q }))
        .seed(p.seed);
    let lines = blocking(move || Ok(corpus.value.concordance(&p.token, &q))).await?;
    Ok(prov.wrap(lines))
}

pub async fn projection(State(st): State<Shared>, Body(req): Body<ProjectionRequest>) -> Reply<Projection2D> {
    let emb = st.embedding(&req.embedding)?;
    let prov = Provenance::default()
        .artifact(ArtifactKind::Embedding, &req.embedding, &emb.sha256)
        .config(&req);
    let opts = ProjectionOptions {
        neighbors: req.neighbors,
        skip_oov: req.skip_oov,
    };
    let p = blocking(move || Ok(emb.value.project_2d(&req.words, &opts)?)).await?;
    Ok(prov.wrap(p))
}

pub async fn neighbors(State(st): State<Shared>, Body(req): Body<NeighborsRequest>) -> Reply<Vec<Neighbor>> {
    let emb = st.embedding(&req.embedding)?;
    let prov = Provenance::default()
        .artifact(ArtifactKind::Embedding, &req.embedding, &emb.sha256)
        .config(&req);
    let n = blocking(move || Ok(emb.value.nearest(&req.word, req.k, &req.exclude)?)).await?;
    Ok(prov.wrap(n))
}

fn embedding_prov(id: &str, sha: &str) -> Provenance {
    Provenance::default().artifact(ArtifactKind::Embedding, id, sha)
}

fn space_of(emb: &EmbeddingStore, s: &crate::api::ResolvedSpace) -> Result<BiasSpace, ApiError> {
    Ok(build_space(emb, &s.extreme_a, &s.extreme_b, s.config())?)
}

pub async fn bias_space(State(st): State<Shared>, Body(req): Body<SpaceRequest>) -> Reply<BiasSpace> {
    let emb = st.embedding(&req.embedding)?;
    let space = st.resolve_space(&req.space)?;
    let prov = embedding_prov(&req.embedding, &emb.sha256)
        .config(&json!({ "embedding": req.embedding, "space": space }));
    let s = blocking(move || space_of(&emb.value, &space)).await?;
    Ok(prov.wrap(s))
}

pub async fn bias_scores(State(st): State<Shared>, Body(req): Body<ScoresRequest>) -> Reply<WordScores> {
    let emb = st.embedding(&req.embedding)?;
    let space = st.resolve_space(&req.space)?;
    let prov = embedding_prov(&req.embedding, &emb.sha256)
        .config(&json!({ "embedding": req.embedding, "space": space, "words": req.words }));
    let scores = blocking(move || {
        let s = space_of(&emb.value, &space)?;
        Ok(score_words(&s, &emb.value, &req.words)?)
    })
    .await?;
    Ok(prov.wrap(scores))
}

pub async fn bias_scores2d(State(st): State<Shared>, Body(req): Body<Scores2dRequest>) -> Reply<PlaneScores> {
    let emb = st.embedding(&req.embedding)?;
    let x = st.resolve_space(&req.space_x)?;
    let y = st.resolve_space(&req.space_y)?;
    let prov = embedding_prov(&req.embedding, &emb.sha256).config(&json!({
        "embedding": req.embedding, "space_x": x, "space_y": y, "words": req.words,
    }));
    let plane = blocking(move || {
        let sx = space_of(&emb.value, &x)?;
        let sy = space_of(&emb.value, &y)?;
        Ok(score_words_2spaces(&sx, &sy, &emb.value, &req.words)?)
    })
    .await?;
    Ok(prov.wrap(plane))
}

pub async fn bias_pairs(State(st): State<Shared>, Body(req): Body<PairsRequest>) -> Reply<PairReport> {
    let emb = st.embedding(&req.embedding)?;
    let space = st.resolve_space(&req.space)?;
    let prov = embedding_prov(&req.embedding, &emb.sha256)
        .config(&json!({ "embedding": req.embedding, "space": space, "pairs": req.pairs }));
    let report = blocking(move || {
        let s = space_of(&emb.value, &space)?;
        Ok(pair_asymmetry(&s, &emb.value, &req.pairs)?)
    })
    .await?;
    Ok(prov.wrap(report))
}

pub async fn bias_diagnostics(
    State(st): State<Shared>,
    Body(req): Body<DiagnosticsRequest>,
) -> Reply<Vec<SeedDiagnostics>> {
    let emb = st.embedding(&req.embedding)?;
    let mut prov = embedding_prov(&req.embedding, &emb.sha256);
    let corpus = match &req.corpus {
        Some(id) => {
            let c = st.corpus(id)?;
            prov = prov.artifact(ArtifactKind::Corpus, id, &c.sha256);
            Some(c)
        }
        None => None,
    };
    let lists = req
        .lists
        .iter()
        .map(|l| st.resolve_list(l))
        .collect::<Result<Vec<_>, _>>()?;
    let prov = prov.config(&json!({ "embedding": req.embedding, "corpus": req.corpus, "lists": lists }));
    let out = blocking(move || {
        let c = corpus.as_ref().map(|c| c.value.as_ref());
        Ok(lists.iter().map(|l| diagnose_list(l, &emb.value, c)).collect())
    })
    .await?;
    Ok(prov.wrap(out))
}

pub async fn bias_compare(State(st): State<Shared>, Body(req): Body<CompareRequest>) -> Reply<Comparison> {
    let mut prov = Provenance::default();
    let mut embs = Vec::with_capacity(req.embeddings.len());
    for id in &req.embeddings {
        let e = st.embedding(id)?;
        prov = prov.artifact(ArtifactKind::Embedding, id, &e.sha256);
        embs.push(e);
    }
    let space = st.resolve_space(&req.space)?;
    let prov = prov.config(&json!({ "embeddings": req.embeddings, "space": space, "words": req.words }));
    let cmp = blocking(move || {
        let stores: Vec<&EmbeddingStore> = embs.iter().map(|e| e.value.as_ref()).collect();
        Ok(compare_embeddings(
            &space.extreme_a,
            &space.extreme_b,
            space.config(),
            &req.words,
            &stores,
        )?)
    })
    .await?;
    Ok(prov.wrap(cmp))
}

pub async fn sentences_blank(State(st): State<Shared>, Body(req): Body<BlankRequest>) -> Reply<Vec<Completion>> {
    let lm = st.lm(&req.lm)?;
    let stoplist = match (&req.language, req.query.exclude_function_words) {
        (Some(lang), _) => Some(Stoplist::builtin(lang)?),
        (None, true) => {
            return Err(ApiError::invalid(
                "missing_language",
                "exclude_function_words needs a language for the stoplist",
            ))
        }
        (None, false) => None,
    };
    let prov = Provenance::default()
        .artifact(ArtifactKind::Lm, &req.lm, &lm.sha256)
        .config(&req);
    let out = blocking(move || Ok(rank_blank(lm.value.as_ref(), &req.query, stoplist.as_ref())?)).await?;
    Ok(prov.wrap(out))
}

pub async fn sentences_pair(State(st): State<Shared>, Body(req): Body<PairRequest>) -> Reply<PairResult> {
    let lm = st.lm(&req.lm)?;
    let prov = Provenance::default()
        .artifact(ArtifactKind::Lm, &req.lm, &lm.sha256)
        .config(&req);
    let out = blocking(move || Ok(compare_pair(lm.value.as_ref(), &req.pair)?)).await?;
    Ok(prov.wrap(out))
}
