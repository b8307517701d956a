use std::collections::BTreeMap;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use edia_core::WordList;

use crate::error::ApiError;
use crate::extract::Body;
use crate::provenance::{Envelope, Provenance};
use crate::session::{ListBody, Session, SessionDraft, SessionSummary};
use crate::state::Shared;

type Reply<T> = Result<Envelope<T>, ApiError>;

fn wrap<T: serde::Serialize>(v: T) -> Envelope<T> {
    Provenance::default().wrap(v)
}

pub async fn create(
    State(st): State<Shared>,
    Body(draft): Body<SessionDraft>,
) -> Result<(StatusCode, Envelope<Session>), ApiError> {
    let s = st.sessions.create(draft, |d| st.check_active(d))?;
    Ok((StatusCode::CREATED, wrap(s)))
}

pub async fn list(State(st): State<Shared>) -> Envelope<Vec<SessionSummary>> {
    wrap(st.sessions.list())
}

pub async fn get(State(st): State<Shared>, Path(id): Path<String>) -> Reply<Session> {
    st.sessions.get(&id).map(wrap)
}

pub async fn replace(
    State(st): State<Shared>,
    Path(id): Path<String>,
    Body(draft): Body<SessionDraft>,
) -> Reply<Session> {
    st.sessions.replace(&id, draft, |d| st.check_active(d)).map(wrap)
}

pub async fn delete(State(st): State<Shared>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    st.sessions.delete(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

pub async fn lists(State(st): State<Shared>, Path(id): Path<String>) -> Reply<BTreeMap<String, WordList>> {
    Ok(wrap(st.sessions.get(&id)?.lists))
}

pub async fn put_list(
    State(st): State<Shared>,
    Path((id, name)): Path<(String, String)>,
    Body(body): Body<ListBody>,
) -> Reply<WordList> {
    st.sessions.put_list(&id, &name, body).map(wrap)
}

pub async fn get_list(State(st): State<Shared>, Path((id, name)): Path<(String, String)>) -> Reply<WordList> {
    st.sessions.get_list(&id, &name).map(wrap)
}

pub async fn delete_list(
    State(st): State<Shared>,
    Path((id, name)): Path<(String, String)>,
) -> Result<StatusCode, ApiError> {
    st.sessions.delete_list(&id, &name)?;
    Ok(StatusCode::NO_CONTENT)
}
