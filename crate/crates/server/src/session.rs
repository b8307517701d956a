//! Named sessions: word lists, bias spaces over them, and the artifacts
//! a user was working with. One JSON file per session.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::Mutex;

use edia_core::{CentroidMode, SpaceConfig, SpaceMethod, WordList};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::registry::{validate_id, write_atomic};

/// A bias space stored by reference to two list names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub extreme_a: String,
    pub extreme_b: String,
    #[serde(default)]
    pub method: SpaceMethod,
    #[serde(default)]
    pub centroid: CentroidMode,
}

impl SpaceSpec {
    pub fn config(&self) -> SpaceConfig {
        SpaceConfig {
            method: self.method,
            centroid: self.centroid,
        }
    }
}

/// Body of a list upload; the name comes from the path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListBody {
    pub words: Vec<String>,
    #[serde(default)]
    pub language: Option<String>,
    #[serde(default)]
    pub provenance: Option<String>,
}

impl ListBody {
    pub fn into_list(self, name: &str) -> Result<WordList, ApiError> {
        let mut list = WordList::new(name, self.words)?;
        list.language = self.language;
        list.provenance = self.provenance;
        Ok(list)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub lists: BTreeMap<String, WordList>,
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceSpec>,
    #[serde(default)]
    pub active_embedding: Option<String>,
    #[serde(default)]
    pub active_corpus: Option<String>,
    #[serde(default)]
    pub active_lm: Option<String>,
    pub created_at: String,
    pub updated_at: String,
}

/// Client-settable part of a session.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionDraft {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub lists: BTreeMap<String, ListBody>,
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceSpec>,
    #[serde(default)]
    pub active_embedding: Option<String>,
    #[serde(default)]
    pub active_corpus: Option<String>,
    #[serde(default)]
    pub active_lm: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub lists: usize,
    pub spaces: usize,
    pub updated_at: String,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn check_spaces(
    lists: &BTreeMap<String, WordList>,
    spaces: &BTreeMap<String, SpaceSpec>,
) -> Result<(), ApiError> {
    for (name, s) in spaces {
        validate_id(name)?;
        for l in [&s.extreme_a, &s.extreme_b] {
            if !lists.contains_key(l) {
                return Err(ApiError::invalid(
                    "unknown_list",
                    format!("space {name:?} refers to list {l:?}, which the session does not have"),
                ));
            }
        }
    }
    Ok(())
}

fn build_lists(draft: BTreeMap<String, ListBody>) -> Result<BTreeMap<String, WordList>, ApiError> {
    draft
        .into_iter()
        .map(|(name, body)| {
            validate_id(&name)?;
            let list = body.into_list(&name)?;
            Ok((name, list))
        })
        .collect()
}

pub struct SessionStore {
    dir: PathBuf,
    sessions: Mutex<BTreeMap<String, Session>>,
}

impl SessionStore {
    pub fn open(dir: PathBuf) -> io::Result<Self> {
        let mut sessions = BTreeMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            match fs::read(&path).map(|b| serde_json::from_slice::<Session>(&b)) {
                Ok(Ok(s)) => {
                    sessions.insert(s.session_id.clone(), s);
                }
                Ok(Err(e)) => log::warn!("skipping session {}: {e}", path.display()),
                Err(e) => log::warn!("skipping session {}: {e}", path.display()),
            }
        }
        Ok(Self {
            dir,
            sessions: Mutex::new(sessions),
        })
    }

    fn persist(&self, s: &Session) -> Result<(), ApiError> {
        let bytes = serde_json::to_vec_pretty(s).map_err(|e| ApiError::internal(e.to_string()))?;
        write_atomic(&self.dir.join(format!("{}.json", s.session_id)), &bytes)?;
        Ok(())
    }

    /// `exists` checks an active artifact id against the registry.
    pub fn create(
        &self,
        draft: SessionDraft,
        exists: impl Fn(&SessionDraft) -> Result<(), ApiError>,
    ) -> Result<Session, ApiError> {
        exists(&draft)?;
        let lists = build_lists(draft.lists)?;
        check_spaces(&lists, &draft.spaces)?;
        let ts = now();
        let s = Session {
            session_id: uuid::Uuid::new_v4().to_string(),
            name: draft.name,
            lists,
            spaces: draft.spaces,
            active_embedding: draft.active_embedding,
            active_corpus: draft.active_corpus,
            active_lm: draft.active_lm,
            created_at: ts.clone(),
            updated_at: ts,
        };
        self.persist(&s)?;
        self.sessions
            .lock()
            .expect("sessions")
            .insert(s.session_id.clone(), s.clone());
        Ok(s)
    }

    pub fn list(&self) -> Vec<SessionSummary> {
        self.sessions
            .lock()
            .expect("sessions")
            .values()
            .map(|s| SessionSummary {
                session_id: s.session_id.clone(),
                name: s.name.clone(),
                lists: s.lists.len(),
                spaces: s.spaces.len(),
                updated_at: s.updated_at.clone(),
            })
            .collect()
    }

    pub fn get(&self, id: &str) -> Result<Session, ApiError> {
        self.sessions
            .lock()
            .expect("sessions")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    /// Applies `f` to a copy of the session and stores it if `f` and the
    /// reference checks succeed.
    pub fn update(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<(), ApiError>,
    ) -> Result<Session, ApiError> {
        let mut guard = self.sessions.lock().expect("sessions");
        let current = guard.get(id).ok_or_else(|| ApiError::not_found("session", id))?;
        let mut next = current.clone();
        f(&mut next)?;
        check_spaces(&next.lists, &next.spaces)?;
        next.updated_at = now();
        self.persist(&next)?;
        guard.insert(id.to_owned(), next.clone());
        Ok(next)
    }

    /// Replaces everything client-settable.
    pub fn replace(
        &self,
        id: &str,
        draft: SessionDraft,
        exists: impl Fn(&SessionDraft) -> Result<(), ApiError>,
    ) -> Result<Session, ApiError> {
        exists(&draft)?;
        let lists = build_lists(draft.lists)?;
        self.update(id, move |s| {
            s.name = draft.name;
            s.lists = lists;
            s.spaces = draft.spaces;
            s.active_embedding = draft.active_embedding;
            s.active_corpus = draft.active_corpus;
            s.active_lm = draft.active_lm;
            Ok(())
        })
    }

    pub fn delete(&self, id: &str) -> Result<(), ApiError> {
        let mut guard = self.sessions.lock().expect("sessions");
        if guard.remove(id).is_none() {
            return Err(ApiError::not_found("session", id));
        }
        let path = self.dir.join(format!("{id}.json"));
        if path.exists() {
            fs::remove_file(path)?;
        }
        Ok(())
    }

    pub fn put_list(&self, id: &str, name: &str, body: ListBody) -> Result<WordList, ApiError> {
        validate_id(name)?;
        let list = body.into_list(name)?;
        let stored = list.clone();
        self.update(id, move |s| {
            s.lists.insert(name.to_owned(), stored);
            Ok(())
        })?;
        Ok(list)
    }

    pub fn get_list(&self, id: &str, name: &str) -> Result<WordList, ApiError> {
        self.get(id)?
            .lists
            .get(name)
            .cloned()
            .ok_or_else(|| ApiError::not_found("list", name))
    }

    pub fn delete_list(&self, id: &str, name: &str) -> Result<(), ApiError> {
        self.update(id, |s| {
            if let Some((space, _)) = s
                .spaces
                .iter()
                .find(|(_, sp)| sp.extreme_a == name || sp.extreme_b == name)
            {
                return Err(ApiError::conflict(
                    "list_in_use",
                    format!("list {name:?} is used by space {space:?}"),
                ));
            }
            s.lists
                .remove(name)
                .map(|_| ())
                .ok_or_else(|| ApiError::not_found("list", name))
        })
        .map(|_| ())
    }

    pub fn space(&self, id: &str, name: &str) -> Result<(WordList, WordList, SpaceConfig), ApiError> {
        let s = self.get(id)?;
        let spec = s
            .spaces
            .get(name)
            .ok_or_else(|| ApiError::not_found("space", name))?;
        let a = s.lists[&spec.extreme_a].clone();
        let b = s.lists[&spec.extreme_b].clone();
        Ok((a, b, spec.config()))
    }
}
