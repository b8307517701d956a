//! The audit manifest: one JSON file naming the artifacts, word lists,
//! bias spaces and probes of an audit. Spaces use the same shape as in
//! service sessions. Relative paths are resolved against the manifest's
//! directory.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use edia_core::lexicon::load_manifest;
use edia_core::lm::{parse_pair_batch, BlankQuery, PairQuery};
use edia_core::{NgramConfig, Normalizer, WordList};
use edia_server::session::SpaceSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSource {
    pub id: String,
    pub path: PathBuf,
    #[serde(default)]
    pub limit: Option<usize>,
    #[serde(default = "yes")]
    pub lowercase: bool,
    #[serde(default = "yes")]
    pub nfc: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSource {
    pub id: String,
    pub path: PathBuf,
    #[serde(default = "yes")]
    pub lowercase: bool,
    #[serde(default = "yes")]
    pub nfc: bool,
}

/// A saved model file, or a config to train one on the manifest's corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmSource {
    pub id: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub train: Option<NgramConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plane {
    pub x: String,
    pub y: String,
}

fn default_lines() -> Option<usize> {
    Some(edia_core::corpus::DEFAULT_CONCORDANCE_LINES)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcordanceSettings {
    #[serde(default = "default_lines")]
    pub max_lines: Option<usize>,
    #[serde(default)]
    pub collections: Option<Vec<String>>,
}

impl Default for ConcordanceSettings {
    fn default() -> Self {
        Self {
            max_lines: default_lines(),
            collections: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub seed: Option<u64>,
    /// Stoplist language for blanks that exclude function words.
    #[serde(default)]
    pub language: Option<String>,
    pub embeddings: Vec<EmbeddingSource>,
    #[serde(default)]
    pub corpus: Option<CorpusSource>,
    #[serde(default)]
    pub lm: Option<LmSource>,
    #[serde(default)]
    pub lists: Vec<WordList>,
    /// A word-list manifest file, merged with `lists`.
    #[serde(default)]
    pub lists_file: Option<PathBuf>,
    #[serde(default)]
    pub spaces: BTreeMap<String, SpaceSpec>,
    /// Words of interest scored against every space.
    #[serde(default)]
    pub words: Vec<String>,
    #[serde(default)]
    pub planes: Vec<Plane>,
    /// Gendered word pairs scored against every space.
    #[serde(default)]
    pub pairs: Vec<(String, String)>,
    #[serde(default)]
    pub blanks: Vec<BlankQuery>,
    #[serde(default)]
    pub sentence_pairs: Vec<PairQuery>,
    /// JSONL pair batch, appended to `sentence_pairs`.
    #[serde(default)]
    pub sentence_pairs_file: Option<PathBuf>,
    #[serde(default)]
    pub concordance: ConcordanceSettings,
}

impl EmbeddingSource {
    pub fn normalizer(&self) -> Normalizer {
        Normalizer {
            nfc: self.nfc,
            lowercase: self.lowercase,
        }
    }
}

impl CorpusSource {
    pub fn normalizer(&self) -> Normalizer {
        Normalizer {
            nfc: self.nfc,
            lowercase: self.lowercase,
        }
    }
}

/// A manifest with its lists merged and its paths resolved. Paths in
/// `manifest` stay as written so reports do not depend on where the
/// manifest lives.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub manifest: Manifest,
    pub sha256: String,
    pub lists: Vec<WordList>,
    pub embedding_paths: Vec<PathBuf>,
    pub corpus_path: Option<PathBuf>,
    pub lm_path: Option<PathBuf>,
}

impl Loaded {
    pub fn list(&self, name: &str) -> &WordList {
        self.lists.iter().find(|l| l.name == name).expect("validated list name")
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Manifest(msg.into())
}

fn resolve(base: &Path, p: &Path) -> Result<PathBuf, CliError> {
    let full = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    if !full.is_file() {
        return Err(CliError::MissingFile(full));
    }
    Ok(full)
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let mut m: Manifest = serde_json::from_slice(&bytes).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));

    let embedding_paths = m
        .embeddings
        .iter()
        .map(|e| resolve(base, &e.path))
        .collect::<Result<Vec<_>, _>>()?;
    let corpus_path = m.corpus.as_ref().map(|c| resolve(base, &c.path)).transpose()?;
    let mut lists = m.lists.clone();
    if let Some(f) = &m.lists_file {
        lists.extend(load_manifest(resolve(base, f)?)?);
    }
    if let Some(f) = &m.sentence_pairs_file {
        let p = resolve(base, f)?;
        let text = std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
        m.sentence_pairs.extend(parse_pair_batch(&text)?);
    }
    let mut lm_path = None;
    if let Some(lm) = &m.lm {
        match (&lm.path, &lm.train) {
            (Some(p), None) => lm_path = Some(resolve(base, p)?),
            (None, Some(_)) if m.corpus.is_none() => return Err(bad("lm.train needs a corpus")),
            (None, Some(_)) => {}
            _ => return Err(bad("lm needs exactly one of path or train")),
        }
    }

    if m.embeddings.is_empty() {
        return Err(bad("at least one embedding is required"));
    }
    let mut ids = HashSet::new();
    for e in &m.embeddings {
        edia_server::registry::validate_id(&e.id)?;
        if !ids.insert(e.id.as_str()) {
            return Err(bad(format!("embedding id {:?} appears twice", e.id)));
        }
    }
    let mut names = HashSet::new();
    for l in &lists {
        if !names.insert(l.name.clone()) {
            return Err(bad(format!("list {:?} is defined twice", l.name)));
        }
    }
    for (name, s) in &m.spaces {
        edia_server::registry::validate_id(name)?;
        for l in [&s.extreme_a, &s.extreme_b] {
            if !names.contains(l) {
                return Err(bad(format!("space {name:?} refers to unknown list {l:?}")));
            }
        }
    }
    for p in &m.planes {
        for s in [&p.x, &p.y] {
            if !m.spaces.contains_key(s) {
                return Err(bad(format!("plane refers to unknown space {s:?}")));
            }
        }
    }
    if (!m.blanks.is_empty() || !m.sentence_pairs.is_empty()) && m.lm.is_none() {
        return Err(bad("blanks and sentence_pairs need an lm"));
    }
    Ok(Loaded {
        sha256: edia_core::report::sha256_hex(&bytes),
        manifest: m,
        lists,
        embedding_paths,
        corpus_path,
        lm_path,
    })
}
