//! The thin subcommands. Each returns what it would print.

use std::path::{Path, PathBuf};

use edia_core::bias::{build_space, score_words};
use edia_core::report::{score_rows, sha256_hex, to_csv};
use edia_core::trainer::{train, TrainingManifest};
use edia_core::{
    ConcordanceQuery, CorpusIndex, EmbeddingStore, LoadOptions, NgramConfig, NgramLM, Normalizer,
    SpaceConfig, Tokenizer, TrainerConfig, WordList,
};
use edia_server::registry::{index_corpus, write_atomic};

use crate::error::CliError;

pub fn read_corpus(path: &Path, normalizer: Normalizer) -> Result<CorpusIndex, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(index_corpus(&bytes, Tokenizer::new(normalizer))?)
}

fn id_from(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("embedding")
        .to_owned()
}

/// `x.vec` -> `x.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn train_embedding(
    corpus: &Path,
    out: &Path,
    id: Option<String>,
    cfg: &TrainerConfig,
) -> Result<TrainingManifest, CliError> {
    let idx = read_corpus(corpus, Normalizer::default())?;
    let id = id.unwrap_or_else(|| id_from(out));
    let trained = train(&id, &idx, cfg)?;
    let mut bytes = Vec::new();
    trained.store.write_text(&mut bytes).map_err(|e| CliError::io(out, e))?;
    write_atomic(out, &bytes).map_err(|e| CliError::io(out, e))?;
    let mpath = manifest_path(out);
    let json = serde_json::to_vec_pretty(&trained.manifest).expect("serializable");
    write_atomic(&mpath, &json).map_err(|e| CliError::io(&mpath, e))?;
    log::info!("wrote {} ({})", out.display(), sha256_hex(&bytes));
    Ok(trained.manifest)
}

pub fn train_lm(corpus: &Path, out: &Path, id: Option<String>, cfg: NgramConfig) -> Result<String, CliError> {
    let idx = read_corpus(corpus, Normalizer::default())?;
    let id = id.unwrap_or_else(|| id_from(out));
    let lm = NgramLM::train(&id, &idx, cfg)?;
    let bytes = serde_json::to_vec(&lm.to_file()).expect("serializable");
    write_atomic(out, &bytes).map_err(|e| CliError::io(out, e))?;
    Ok(sha256_hex(&bytes))
}

pub struct ScoreArgs<'a> {
    pub embedding: &'a Path,
    pub limit: Option<usize>,
    pub extreme_a: WordList,
    pub extreme_b: WordList,
    pub config: SpaceConfig,
    pub words: &'a [String],
}

/// Scores as CSV, plus the words that were not in the vocabulary.
pub fn score(args: ScoreArgs) -> Result<(String, Vec<String>), CliError> {
    let opts = LoadOptions {
        limit: args.limit,
        normalizer: Normalizer::default(),
    };
    let store = EmbeddingStore::load(args.embedding, &opts).map_err(|e| match e {
        edia_core::EmbeddingError::Io(io) => CliError::io(args.embedding, io),
        other => other.into(),
    })?;
    let space = build_space(&store, &args.extreme_a, &args.extreme_b, args.config)?;
    let ws = score_words(&space, &store, args.words)?;
    let csv = to_csv(&score_rows(store.id(), &ws)).map_err(|e| CliError::Manifest(e.to_string()))?;
    Ok((csv, ws.missing))
}

/// One JSON object per line.
pub fn concordance(corpus: &Path, token: &str, q: &ConcordanceQuery) -> Result<String, CliError> {
    let idx = read_corpus(corpus, Normalizer::default())?;
    let mut out = String::new();
    for line in idx.concordance(token, q) {
        out.push_str(&serde_json::to_string(&line).expect("serializable"));
        out.push('\n');
    }
    Ok(out)
}
