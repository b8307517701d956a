//! Runs a manifest end to end and writes the report bundle.
//!
//! Every file in the bundle is a pure function of the manifest, the
//! files it names and the seed, except `provenance.json`'s
//! `generated_at`.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use edia_core::bias::{
    build_space, compare_embeddings, diagnose_list, pair_asymmetry, score_words,
    score_words_2spaces, Comparison, PairReport, PlaneScores, SeedDiagnostics, WordScores,
};
use edia_core::corpus::{ConcordanceLine, FrequencyReport};
use edia_core::lm::{compare_pair, rank_blank, BlankQuery, Completion, NgramFile, PairResult, Stoplist};
use edia_core::report::{comparison_csv, pair_rows, plane_rows, score_rows, sha256_hex, to_csv};
use edia_core::{
    BiasSpace, ConcordanceQuery, CorpusIndex, EmbeddingStore, LoadOptions, NgramConfig, NgramLM,
    ResolvedList, SpaceConfig, Tokenizer, WordList,
};
use edia_server::provenance::ArtifactKind;
use serde::Serialize;

use crate::error::CliError;
use crate::manifest::{self, ConcordanceSettings, Loaded};

pub const PROVENANCE_FILE: &str = "provenance.json";

struct LoadedEmbedding {
    store: EmbeddingStore,
    sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub kind: ArtifactKind,
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub sha256: String,
}

#[derive(Serialize)]
struct ListInEmbedding {
    embedding: String,
    #[serde(flatten)]
    resolution: ResolvedList,
    diagnostics: SeedDiagnostics,
}

#[derive(Serialize)]
struct ListReport<'a> {
    list: &'a WordList,
    embeddings: Vec<ListInEmbedding>,
}

#[derive(Serialize)]
struct Tagged<T: Serialize> {
    embedding: String,
    #[serde(flatten)]
    value: T,
}

#[derive(Serialize)]
struct BlankResult {
    query: BlankQuery,
    completions: Vec<Completion>,
}

#[derive(Serialize)]
struct BlankRow<'a> {
    template: &'a str,
    rank: usize,
    word: &'a str,
    sentence: &'a str,
    log_prob: f64,
    probability: f64,
}

#[derive(Serialize)]
struct SentencePairRow<'a> {
    tag: &'a str,
    stereo: &'a str,
    anti: &'a str,
    stereo_log_prob: f64,
    anti_log_prob: f64,
    stereo_mean_log_prob: f64,
    anti_mean_log_prob: f64,
    preference: f64,
}

#[derive(Serialize)]
struct FrequencyRow<'a> {
    token: &'a str,
    total_count: u64,
    rank: Option<usize>,
    percentile: f64,
}

#[derive(Serialize)]
struct CollectionRow<'a> {
    token: &'a str,
    collection: &'a str,
    count: u64,
    percent: f64,
}

#[derive(Serialize)]
struct ConcordanceRecord<'a> {
    token: &'a str,
    #[serde(flatten)]
    line: &'a ConcordanceLine,
}

#[derive(Serialize, Default)]
struct Report {
    version: &'static str,
    seed: u64,
    spaces: Vec<BiasSpace>,
    scores: Vec<Tagged<WordScores>>,
    planes: Vec<Tagged<PlaneScores>>,
    pairs: Vec<Tagged<PairReport>>,
    comparisons: BTreeMap<String, Comparison>,
    blanks: Vec<BlankResult>,
    sentence_pairs: Vec<PairResult>,
    frequency: Vec<FrequencyReport>,
    concordance: BTreeMap<String, Vec<ConcordanceLine>>,
}

#[derive(Serialize)]
struct ResolvedSpaceConfig<'a> {
    extreme_a: &'a WordList,
    extreme_b: &'a WordList,
    #[serde(flatten)]
    config: SpaceConfig,
}

#[derive(Serialize)]
struct AuditConfig<'a> {
    spaces: BTreeMap<&'a str, ResolvedSpaceConfig<'a>>,
    words: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    lm: Option<NgramConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    language: Option<&'a str>,
    concordance: &'a ConcordanceSettings,
}

#[derive(Serialize)]
struct ProvenanceFile<'a> {
    version: &'static str,
    seed: u64,
    generated_at: String,
    manifest_sha256: &'a str,
    artifacts: &'a [ArtifactRecord],
    config: AuditConfig<'a>,
    files: BTreeMap<String, String>,
}

/// What an audit wrote.
#[derive(Debug, Clone)]
pub struct AuditOutcome {
    pub out_dir: PathBuf,
    /// Bundle file names, sorted, including the provenance file.
    pub files: Vec<String>,
    pub artifacts: Vec<ArtifactRecord>,
    pub seed: u64,
}

struct Bundle {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl Bundle {
    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents.as_ref()).map_err(|e| CliError::io(&path, e))?;
        self.files.insert(name.to_owned(), sha256_hex(contents.as_ref()));
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, text)
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let text = to_csv(rows).map_err(|e| CliError::Manifest(format!("{name}: {e}")))?;
        self.write(name, text)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Loads the language model a manifest names. Trained models hash to the
/// same bytes the service stores for them.
fn load_lm(loaded: &Loaded, corpus: Option<&CorpusIndex>) -> Result<Option<(NgramLM, String)>, CliError> {
    let Some(src) = &loaded.manifest.lm else {
        return Ok(None);
    };
    let lm = match (&loaded.lm_path, &src.train) {
        (Some(p), _) => {
            let bytes = read(p)?;
            let mut file: NgramFile = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Manifest(format!("{}: {e}", p.display())))?;
            file.id = src.id.clone();
            NgramLM::from_file(file)?
        }
        (None, Some(cfg)) => NgramLM::train(&src.id, corpus.expect("validated corpus"), *cfg)?,
        (None, None) => unreachable!("validated lm source"),
    };
    let bytes = serde_json::to_vec(&lm.to_file()).expect("serializable");
    Ok(Some((lm, sha256_hex(&bytes))))
}

/// Unique list words in manifest order.
fn seed_words(lists: &[WordList]) -> Vec<String> {
    let mut seen = HashSet::new();
    lists
        .iter()
        .flat_map(|l| l.words.iter())
        .filter(|w| seen.insert(w.as_str()))
        .cloned()
        .collect()
}

pub fn run_audit(manifest_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<AuditOutcome, CliError> {
    let loaded = manifest::load(manifest_path)?;
    let m = &loaded.manifest;
    let seed = seed.or(m.seed).unwrap_or(0);
    let mut artifacts = Vec::new();

    let mut embs = Vec::with_capacity(m.embeddings.len());
    for (src, path) in m.embeddings.iter().zip(&loaded.embedding_paths) {
        let bytes = read(path)?;
        let opts = LoadOptions {
            limit: src.limit,
            normalizer: src.normalizer(),
        };
        let store = EmbeddingStore::read_text(&src.id, bytes.as_slice(), &opts)?;
        let sha256 = sha256_hex(&bytes);
        artifacts.push(ArtifactRecord {
            kind: ArtifactKind::Embedding,
            id: src.id.clone(),
            path: Some(src.path.clone()),
            sha256: sha256.clone(),
        });
        embs.push(LoadedEmbedding { store, sha256 });
    }

    let corpus = match (&m.corpus, &loaded.corpus_path) {
        (Some(src), Some(path)) => {
            let bytes = read(path)?;
            let idx = edia_server::registry::index_corpus(&bytes, Tokenizer::new(src.normalizer()))?;
            artifacts.push(ArtifactRecord {
                kind: ArtifactKind::Corpus,
                id: src.id.clone(),
                path: Some(src.path.clone()),
                sha256: sha256_hex(&bytes),
            });
            Some(idx)
        }
        _ => None,
    };

    let lm = load_lm(&loaded, corpus.as_ref())?;
    if let (Some((lm, sha)), Some(src)) = (&lm, &m.lm) {
        artifacts.push(ArtifactRecord {
            kind: ArtifactKind::Lm,
            id: src.id.clone(),
            path: src.path.clone(),
            sha256: sha.clone(),
        });
        log::info!("language model {:?} with {} words", src.id, lm.words().len());
    }

    // Fail before writing anything if some list is unusable.
    for list in &loaded.lists {
        for (src, e) in m.embeddings.iter().zip(&embs) {
            if list.resolve(&e.store).resolved.is_empty() {
                return Err(CliError::OovList {
                    list: list.name.clone(),
                    embedding: src.id.clone(),
                });
            }
        }
    }
    let needs_stoplist = m.blanks.iter().any(|b| b.exclude_function_words);
    let stoplist = match (&m.language, needs_stoplist) {
        (Some(lang), true) => Some(Stoplist::builtin(lang)?),
        (None, true) => {
            return Err(CliError::Manifest(
                "blanks with exclude_function_words need a language".into(),
            ))
        }
        _ => None,
    };

    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut bundle = Bundle {
        dir: out_dir.to_path_buf(),
        files: BTreeMap::new(),
    };
    let mut report = Report {
        version: edia_core::VERSION,
        seed,
        ..Default::default()
    };

    let list_reports: Vec<ListReport> = loaded
        .lists
        .iter()
        .map(|list| ListReport {
            list,
            embeddings: embs
                .iter()
                .map(|e| ListInEmbedding {
                    embedding: e.store.id().to_owned(),
                    resolution: list.resolve(&e.store),
                    diagnostics: diagnose_list(list, &e.store, corpus.as_ref()),
                })
                .collect(),
        })
        .collect();
    bundle.json("lists.json", &list_reports)?;

    let mut score_table = Vec::new();
    let mut plane_table = Vec::new();
    let mut pair_table = Vec::new();
    for e in &embs {
        let id = e.store.id();
        let mut spaces = BTreeMap::new();
        for (name, spec) in &m.spaces {
            let space = build_space(
                &e.store,
                loaded.list(&spec.extreme_a),
                loaded.list(&spec.extreme_b),
                spec.config(),
            )?;
            if !m.words.is_empty() {
                let ws = score_words(&space, &e.store, &m.words)?;
                score_table.extend(score_rows(id, &ws));
                report.scores.push(Tagged {
                    embedding: id.to_owned(),
                    value: ws,
                });
            }
            if !m.pairs.is_empty() {
                let pr = pair_asymmetry(&space, &e.store, &m.pairs)?;
                pair_table.extend(pair_rows(id, &pr));
                report.pairs.push(Tagged {
                    embedding: id.to_owned(),
                    value: pr,
                });
            }
            spaces.insert(name.as_str(), space);
        }
        for p in &m.planes {
            let plane = score_words_2spaces(&spaces[p.x.as_str()], &spaces[p.y.as_str()], &e.store, &m.words)?;
            plane_table.extend(plane_rows(id, &plane));
            report.planes.push(Tagged {
                embedding: id.to_owned(),
                value: plane,
            });
        }
        report.spaces.extend(spaces.into_values());
        log::debug!("scored embedding {id:?} ({})", e.sha256);
    }
    bundle.csv("scores.csv", &score_table)?;
    if !m.planes.is_empty() {
        bundle.csv("scores2d.csv", &plane_table)?;
    }
    if !m.pairs.is_empty() {
        bundle.csv("pairs.csv", &pair_table)?;
    }

    if embs.len() >= 2 {
        let stores: Vec<&EmbeddingStore> = embs.iter().map(|e| &e.store).collect();
        for (name, spec) in &m.spaces {
            let cmp = compare_embeddings(
                loaded.list(&spec.extreme_a),
                loaded.list(&spec.extreme_b),
                spec.config(),
                &m.words,
                &stores,
            )?;
            let csv = comparison_csv(&m.words, &cmp).map_err(|e| CliError::Manifest(e.to_string()))?;
            bundle.write(&format!("comparison_{name}.csv"), csv)?;
            report.comparisons.insert(name.clone(), cmp);
        }
    }

    if let Some((lm, _)) = &lm {
        if !m.blanks.is_empty() {
            let mut rows_src = Vec::new();
            for q in &m.blanks {
                let completions = rank_blank(lm, q, stoplist.as_ref())?;
                rows_src.push(BlankResult {
                    query: q.clone(),
                    completions,
                });
            }
            let rows: Vec<BlankRow> = rows_src
                .iter()
                .flat_map(|b| {
                    b.completions.iter().enumerate().map(move |(i, c)| BlankRow {
                        template: &b.query.template,
                        rank: i + 1,
                        word: &c.word,
                        sentence: &c.sentence,
                        log_prob: c.log_prob,
                        probability: c.probability,
                    })
                })
                .collect();
            bundle.csv("blanks.csv", &rows)?;
            report.blanks = rows_src;
        }
        if !m.sentence_pairs.is_empty() {
            let results = m
                .sentence_pairs
                .iter()
                .map(|q| compare_pair(lm, q))
                .collect::<Result<Vec<_>, _>>()?;
            let rows: Vec<SentencePairRow> = results
                .iter()
                .map(|r| SentencePairRow {
                    tag: r.tag.as_deref().unwrap_or(""),
                    stereo: &r.stereo.sentence,
                    anti: &r.anti.sentence,
                    stereo_log_prob: r.stereo.log_prob,
                    anti_log_prob: r.anti.log_prob,
                    stereo_mean_log_prob: r.stereo.mean_log_prob,
                    anti_mean_log_prob: r.anti.mean_log_prob,
                    preference: r.preference,
                })
                .collect();
            bundle.csv("sentence_pairs.csv", &rows)?;
            report.sentence_pairs = results;
        }
    }

    if let Some(idx) = &corpus {
        let seeds = seed_words(&loaded.lists);
        let q = ConcordanceQuery {
            max_lines: m.concordance.max_lines,
            collections: m.concordance.collections.clone(),
            seed,
        };
        let mut freq_rows = Vec::new();
        let mut coll_rows = Vec::new();
        let mut conc = String::new();
        for w in &seeds {
            let f = idx.frequency(w);
            let lines = idx.concordance(w, &q);
            for l in &lines {
                conc.push_str(&serde_json::to_string(&ConcordanceRecord { token: w, line: l }).expect("serializable"));
                conc.push('\n');
            }
            report.frequency.push(f);
            report.concordance.insert(w.clone(), lines);
        }
        for f in &report.frequency {
            freq_rows.push(FrequencyRow {
                token: &f.token,
                total_count: f.total_count,
                rank: f.rank,
                percentile: idx.percentile(f.total_count),
            });
            for s in &f.per_collection {
                coll_rows.push(CollectionRow {
                    token: &f.token,
                    collection: &s.collection,
                    count: s.count,
                    percent: s.percent,
                });
            }
        }
        bundle.csv("frequency.csv", &freq_rows)?;
        bundle.csv("frequency_by_collection.csv", &coll_rows)?;
        bundle.write("concordance.jsonl", conc)?;
    }

    bundle.json("report.json", &report)?;

    let config = AuditConfig {
        spaces: m
            .spaces
            .iter()
            .map(|(name, s)| {
                (
                    name.as_str(),
                    ResolvedSpaceConfig {
                        extreme_a: loaded.list(&s.extreme_a),
                        extreme_b: loaded.list(&s.extreme_b),
                        config: s.config(),
                    },
                )
            })
            .collect(),
        words: &m.words,
        lm: lm.as_ref().map(|(l, _)| l.config()),
        language: m.language.as_deref(),
        concordance: &m.concordance,
    };
    let files = bundle.files.clone();
    let prov = ProvenanceFile {
        version: edia_core::VERSION,
        seed,
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        manifest_sha256: &loaded.sha256,
        artifacts: &artifacts,
        config,
        files,
    };
    bundle.json(PROVENANCE_FILE, &prov)?;

    Ok(AuditOutcome {
        out_dir: out_dir.to_path_buf(),
        files: bundle.files.keys().cloned().collect(),
        artifacts,
        seed,
    })
}
