//! File-based pipeline stages. Every stage reads and writes artifacts in the
//! output directory only, so any stage can be replaced by an external tool
//! producing the same files.
//!
//! | stage        | reads                                   | writes                              |
//! |--------------|-----------------------------------------|-------------------------------------|
//! | `preprocess` | raw JSONL corpus                        | cleaned/train/test JSONL, records   |
//! | `embed-toy`  | cleaned corpus                          | tweet embeddings, word vectors      |
//! | `centroids`  | records, tweet embeddings               | hashtag dictionary                  |
//! | `thesaurus`  | dictionary                              | thesaurus JSON                      |
//! | `recommend`  | train/test corpus, word vectors         | eval pairs per `r`                  |
//! | `evaluate`   | eval pairs, thesaurus                   | report JSON                         |
//! | `sweep`      | everything above (built when missing)   | sweep CSV                           |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::corpus::{self, CleanOptions, Cleaned, Preprocessor, Stopwords};
use crate::embedding::io as emb_io;
use crate::embedding::{HashtagDictionary, ToyEmbedder, TweetEmbeddings};
use crate::error::{Error, Result};
use crate::metrics::{self, EvalReport};
use crate::recommender::{PopularityScope, RecommenderModel, WordVectors};
use crate::thesaurus::{build_thesaurus_with, Thesaurus, ThesaurusOptions};

pub const CLEANED: &str = "cleaned.jsonl";
pub const RECORDS: &str = "records.tsv";
pub const TRAIN: &str = "train.jsonl";
pub const TEST: &str = "test.jsonl";
pub const EMBEDDINGS: &str = "embeddings.bin";
pub const WORDS: &str = "words.bin";
pub const DICTIONARY: &str = "dictionary.bin";
pub const THESAURUS: &str = "thesaurus.json";
pub const SWEEP: &str = "sweep.csv";
pub const CONFIG: &str = "config.toml";

pub fn recommendations_file(r: usize) -> String {
    format!("recommendations_r{r}.jsonl")
}

pub fn report_file(k: usize, r: usize) -> String {
    format!("report_k{k}_r{r}.json")
}

/// Artifact locations for one run.
pub struct Workspace<'a> {
    config: &'a RunConfig,
}

impl<'a> Workspace<'a> {
    pub fn new(config: &'a RunConfig) -> Result<Self> {
        std::fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
        Ok(Workspace { config })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.config.out.join(name)
    }

    fn embeddings_path(&self) -> PathBuf {
        self.config
            .embeddings
            .clone()
            .unwrap_or_else(|| self.path(EMBEDDINGS))
    }

    fn words_path(&self) -> PathBuf {
        self.config
            .words
            .clone()
            .unwrap_or_else(|| self.path(WORDS))
    }

    /// Fails with the stage that produces `path` when it is absent.
    fn require(&self, path: PathBuf, stage: &'static str) -> Result<PathBuf> {
        if path.exists() {
            Ok(path)
        } else {
            Err(Error::MissingArtifact { path, stage })
        }
    }
}

fn summary(stage: &str, fields: Value) -> Value {
    let mut out = json!({ "stage": stage });
    if let (Some(o), Value::Object(f)) = (out.as_object_mut(), fields) {
        o.extend(f);
    }
    out
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Cleans the raw corpus, writes the cleaned corpus, its (tweet, hashtag)
/// records and the seeded train/test split.
pub fn preprocess(config: &RunConfig) -> Result<Value> {
    let ws = Workspace::new(config)?;
    let input = config
        .input
        .clone()
        .ok_or_else(|| Error::Domain("preprocess needs an input corpus (--input)".into()))?;
    let stopwords = match &config.stopwords {
        Some(p) => Stopwords::load(p)?,
        None => Stopwords::english(),
    };
    let raw = corpus::read_raw_tweets(&input)?;

    let mut pre = Preprocessor::new(&stopwords).with_options(CleanOptions {
        truncate_repeats: config.truncate_repeats,
    });
    let mut cleaned = Vec::new();
    let mut dropped: BTreeMap<String, usize> = BTreeMap::new();
    for tweet in &raw {
        match pre.process(tweet) {
            Cleaned::Kept(t) => cleaned.push(t),
            Cleaned::Dropped(reason) => {
                let key = serde_json::to_value(reason)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                *dropped.entry(key).or_default() += 1;
            }
        }
    }
    if cleaned.is_empty() {
        return Err(Error::Degenerate(format!(
            "no tweet in {} survived cleaning",
            input.display()
        )));
    }

    let records = corpus::explode_all(&cleaned);
    let split = corpus::split(&cleaned, config.split_fraction, config.seed)?;
    corpus::write_jsonl(&ws.path(CLEANED), &cleaned)?;
    corpus::write_records(&ws.path(RECORDS), &records)?;
    corpus::write_jsonl(&ws.path(TRAIN), &split.train)?;
    corpus::write_jsonl(&ws.path(TEST), &split.test)?;

    Ok(summary(
        "preprocess",
        json!({
            "input": raw.len(),
            "kept": cleaned.len(),
            "dropped": raw.len() - cleaned.len(),
            "dropped_by_reason": dropped,
            "records": records.len(),
            "unique_hashtags": records.iter().map(|r| &r.hashtag).collect::<std::collections::BTreeSet<_>>().len(),
            "train": split.train.len(),
            "test": split.test.len(),
        }),
    ))
}

/// Toy tweet embeddings for the cleaned corpus plus toy word vectors for its
/// vocabulary.
pub fn embed_toy(config: &RunConfig) -> Result<Value> {
    let ws = Workspace::new(config)?;
    let cleaned = corpus::read_clean_tweets(&ws.require(ws.path(CLEANED), "preprocess")?)?;
    let embedder = ToyEmbedder::new(config.dim, config.seed)?;

    let vectors = cleaned
        .par_iter()
        .map(|t| embedder.embed::<f64>(&t.text))
        .collect::<Result<Vec<_>>>()?;
    let mut embeddings = TweetEmbeddings::new(config.dim);
    for (i, v) in vectors.into_iter().enumerate() {
        embeddings.insert(i as u64, v)?;
    }
    let words: WordVectors<f64> =
        WordVectors::toy(cleaned.iter().flat_map(|t| t.words()), &embedder);

    let emb_path = ws.path(EMBEDDINGS);
    let words_path = ws.path(WORDS);
    emb_io::write_tweet_embeddings(&emb_path, &embeddings)?;
    emb_io::write_word_vectors(&words_path, &words)?;
    Ok(summary(
        "embed-toy",
        json!({
            "dim": config.dim,
            "tweets": embeddings.len(),
            "words": words.len(),
            "embeddings": path_str(&emb_path),
            "word_vectors": path_str(&words_path),
        }),
    ))
}

pub fn centroids(config: &RunConfig) -> Result<Value> {
    let ws = Workspace::new(config)?;
    let records = corpus::read_records(&ws.require(ws.path(RECORDS), "preprocess")?)?;
    let embeddings: TweetEmbeddings<f64> =
        emb_io::read_tweet_embeddings(&ws.require(ws.embeddings_path(), "embed-toy")?)?;
    let dict = HashtagDictionary::build(&records, &embeddings)?;
    emb_io::write_dictionary(&ws.path(DICTIONARY), &dict)?;
    Ok(summary(
        "centroids",
        json!({ "dim": dict.dim(), "hashtags": dict.len(), "records": records.len(), "digest": dict.digest() }),
    ))
}

pub fn thesaurus(config: &RunConfig, k: usize) -> Result<Value> {
    let ws = Workspace::new(config)?;
    let dict: HashtagDictionary<f64> =
        emb_io::read_dictionary(&ws.require(ws.path(DICTIONARY), "centroids")?)?;
    let t = build_thesaurus_with(
        &dict,
        k,
        None,
        ThesaurusOptions {
            max_distance: config.max_distance,
        },
    );
    t.save(&ws.path(THESAURUS))?;
    let truncated = t.iter().filter(|(_, l)| l.is_truncated()).count();
    Ok(summary(
        "thesaurus",
        json!({ "k": k, "entries": t.len(), "truncated": truncated, "digest": t.digest() }),
    ))
}

/// Recommendations for every test tweet at each `r`, written as eval pairs.
pub fn recommend(config: &RunConfig, r_values: &[usize]) -> Result<Value> {
    let ws = Workspace::new(config)?;
    let train = corpus::read_clean_tweets(&ws.require(ws.path(TRAIN), "preprocess")?)?;
    let test = corpus::read_clean_tweets(&ws.require(ws.path(TEST), "preprocess")?)?;
    let words: WordVectors<f64> =
        emb_io::read_word_vectors(&ws.require(ws.words_path(), "embed-toy")?)?;
    let scope = if config.global_popularity {
        PopularityScope::Global
    } else {
        PopularityScope::SelectedSet
    };
    let model = RecommenderModel::train(&train, words, config.threshold)?.with_scope(scope);

    let mut outputs = BTreeMap::new();
    for &r in r_values {
        if r == 0 {
            return Err(Error::Domain("top-r must be positive".into()));
        }
        let pairs: Vec<_> = test
            .par_iter()
            .map(|t| model.recommend_pair(t, r))
            .collect();
        let empty = pairs.iter().filter(|p| p.recommended.is_empty()).count();
        metrics::write_pairs(&ws.path(&recommendations_file(r)), &pairs)?;
        outputs.insert(
            r.to_string(),
            json!({ "pairs": pairs.len(), "empty": empty }),
        );
    }
    Ok(summary(
        "recommend",
        json!({
            "threshold": config.threshold,
            "train": train.len(),
            "unusable_train": model.unusable_training_tweets(),
            "by_r": outputs,
        }),
    ))
}

fn load_thesaurus(ws: &Workspace, k: usize) -> Result<Thesaurus> {
    let t = Thesaurus::load(&ws.require(ws.path(THESAURUS), "thesaurus")?)?;
    if t.k() < k {
        return Err(Error::Domain(format!(
            "{} was built with k = {}, need k >= {k} (rerun `thesaurus`)",
            ws.path(THESAURUS).display(),
            t.k()
        )));
    }
    Ok(t)
}

/// Scores one recommendation file at one `k`.
pub fn evaluate(
    config: &RunConfig,
    k: usize,
    r: usize,
    pairs_path: Option<&Path>,
    per_pair: bool,
) -> Result<EvalReport> {
    let ws = Workspace::new(config)?;
    let thesaurus = load_thesaurus(&ws, k)?;
    let pairs_path = match pairs_path {
        Some(p) => p.to_path_buf(),
        None => ws.require(ws.path(&recommendations_file(r)), "recommend")?,
    };
    let pairs = metrics::read_pairs(&pairs_path)?;
    let report = metrics::evaluate_with(&pairs, &thesaurus, k, per_pair)?.with_top_r(r);
    let out = ws.path(&report_file(k, r));
    std::fs::write(&out, report.to_json() + "\n").map_err(|e| Error::io(&out, e))?;
    Ok(report)
}

/// Runs every `(r, k)` combination. Stages whose artifacts are missing are
/// built first; with an input corpus configured, everything is rebuilt.
pub fn sweep(config: &RunConfig) -> Result<(Vec<EvalReport>, Vec<Value>)> {
    let ws = Workspace::new(config)?;
    let mut stages = Vec::new();
    let rebuild = config.input.is_some();
    let missing = |name: &str| !ws.path(name).exists();

    if rebuild {
        stages.push(preprocess(config)?);
    }
    let need_embeddings = config.embeddings.is_none() && (rebuild || missing(EMBEDDINGS));
    let need_words = config.words.is_none() && (rebuild || missing(WORDS));
    if need_embeddings || need_words {
        stages.push(embed_toy(config)?);
    }
    if rebuild || missing(DICTIONARY) {
        stages.push(centroids(config)?);
    }
    let max_k = config.max_k();
    let stale = Thesaurus::load(&ws.path(THESAURUS))
        .map(|t| t.k() < max_k)
        .unwrap_or(true);
    if rebuild || stale {
        stages.push(thesaurus(config, max_k)?);
    }
    let absent: Vec<usize> = config
        .r_values
        .iter()
        .copied()
        .filter(|&r| rebuild || missing(&recommendations_file(r)))
        .collect();
    if !absent.is_empty() {
        stages.push(recommend(config, &absent)?);
    }

    // one thesaurus at max k, cut per k
    let thesaurus = load_thesaurus(&ws, max_k)?;
    let mut reports = Vec::new();
    for &r in &config.r_values {
        let pairs = metrics::read_pairs(&ws.path(&recommendations_file(r)))?;
        for &k in &config.k_values {
            reports.push(metrics::evaluate(&pairs, &thesaurus, k)?.with_top_r(r));
        }
    }
    let mut csv = String::from(EvalReport::CSV_HEADER);
    csv.push('\n');
    for report in &reports {
        csv.push_str(&report.csv_row());
        csv.push('\n');
    }
    let out = ws.path(SWEEP);
    std::fs::write(&out, csv).map_err(|e| Error::io(&out, e))?;
    config.save(&ws.path(CONFIG))?;
    stages.push(summary(
        "sweep",
        json!({ "rows": reports.len(), "csv": path_str(&out) }),
    ));
    Ok((reports, stages))
}
