use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use reval::pipeline;
use reval::{Result, RunConfig};

#[derive(Parser)]
#[command(
    name = "reval",
    version,
    about = "Synonym-aware evaluation of hashtag recommendations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean a raw JSONL corpus, explode it into records and split it.
    Preprocess(Shared),
    /// Toy tweet embeddings and word vectors (no model needed).
    EmbedToy(Shared),
    /// Hashtag centroids from records and tweet embeddings.
    Centroids(Shared),
    /// kNN synonym thesaurus over the centroids.
    Thesaurus(Shared),
    /// Baseline recommendations for the test split.
    Recommend(Shared),
    /// Average synonym-aware hit ratio of one recommendation file.
    Evaluate {
        #[command(flatten)]
        shared: Shared,
        /// Eval-pairs file (default: the `recommend` output for --top-r).
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Include per-pair results in the report.
        #[arg(long)]
        per_pair: bool,
    },
    /// Evaluate every (top-r, k) combination and write a CSV.
    Sweep(Shared),
}

#[derive(Args, Default)]
struct Shared {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output (work) directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Raw JSONL corpus.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Stopword list, one word per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// External tweet-embedding file to use instead of the toy embeddings.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// External word-vector file for the recommender.
    #[arg(long)]
    words: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Synonym counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Recommendation list lengths, comma separated.
    #[arg(long = "top-r", value_delimiter = ',')]
    top_r: Option<Vec<usize>>,
    /// Cosine similarity cut-off for the recommender.
    #[arg(long)]
    threshold: Option<f64>,
    /// Drop thesaurus neighbours farther than this cosine distance.
    #[arg(long)]
    max_distance: Option<f64>,
    #[arg(long)]
    split_fraction: Option<f64>,
    /// Keep long runs of repeated characters.
    #[arg(long)]
    keep_repeats: bool,
    /// Rank hashtags by training-set popularity instead of within the
    /// similar tweets.
    #[arg(long)]
    global_popularity: bool,
}

impl Shared {
    fn resolve(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident <- $flag:expr),* $(,)?) => {
                $(if let Some(v) = $flag { c.$field = v; })*
            };
        }
        set!(
            out <- self.out,
            seed <- self.seed,
            dim <- self.dim,
            k_values <- self.k,
            r_values <- self.top_r,
            threshold <- self.threshold,
            split_fraction <- self.split_fraction,
        );
        if self.input.is_some() {
            c.input = self.input;
        }
        if self.stopwords.is_some() {
            c.stopwords = self.stopwords;
        }
        if self.embeddings.is_some() {
            c.embeddings = self.embeddings;
        }
        if self.words.is_some() {
            c.words = self.words;
        }
        if self.max_distance.is_some() {
            c.max_distance = self.max_distance;
        }
        if self.keep_repeats {
            c.truncate_repeats = false;
        }
        if self.global_popularity {
            c.global_popularity = true;
        }
        c.validated()
    }
}

fn emit(value: &Value) {
    println!(
        "{}",
        serde_json::to_string(value).expect("summary serializes")
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(s) => emit(&pipeline::preprocess(&s.resolve()?)?),
        Command::EmbedToy(s) => emit(&pipeline::embed_toy(&s.resolve()?)?),
        Command::Centroids(s) => emit(&pipeline::centroids(&s.resolve()?)?),
        Command::Thesaurus(s) => {
            let c = s.resolve()?;
            emit(&pipeline::thesaurus(&c, c.max_k())?)
        }
        Command::Recommend(s) => {
            let c = s.resolve()?;
            emit(&pipeline::recommend(&c, &c.r_values)?)
        }
        Command::Evaluate {
            shared,
            pairs,
            per_pair,
        } => {
            let c = shared.resolve()?;
            for &r in &c.r_values {
                for &k in &c.k_values {
                    let report = pipeline::evaluate(&c, k, r, pairs.as_deref(), per_pair)?;
                    let mut v = serde_json::to_value(&report).expect("report serializes");
                    v["stage"] = "evaluate".into();
                    emit(&v);
                }
            }
        }
        Command::Sweep(s) => {
            let (_, stages) = pipeline::sweep(&s.resolve()?)?;
            for stage in &stages {
                emit(stage);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
