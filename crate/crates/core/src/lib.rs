//! Semantic evaluation of hashtag recommendations.
//!
//! Exact-match metrics punish a recommender for proposing `#covid19` when the
//! tweet was tagged `#coronavirus`. This crate scores recommendations against
//! a thesaurus learned from the corpus itself:
//!
//! 1. [`corpus`]: clean tweets, extract hashtags and duplicate every tweet
//!    once per hashtag.
//! 2. [`embedding`]: embed hashtags as the unit-normalized centroid of their
//!    tweets' embeddings, with exact incremental updates.
//! 3. [`thesaurus`]: list the `k` nearest hashtags of every hashtag under
//!    cosine distance.
//! 4. [`metrics`]: count a recommended hashtag as a hit when any of its
//!    synonyms is in the ground truth. With `k = 0` this is the plain hit
//!    ratio.
//!
//! [`recommender`] holds a simple similarity-based recommender so the whole
//! chain can run on any corpus, and [`pipeline`] wires the stages together
//! through files.
//!
//! Embedding math is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the file-based pipeline uses.

pub mod config;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod hashtag;
pub mod metrics;
pub mod pipeline;
pub mod recommender;
pub mod scalar;
pub mod synth;
pub mod thesaurus;

pub use config::RunConfig;
pub use corpus::{
    clean, explode, split, CleanTweet, CorpusRecord, CorpusSplit, RawTweet, Stopwords,
};
pub use embedding::{
    cosine_distance, toy_embed, HashtagCentroid, HashtagDictionary, ToyEmbedder, TweetEmbeddings,
    UpdateRule,
};
pub use error::{Error, Result};
pub use hashtag::Hashtag;
pub use metrics::{
    evaluate, hit_ratio, match_synonyms, reval_hit_ratio, EvalPair, EvalReport, MatchResult,
};
pub use recommender::{mowe, PopularityScope, RecommenderModel, WordVectors};
pub use scalar::Scalar;
pub use thesaurus::{build_thesaurus, construct_synonyms, synonyms_of_set, SynonymList, Thesaurus};

pub type Embedding = embedding::EmbeddingVector<f64>;
pub type Embedding32 = embedding::EmbeddingVector<f32>;
pub type Dictionary = HashtagDictionary<f64>;
pub type Dictionary32 = HashtagDictionary<f32>;
pub type Centroid = HashtagCentroid<f64>;
pub type TweetVectors = TweetEmbeddings<f64>;
pub type Words = WordVectors<f64>;
