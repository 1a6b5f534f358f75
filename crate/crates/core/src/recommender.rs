//! Baseline tweet-similarity recommender.
//!
//! Tweets are encoded as the mean of their word vectors (MOWE). For a test
//! tweet, every training tweet with cosine similarity at or above a threshold
//! is selected; the hashtags of the selected tweets are ranked by popularity
//! and the top `r` are returned. Fewer than `r` (possibly none) come back when
//! few training tweets pass the threshold.

use std::borrow::Cow;
use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap};

use crate::corpus::CleanTweet;
use crate::embedding::{EmbeddingVector, ToyEmbedder};
use crate::error::{Error, Result};
use crate::hashtag::Hashtag;
use crate::metrics::EvalPair;
use crate::scalar::Scalar;

/// Token-to-vector vocabulary loaded from a word-vector file.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors<T> {
    dim: usize,
    vectors: BTreeMap<String, EmbeddingVector<T>>,
}

impl<T: Scalar> WordVectors<T> {
    pub fn new(dim: usize) -> Self {
        WordVectors {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, token: String, vector: EmbeddingVector<T>) -> Result<()> {
        if vector.dim() != self.dim {
            return Err(Error::Domain(format!(
                "word vector for {token:?} has dimension {}, expected {}",
                vector.dim(),
                self.dim
            )));
        }
        self.vectors.insert(token, vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingVector<T>)> {
        self.vectors.iter().map(|(t, v)| (t.as_str(), v))
    }

    /// Vocabulary of `texts` with vectors from the toy embedder.
    pub fn toy<'a>(texts: impl IntoIterator<Item = &'a str>, embedder: &ToyEmbedder) -> Self {
        let mut words = WordVectors::new(embedder.dim());
        for text in texts {
            for token in text.split_whitespace() {
                if !words.vectors.contains_key(token) {
                    words
                        .vectors
                        .insert(token.to_string(), embedder.token_vector(token));
                }
            }
        }
        words
    }
}

/// Source of word vectors for MOWE.
pub trait TokenVectors<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn vector(&self, token: &str) -> Option<Cow<'_, EmbeddingVector<T>>>;
}

impl<T: Scalar> TokenVectors<T> for WordVectors<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn vector(&self, token: &str) -> Option<Cow<'_, EmbeddingVector<T>>> {
        self.vectors.get(token).map(Cow::Borrowed)
    }
}

impl<T: Scalar> TokenVectors<T> for ToyEmbedder {
    fn dim(&self) -> usize {
        ToyEmbedder::dim(self)
    }

    fn vector(&self, token: &str) -> Option<Cow<'_, EmbeddingVector<T>>> {
        Some(Cow::Owned(self.token_vector(token)))
    }
}

/// Mean of the word vectors of the tokens in `text` that have one. `None`
/// when no token is covered.
pub fn mowe<T: Scalar>(text: &str, words: &impl TokenVectors<T>) -> Option<EmbeddingVector<T>> {
    let mut sum = vec![T::zero(); words.dim()];
    let mut covered = 0usize;
    for token in text.split_whitespace() {
        if let Some(v) = words.vector(token) {
            for (s, &x) in sum.iter_mut().zip(v.values()) {
                *s = *s + x;
            }
            covered += 1;
        }
    }
    if covered == 0 {
        return None;
    }
    let n = T::of(covered as f64);
    EmbeddingVector::new(sum.into_iter().map(|s| s / n).collect()).ok()
}

fn content_words(text: &str) -> String {
    text.split_whitespace()
        .filter(|t| !t.starts_with('#'))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PopularityScope {
    /// Count of selected similar tweets carrying the hashtag.
    #[default]
    SelectedSet,
    /// Count of all training tweets carrying the hashtag.
    Global,
}

struct TrainTweet<T> {
    vector: EmbeddingVector<T>,
    norm: T,
    hashtags: Vec<Hashtag>,
}

pub struct RecommenderModel<T, W> {
    train: Vec<TrainTweet<T>>,
    words: W,
    threshold: T,
    scope: PopularityScope,
    global: HashMap<Hashtag, usize>,
    unusable: usize,
}

impl<T: Scalar, W: TokenVectors<T>> RecommenderModel<T, W> {
    /// Encodes the training tweets. Hashtag tokens are excluded from the
    /// encoding; a tweet none of whose words has a vector cannot be selected.
    pub fn train(tweets: &[CleanTweet], words: W, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Domain(format!(
                "similarity threshold {threshold} outside [0, 1]"
            )));
        }
        let mut global: HashMap<Hashtag, usize> = HashMap::new();
        let mut train = Vec::with_capacity(tweets.len());
        let mut unusable = 0;
        for t in tweets {
            for h in &t.hashtags {
                *global.entry(h.clone()).or_default() += 1;
            }
            match mowe(&content_words(&t.text), &words) {
                Some(vector) if !vector.is_zero() => train.push(TrainTweet {
                    norm: vector.norm(),
                    vector,
                    hashtags: t.hashtags.clone(),
                }),
                _ => unusable += 1,
            }
        }
        Ok(RecommenderModel {
            train,
            words,
            threshold: T::of(threshold),
            scope: PopularityScope::default(),
            global,
            unusable,
        })
    }

    pub fn with_scope(mut self, scope: PopularityScope) -> Self {
        self.scope = scope;
        self
    }

    /// Training tweets without any covered word.
    pub fn unusable_training_tweets(&self) -> usize {
        self.unusable
    }

    /// Hashtags of the training tweets similar to `text`, with the number of
    /// selected tweets carrying each.
    pub fn candidates(&self, text: &str) -> BTreeMap<Hashtag, usize> {
        let mut counts = BTreeMap::new();
        let Some(query) = mowe(&content_words(text), &self.words) else {
            return counts;
        };
        let qn = query.norm();
        if qn.is_zero() {
            return counts;
        }
        for t in &self.train {
            let similarity = query.dot(&t.vector) / (qn * t.norm);
            if similarity >= self.threshold {
                for h in &t.hashtags {
                    *counts.entry(h.clone()).or_default() += 1;
                }
            }
        }
        counts
    }

    /// Top-`r` hashtags for a test tweet, most popular first. Ties go to the
    /// more frequent hashtag in the whole training set, then to the
    /// lexicographically smaller one.
    pub fn recommend(&self, text: &str, r: usize) -> Vec<Hashtag> {
        let global = |h: &Hashtag| self.global.get(h).copied().unwrap_or(0);
        let mut ranked: Vec<(Hashtag, usize)> = self.candidates(text).into_iter().collect();
        match self.scope {
            PopularityScope::SelectedSet => {
                ranked.sort_by_key(|(h, local)| (Reverse(*local), Reverse(global(h))))
            }
            PopularityScope::Global => ranked.sort_by_key(|(h, _)| Reverse(global(h))),
        }
        // candidates arrive in lexicographic order and the sort is stable
        ranked.into_iter().take(r).map(|(h, _)| h).collect()
    }

    /// Evaluation pair for a test tweet: its recommendations against its own
    /// hashtags.
    pub fn recommend_pair(&self, tweet: &CleanTweet, r: usize) -> EvalPair {
        EvalPair::new(
            tweet.id.clone(),
            self.recommend(&tweet.text, r),
            tweet.hashtags.clone(),
        )
    }
}
