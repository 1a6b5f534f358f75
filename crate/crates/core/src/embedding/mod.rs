//! Tweet embeddings and the hashtag centroid dictionary.
//!
//! A hashtag's embedding is the unit-normalized mean of the embeddings of all
//! tweets carrying it. The dictionary keeps the unnormalized running sum and
//! the tweet count per hashtag, so adding a tweet later gives exactly the
//! centroid a full rebuild would.

pub mod io;
mod toy;

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::corpus::CorpusRecord;
use crate::error::{Error, Result};
use crate::hashtag::Hashtag;
use crate::scalar::Scalar;

pub use toy::{toy_embed, ToyEmbedder};

/// Fixed-dimension real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> EmbeddingVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("embedding dimension must be positive".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("embedding entry {i} is not finite")));
        }
        Ok(EmbeddingVector { values })
    }

    pub fn zeros(dim: usize) -> Self {
        EmbeddingVector {
            values: vec![T::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Unit vector in the same direction.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm.is_zero() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Ok(self.scaled(T::one() / norm))
    }

    pub fn scaled(&self, factor: T) -> Self {
        EmbeddingVector {
            values: self.values.iter().map(|&v| v * factor).collect(),
        }
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a = *a + b;
        }
    }

    pub fn cast<U: Scalar>(&self) -> EmbeddingVector<U> {
        EmbeddingVector {
            values: self.values.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::Domain(format!(
                "dimension mismatch: expected {dim}, got {}",
                self.dim()
            )));
        }
        Ok(())
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for EmbeddingVector<T> {
    type Error = Error;

    fn try_from(values: Vec<T>) -> Result<Self> {
        EmbeddingVector::new(values)
    }
}

/// `1 - cos(θ)` between two nonzero vectors, in `[0, 2]`.
pub fn cosine_distance<T: Scalar>(a: &EmbeddingVector<T>, b: &EmbeddingVector<T>) -> Result<T> {
    a.check_dim(b.dim())?;
    let (na, nb) = (a.norm(), b.norm());
    if na.is_zero() || nb.is_zero() {
        return Err(Error::Domain("cosine distance of a zero vector".into()));
    }
    Ok(cosine_distance_with_norms(a, b, na, nb))
}

/// Same arithmetic as [`cosine_distance`] with the norms supplied by the caller,
/// so cached norms give bit-identical distances.
pub(crate) fn cosine_distance_with_norms<T: Scalar>(
    a: &EmbeddingVector<T>,
    b: &EmbeddingVector<T>,
    na: T,
    nb: T,
) -> T {
    let d = T::one() - a.dot(b) / (na * nb);
    d.max(T::zero()).min(T::one() + T::one())
}

/// Sum of vectors by recursive halving.
fn pairwise_sum<T: Scalar>(vectors: &[&EmbeddingVector<T>], dim: usize) -> EmbeddingVector<T> {
    if vectors.len() <= 8 {
        let mut acc = EmbeddingVector::zeros(dim);
        for v in vectors {
            acc.add_assign(v);
        }
        return acc;
    }
    let (left, right) = vectors.split_at(vectors.len() / 2);
    let mut acc = pairwise_sum(left, dim);
    acc.add_assign(&pairwise_sum(right, dim));
    acc
}

/// Tweet embeddings keyed by tweet index.
#[derive(Debug, Clone, PartialEq)]
pub struct TweetEmbeddings<T> {
    dim: usize,
    vectors: BTreeMap<u64, EmbeddingVector<T>>,
}

impl<T: Scalar> TweetEmbeddings<T> {
    pub fn new(dim: usize) -> Self {
        TweetEmbeddings {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, tweet_index: u64, vector: EmbeddingVector<T>) -> Result<()> {
        vector.check_dim(self.dim)?;
        self.vectors.insert(tweet_index, vector);
        Ok(())
    }

    pub fn get(&self, tweet_index: u64) -> Option<&EmbeddingVector<T>> {
        self.vectors.get(&tweet_index)
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

    pub fn iter(&self) -> impl Iterator<Item = (u64, &EmbeddingVector<T>)> {
        self.vectors.iter().map(|(&i, v)| (i, v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HashtagCentroid<T> {
    running_sum: EmbeddingVector<T>,
    count: u64,
    direction: EmbeddingVector<T>,
}

impl<T: Scalar> HashtagCentroid<T> {
    /// Centroid from an accumulated sum over `count` tweets.
    pub fn from_sum(
        hashtag: &Hashtag,
        running_sum: EmbeddingVector<T>,
        count: u64,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::Domain(format!(
                "{hashtag}: tweet count must be positive"
            )));
        }
        let direction = running_sum
            .normalized()
            .map_err(|_| Error::Degenerate(format!("{hashtag}: tweet embeddings sum to zero")))?;
        Ok(HashtagCentroid {
            running_sum,
            count,
            direction,
        })
    }

    /// Unit-norm hashtag embedding.
    pub fn direction(&self) -> &EmbeddingVector<T> {
        &self.direction
    }

    pub fn running_sum(&self) -> &EmbeddingVector<T> {
        &self.running_sum
    }

    /// Number of tweets carrying the hashtag (n_h).
    pub fn count(&self) -> u64 {
        self.count
    }
}

/// How [`HashtagDictionary::update`] folds a new tweet into a centroid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UpdateRule {
    /// Accumulate the raw sum and renormalize; equal to a batch rebuild.
    #[default]
    RunningSum,
    /// Blend the stored unit direction with the new tweet using weights
    /// `n/(n+1)` and `1/(n+1)`, then renormalize. Drifts from the batch
    /// mean whenever the tweet vectors are not unit length.
    WeightedDirection,
}

/// Map from hashtag to its centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct HashtagDictionary<T> {
    dim: usize,
    entries: BTreeMap<Hashtag, HashtagCentroid<T>>,
}

impl<T: Scalar> HashtagDictionary<T> {
    pub fn new(dim: usize) -> Self {
        HashtagDictionary {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Builds every centroid from scratch. The result does not depend on
    /// record order.
    pub fn build(records: &[CorpusRecord], embeddings: &TweetEmbeddings<T>) -> Result<Self> {
        let mut groups: BTreeMap<&Hashtag, Vec<u64>> = BTreeMap::new();
        let mut pairs = HashSet::new();
        for r in records {
            if !pairs.insert((r.tweet_index, &r.hashtag)) {
                return Err(Error::Integrity(format!(
                    "duplicate record for tweet {} and {}",
                    r.tweet_index, r.hashtag
                )));
            }
            groups.entry(&r.hashtag).or_default().push(r.tweet_index);
        }

        let dim = embeddings.dim();
        let entries = groups
            .into_par_iter()
            .map(|(hashtag, mut tweets)| {
                tweets.sort_unstable();
                let vectors = tweets
                    .iter()
                    .map(|&i| {
                        embeddings.get(i).ok_or_else(|| {
                            Error::Integrity(format!(
                                "no embedding for tweet_index {i} ({hashtag})"
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let sum = pairwise_sum(&vectors, dim);
                let centroid = HashtagCentroid::from_sum(hashtag, sum, tweets.len() as u64)?;
                Ok((hashtag.clone(), centroid))
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(HashtagDictionary {
            dim,
            entries: entries.into_iter().collect(),
        })
    }

    /// Adds one tweet's embedding to `hashtag`, creating the entry if needed.
    pub fn update(&mut self, hashtag: &Hashtag, tweet: &EmbeddingVector<T>) -> Result<()> {
        self.update_with(hashtag, tweet, UpdateRule::RunningSum)
    }

    pub fn update_with(
        &mut self,
        hashtag: &Hashtag,
        tweet: &EmbeddingVector<T>,
        rule: UpdateRule,
    ) -> Result<()> {
        tweet.check_dim(self.dim)?;
        let Some(entry) = self.entries.get_mut(hashtag) else {
            let centroid = HashtagCentroid::from_sum(hashtag, tweet.clone(), 1)?;
            self.entries.insert(hashtag.clone(), centroid);
            return Ok(());
        };
        let n = entry.count;
        let updated = match rule {
            UpdateRule::RunningSum => {
                let mut sum = entry.running_sum.clone();
                sum.add_assign(tweet);
                HashtagCentroid::from_sum(hashtag, sum, n + 1)?
            }
            UpdateRule::WeightedDirection => {
                let total = T::of((n + 1) as f64);
                let mut blend = entry.direction.scaled(T::of(n as f64) / total);
                blend.add_assign(&tweet.scaled(T::one() / total));
                let direction = blend.normalized().map_err(|_| {
                    Error::Degenerate(format!("{hashtag}: update cancels the centroid"))
                })?;
                HashtagCentroid {
                    running_sum: direction.scaled(total),
                    count: n + 1,
                    direction,
                }
            }
        };
        *entry = updated;
        Ok(())
    }

    /// Inserts a centroid directly (used when loading from disk).
    pub fn insert(&mut self, hashtag: Hashtag, centroid: HashtagCentroid<T>) -> Result<()> {
        centroid.running_sum.check_dim(self.dim)?;
        self.entries.insert(hashtag, centroid);
        Ok(())
    }

    pub fn get(&self, hashtag: &Hashtag) -> Option<&HashtagCentroid<T>> {
        self.entries.get(hashtag)
    }

    pub fn contains(&self, hashtag: &Hashtag) -> bool {
        self.entries.contains_key(hashtag)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct hashtags (m).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in lexicographic hashtag order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&Hashtag, &HashtagCentroid<T>)> {
        self.entries.iter()
    }

    pub fn hashtags(&self) -> impl Iterator<Item = &Hashtag> {
        self.entries.keys()
    }

    /// SHA-256 over hashtags, counts and running sums, hex encoded.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dim as u64).to_le_bytes());
        for (h, c) in &self.entries {
            hasher.update(h.as_str().as_bytes());
            hasher.update([0u8]);
            hasher.update(c.count.to_le_bytes());
            for v in c.running_sum.values() {
                hasher.update(v.as_f64().to_bits().to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }
}
