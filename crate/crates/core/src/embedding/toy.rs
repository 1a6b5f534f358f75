//! Deterministic stand-in for a learned tweet encoder. Each token maps to a
//! pseudo-random unit vector derived from a hash of (seed, token); a text is
//! the normalized mean of its token vectors. Texts with overlapping
//! vocabulary therefore land close together.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::EmbeddingVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyEmbedder {
    dim: usize,
    seed: u64,
}

impl ToyEmbedder {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!(
                "toy embedding dimension must be at least 2, got {dim}"
            )));
        }
        Ok(ToyEmbedder { dim, seed })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn raw_token_vector(&self, token: &str) -> Vec<f64> {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(token.as_bytes());
        let mut rng = ChaCha8Rng::from_seed(hasher.finalize().into());
        let mut values: Vec<f64> = (0..self.dim)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let norm = values.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut values {
            *x /= norm;
        }
        values
    }

    /// Unit vector for a single token.
    pub fn token_vector<T: Scalar>(&self, token: &str) -> EmbeddingVector<T> {
        EmbeddingVector {
            values: self
                .raw_token_vector(token)
                .into_iter()
                .map(T::of)
                .collect(),
        }
    }

    /// Normalized mean of the whitespace tokens' vectors.
    pub fn embed<T: Scalar>(&self, text: &str) -> Result<EmbeddingVector<T>> {
        let mut sum = vec![0.0f64; self.dim];
        let mut tokens = 0usize;
        for token in text.split_whitespace() {
            for (s, x) in sum.iter_mut().zip(self.raw_token_vector(token)) {
                *s += x;
            }
            tokens += 1;
        }
        if tokens == 0 {
            return Err(Error::Domain("cannot embed a text with no tokens".into()));
        }
        let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Degenerate(format!(
                "token vectors of {text:?} cancel out"
            )));
        }
        Ok(EmbeddingVector {
            values: sum.into_iter().map(|x| T::of(x / norm)).collect(),
        })
    }
}

pub fn toy_embed<T: Scalar>(text: &str, dim: usize, seed: u64) -> Result<EmbeddingVector<T>> {
    ToyEmbedder::new(dim, seed)?.embed(text)
}
