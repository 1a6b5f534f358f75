//! Planted-cluster corpora with known synonym structure.
//!
//! Each cluster owns a private vocabulary and a family of hashtag variants
//! (think `#covid`, `#covid19`, `#coronavirus`). Tweets draw their words from
//! one cluster and their hashtags from that cluster's family, with a skewed
//! popularity so that one variant dominates. Variants of a family are
//! synonyms by construction.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::RawTweet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedCorpus {
    pub clusters: usize,
    pub hashtags_per_cluster: usize,
    pub words_per_cluster: usize,
    pub shared_words: usize,
    pub tweets_per_cluster: usize,
    pub words_per_tweet: usize,
    pub max_hashtags_per_tweet: usize,
    pub seed: u64,
}

impl Default for PlantedCorpus {
    fn default() -> Self {
        PlantedCorpus {
            clusters: 10,
            hashtags_per_cluster: 6,
            words_per_cluster: 10,
            shared_words: 20,
            tweets_per_cluster: 60,
            words_per_tweet: 8,
            max_hashtags_per_tweet: 2,
            seed: 7,
        }
    }
}

impl PlantedCorpus {
    pub fn hashtag(cluster: usize, variant: usize) -> String {
        format!("#topic{cluster}v{variant}")
    }

    /// Cluster a generated hashtag belongs to.
    pub fn cluster_of(hashtag: &str) -> Option<usize> {
        hashtag
            .strip_prefix("#topic")?
            .split('v')
            .next()?
            .parse()
            .ok()
    }

    pub fn generate(&self) -> Vec<RawTweet> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let shared: Vec<String> = (0..self.shared_words)
            .map(|i| format!("common{i}"))
            .collect();
        // variant j is drawn with weight 1/(j+1)
        let popularity =
            WeightedIndex::new((0..self.hashtags_per_cluster).map(|j| 1.0 / (j + 1) as f64))
                .expect("at least one hashtag per cluster");

        let mut tweets = Vec::with_capacity(self.clusters * self.tweets_per_cluster);
        for n in 0..self.tweets_per_cluster {
            for c in 0..self.clusters {
                let vocab: Vec<String> = (0..self.words_per_cluster)
                    .map(|j| format!("c{c}word{j}"))
                    .collect();
                let mut words: Vec<&str> = (0..self.words_per_tweet)
                    .map(|_| {
                        vocab
                            .choose(&mut rng)
                            .expect("non-empty vocabulary")
                            .as_str()
                    })
                    .collect();
                if !shared.is_empty() && rng.random_bool(0.5) {
                    let i = rng.random_range(0..words.len());
                    words[i] = shared.choose(&mut rng).expect("non-empty").as_str();
                }
                let tag_count = rng.random_range(1..=self.max_hashtags_per_tweet.max(1));
                let mut tags: Vec<String> = Vec::new();
                for _ in 0..tag_count {
                    let t = Self::hashtag(c, popularity.sample(&mut rng));
                    if !tags.contains(&t) {
                        tags.push(t);
                    }
                }
                tweets.push(RawTweet {
                    id: format!("s{c}-{n}"),
                    text: format!("{} {}", words.join(" "), tags.join(" ")),
                    is_retweet: false,
                });
            }
        }
        tweets
    }
}
