//! Fixtures and straight-line oracles shared by the integration tests. The
//! oracles avoid the library's own helpers wherever they can.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use reval::embedding::EmbeddingVector;
use reval::hashtag::tag;
use reval::thesaurus::Neighbor;
use reval::{CorpusRecord, Dictionary, EvalPair, Hashtag, SynonymList, Thesaurus, TweetVectors};

/// The six synonym lists of the worked examples, head first, at distances
/// 0.1, 0.2 and 0.3.
pub const FOOTNOTE: [[&str; 4]; 6] = [
    ["#hockey", "#bowling", "#golf", "#sport"],
    ["#championship", "#champion", "#winner", "#tournament"],
    ["#football", "#soccer", "#footy", "#rugby"],
    ["#sport", "#sports", "#exercise", "#keeepfit"],
    ["#swim", "#dive", "#paddle", "#sport"],
    ["#exercise", "#keeepfit", "#yoga", "#walking"],
];

pub fn footnote_thesaurus() -> Thesaurus {
    let lists = FOOTNOTE.iter().map(|row| {
        let neighbors = row[1..]
            .iter()
            .zip([0.1, 0.2, 0.3])
            .map(|(h, d)| Neighbor {
                hashtag: tag(h),
                distance: d,
            })
            .collect();
        SynonymList::new(tag(row[0]), neighbors, 3).unwrap()
    });
    Thesaurus::from_lists(3, lists).unwrap()
}

pub fn tags(raw: &[&str]) -> Vec<Hashtag> {
    raw.iter().map(|h| tag(h)).collect()
}

pub fn vocabulary(n: usize) -> Vec<Hashtag> {
    (0..n).map(|i| tag(&format!("#t{i:03}"))).collect()
}

pub fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Dictionary of `m` random centroids. With `duplicates`, about a tenth of
/// the hashtags copy an earlier direction so that exact distance ties occur.
pub fn random_dictionary(
    rng: &mut ChaCha8Rng,
    m: usize,
    dim: usize,
    duplicates: bool,
) -> Dictionary {
    let mut dict = Dictionary::new(dim);
    let mut directions: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, h) in vocabulary(m).into_iter().enumerate() {
        let v = if duplicates && i > 0 && rng.random_bool(0.1) {
            directions[rng.random_range(0..i)].clone()
        } else {
            gaussian(rng, dim)
        };
        directions.push(v.clone());
        dict.update(&h, &EmbeddingVector::new(v).unwrap()).unwrap();
    }
    dict
}

fn plain_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..a.len() {
        ab += a[i] * b[i];
    }
    for x in a {
        aa += x * x;
    }
    for x in b {
        bb += x * x;
    }
    (1.0 - ab / (aa.sqrt() * bb.sqrt())).clamp(0.0, 2.0)
}

/// Exhaustive kNN: every distance computed, everything sorted.
pub fn exhaustive_neighbors(dict: &Dictionary, query: &Hashtag, k: usize) -> Vec<(Hashtag, f64)> {
    let q = dict.get(query).unwrap().direction().values();
    let mut all: Vec<(Hashtag, f64)> = dict
        .iter()
        .filter(|(h, _)| *h != query)
        .map(|(h, c)| (h.clone(), plain_distance(q, c.direction().values())))
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub fn list_pairs(list: &SynonymList) -> Vec<(Hashtag, f64)> {
    list.neighbors()
        .iter()
        .map(|n| (n.hashtag.clone(), n.distance))
        .collect()
}

/// Thesaurus whose lists are random permutations of the vocabulary, so
/// nesting holds by construction. Some vocabulary hashtags get no entry.
pub fn random_thesaurus(rng: &mut ChaCha8Rng, vocab: &[Hashtag], k: usize) -> Thesaurus {
    let mut lists = Vec::new();
    for head in vocab {
        if !rng.random_bool(0.85) {
            continue;
        }
        let mut others: Vec<&Hashtag> = vocab.iter().filter(|h| *h != head).collect();
        others.shuffle(rng);
        let neighbors = others
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, h)| Neighbor {
                hashtag: h.clone(),
                distance: (i + 1) as f64 * 1e-3,
            })
            .collect();
        lists.push(SynonymList::new(head.clone(), neighbors, k).unwrap());
    }
    Thesaurus::from_lists(k, lists).unwrap()
}

pub fn random_pair(
    rng: &mut ChaCha8Rng,
    vocab: &[Hashtag],
    max_len: usize,
    allow_empty: bool,
) -> EvalPair {
    let lo = if allow_empty { 0 } else { 1 };
    let pick = |rng: &mut ChaCha8Rng| -> Vec<Hashtag> {
        let n = rng.random_range(lo..=max_len);
        (0..n)
            .map(|_| vocab[rng.random_range(0..vocab.len())].clone())
            .collect()
    };
    let r = pick(rng);
    let g = pick(rng);
    EvalPair::new("fuzz", r, g)
}

/// Synonym-aware hit ratio written out directly from its definition:
/// returns `(rho, denominator)`, or `None` for a pair with an empty side.
pub fn oracle_ratio(
    recommended: &[Hashtag],
    ground_truth: &[Hashtag],
    thesaurus: &Thesaurus,
    k: usize,
) -> Option<(usize, usize)> {
    let r: Vec<&Hashtag> = {
        let mut seen = HashSet::new();
        recommended.iter().filter(|h| seen.insert(*h)).collect()
    };
    let g: HashSet<&Hashtag> = ground_truth.iter().collect();
    if r.is_empty() || g.is_empty() {
        return None;
    }
    let syn = |h: &Hashtag| -> Vec<Hashtag> {
        match thesaurus.get(h) {
            Some(list) => {
                let mut out = vec![list.head().clone()];
                for n in list.neighbors().iter().take(k) {
                    out.push(n.hashtag.clone());
                }
                out
            }
            None => vec![h.clone()],
        }
    };
    let mut rho = 0;
    if r.len() <= g.len() {
        for h in &r {
            if syn(h).iter().any(|s| g.contains(s)) {
                rho += 1;
            }
        }
    } else {
        let mut expanded = HashSet::new();
        for h in &r {
            expanded.extend(syn(h));
        }
        for h in &g {
            if expanded.contains(*h) {
                rho += 1;
            }
        }
    }
    Some((rho, r.len().min(g.len())))
}

/// Random corpus of `n` tweet embeddings and hashtag assignments drawn from
/// `hashtags` labels; every tweet carries one to three distinct hashtags.
pub fn random_records(
    rng: &mut ChaCha8Rng,
    n: usize,
    hashtags: usize,
    dim: usize,
) -> (Vec<CorpusRecord>, TweetVectors) {
    let vocab = vocabulary(hashtags);
    let mut embeddings = TweetVectors::new(dim);
    let mut records = Vec::new();
    for i in 0..n as u64 {
        embeddings
            .insert(i, EmbeddingVector::new(gaussian(rng, dim)).unwrap())
            .unwrap();
        let mut chosen: Vec<&Hashtag> = vocab.iter().collect();
        chosen.shuffle(rng);
        let count = rng.random_range(1..=3.min(hashtags));
        for (j, h) in chosen.into_iter().take(count).enumerate() {
            records.push(CorpusRecord {
                tweet_index: i,
                hashtag: h.clone(),
                ordinal: j as u32 + 1,
            });
        }
    }
    (records, embeddings)
}

/// Normalized arithmetic mean per hashtag, computed naively.
pub fn naive_centroids(
    records: &[CorpusRecord],
    embeddings: &TweetVectors,
) -> BTreeMap<Hashtag, (Vec<f64>, u64)> {
    let mut sums: BTreeMap<Hashtag, (Vec<f64>, u64)> = BTreeMap::new();
    for rec in records {
        let v = embeddings.get(rec.tweet_index).unwrap().values();
        let entry = sums
            .entry(rec.hashtag.clone())
            .or_insert_with(|| (vec![0.0; v.len()], 0));
        for (s, x) in entry.0.iter_mut().zip(v) {
            *s += x;
        }
        entry.1 += 1;
    }
    for (sum, n) in sums.values_mut() {
        let mean: Vec<f64> = sum.iter().map(|s| s / *n as f64).collect();
        let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
        *sum = mean.into_iter().map(|x| x / norm).collect();
    }
    sums
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale
}
