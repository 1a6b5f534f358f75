mod common;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use reval::embedding::EmbeddingVector;
use reval::hashtag::tag;
use reval::metrics::reval_hit_ratio;
use reval::recommender::mowe;
use reval::{build_thesaurus, construct_synonyms, hit_ratio, Dictionary, Words};

#[test]
fn knn_matches_exhaustive_scan_with_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (m, dim) in [(10, 2), (60, 16), (300, 8)] {
        let dict = random_dictionary(&mut rng, m, dim, true);
        for k in [0, 1, 5, 70] {
            for h in dict.hashtags() {
                let got = construct_synonyms(h, k, &dict).unwrap();
                assert_eq!(
                    list_pairs(&got),
                    exhaustive_neighbors(&dict, h, k),
                    "m={m} dim={dim} k={k} {h}"
                );
                assert_eq!(got.neighbors().len(), k.min(m - 1));
            }
        }
    }
}

#[test]
fn thesaurus_of_random_centroids_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let dict = random_dictionary(&mut rng, 500, 16, false);
    let thesaurus = build_thesaurus(&dict, 70, None);
    assert_eq!(thesaurus.len(), 500);
    for (h, list) in thesaurus.iter() {
        assert_eq!(list_pairs(list), exhaustive_neighbors(&dict, h, 70));
    }
}

#[test]
fn lists_nest_in_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let dict = random_dictionary(&mut rng, 80, 4, true);
    for h in dict.hashtags() {
        let mut previous = construct_synonyms(h, 0, &dict).unwrap();
        for k in 1..=80 {
            let next = construct_synonyms(h, k, &dict).unwrap();
            assert!(
                next.neighbors().starts_with(previous.neighbors()),
                "{h} k={k}"
            );
            previous = next;
        }
    }
}

#[test]
fn batch_build_matches_naive_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (records, embeddings) = random_records(&mut rng, 50, 5, 32);
    let dict = Dictionary::build(&records, &embeddings).unwrap();
    let expected = naive_centroids(&records, &embeddings);
    assert_eq!(dict.len(), expected.len());
    for (h, (direction, n)) in &expected {
        let c = dict.get(h).unwrap();
        assert_eq!(c.count(), *n);
        assert!(
            relative_error(c.direction().values(), direction) < 1e-12,
            "{h}"
        );
    }
}

#[test]
fn incremental_updates_match_batch_build() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..100 {
        let (records, embeddings) = random_records(&mut rng, 20, 4, 16);
        let batch = Dictionary::build(&records, &embeddings).unwrap();
        for _ in 0..5 {
            let mut order = records.clone();
            order.shuffle(&mut rng);
            let mut inc = Dictionary::new(16);
            for rec in &order {
                inc.update(&rec.hashtag, embeddings.get(rec.tweet_index).unwrap())
                    .unwrap();
            }
            for (h, c) in batch.iter() {
                let other = inc.get(h).unwrap();
                assert_eq!(other.count(), c.count());
                assert!(relative_error(other.direction().values(), c.direction().values()) <= 1e-9);
            }
        }
    }
}

#[test]
fn reval_matches_straight_line_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let vocab = vocabulary(40);
    let thesaurus = random_thesaurus(&mut rng, &vocab, 10);
    let mut scored = 0;
    for i in 0..1000 {
        let pair = random_pair(&mut rng, &vocab, 8, true);
        let k = i % 11;
        let got = reval_hit_ratio(&pair, &thesaurus, k)
            .unwrap()
            .map(|m| (m.rho, m.denominator));
        assert_eq!(
            got,
            oracle_ratio(&pair.recommended, &pair.ground_truth, &thesaurus, k),
            "{pair:?} k={k}"
        );
        scored += got.is_some() as usize;
    }
    assert!(scored > 700, "{scored}");
}

#[test]
fn k_zero_is_exact_hit_ratio() {
    let thesaurus = footnote_thesaurus();
    let r = tags(&["#hockey", "#championship"]);
    let g = tags(&["#football", "#sport"]);
    let exact = hit_ratio(&r, &g).unwrap();
    assert_eq!(exact.rho, 0);
    let pair = reval::EvalPair::new("t", r, g);
    assert_eq!(
        reval_hit_ratio(&pair, &thesaurus, 0).unwrap().unwrap().rho,
        0
    );
    assert_eq!(
        reval_hit_ratio(&pair, &thesaurus, 3).unwrap().unwrap().rho,
        1
    );
}

#[test]
fn mowe_matches_naive_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut words = Words::new(6);
    let vocab: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    for w in &vocab {
        words
            .insert(
                w.clone(),
                EmbeddingVector::new(gaussian(&mut rng, 6)).unwrap(),
            )
            .unwrap();
    }
    for _ in 0..200 {
        let n = rand::Rng::random_range(&mut rng, 1..12);
        let tokens: Vec<String> = (0..n)
            .map(|_| match rand::Rng::random_range(&mut rng, 0..35) {
                i if i < 30 => vocab[i].clone(),
                i => format!("unknown{i}"),
            })
            .collect();
        let text = tokens.join(" ");
        let covered: Vec<&[f64]> = tokens
            .iter()
            .filter_map(|t| words.iter().find(|(w, _)| w == t).map(|(_, v)| v.values()))
            .collect();
        let got = mowe(&text, &words);
        if covered.is_empty() {
            assert!(got.is_none());
            continue;
        }
        let mut expected = vec![0.0; 6];
        for v in &covered {
            for (e, x) in expected.iter_mut().zip(*v) {
                *e += x;
            }
        }
        for e in &mut expected {
            *e /= covered.len() as f64;
        }
        assert!(
            relative_error(got.unwrap().values(), &expected) < 1e-12,
            "{text}"
        );
    }
}

#[test]
fn asymmetric_lists_are_representable() {
    let thesaurus = footnote_thesaurus();
    let contains = |head: &str, h: &str| {
        thesaurus
            .synonyms(&tag(head), 3)
            .unwrap()
            .any(|s| *s == tag(h))
    };
    assert!(contains("#swim", "#sport"));
    assert!(!contains("#sport", "#swim"));
}
