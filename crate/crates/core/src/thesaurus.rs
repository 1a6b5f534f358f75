//! Synonym lists from exact k-nearest-neighbour search over hashtag
//! centroids, and the thesaurus assembled from them.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{cosine_distance_with_norms, EmbeddingVector, HashtagDictionary};
use crate::error::{Error, Result};
use crate::hashtag::Hashtag;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub hashtag: Hashtag,
    pub distance: f64,
}

/// `Syn_k(head)`: the head hashtag plus up to `k` nearest other hashtags,
/// ascending by distance with ties in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SynonymList {
    head: Hashtag,
    neighbors: Vec<Neighbor>,
    k: usize,
}

impl SynonymList {
    pub fn new(head: Hashtag, neighbors: Vec<Neighbor>, k: usize) -> Result<Self> {
        Self::checked(head, neighbors, k, true)
    }

    // Stored distances are rounded, so two neighbors can tie on disk
    // without being in name order. The file order wins there.
    fn checked(
        head: Hashtag,
        neighbors: Vec<Neighbor>,
        k: usize,
        strict_ties: bool,
    ) -> Result<Self> {
        if neighbors.len() > k {
            return Err(Error::Domain(format!(
                "{head}: {} neighbors exceed k = {k}",
                neighbors.len()
            )));
        }
        if neighbors.iter().any(|n| n.hashtag == head) {
            return Err(Error::Domain(format!("{head} listed as its own neighbor")));
        }
        let ordered =
            neighbors
                .windows(2)
                .all(|w| match w[0].distance.partial_cmp(&w[1].distance) {
                    Some(Ordering::Less) => true,
                    Some(Ordering::Equal) => !strict_ties || w[0].hashtag < w[1].hashtag,
                    _ => false,
                });
        if !ordered {
            return Err(Error::Domain(format!(
                "{head}: neighbors not in ascending order"
            )));
        }
        Ok(SynonymList { head, neighbors, k })
    }

    pub fn head(&self) -> &Hashtag {
        &self.head
    }

    pub fn neighbors(&self) -> &[Neighbor] {
        &self.neighbors
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Fewer than `k` neighbors were available.
    pub fn is_truncated(&self) -> bool {
        self.neighbors.len() < self.k
    }

    /// Head followed by the first `k` neighbors.
    pub fn members(&self, k: usize) -> impl Iterator<Item = &Hashtag> {
        std::iter::once(&self.head).chain(self.neighbors.iter().take(k).map(|n| &n.hashtag))
    }

    pub fn contains(&self, hashtag: &Hashtag, k: usize) -> bool {
        self.members(k).any(|h| h == hashtag)
    }

    /// Same list cut down to `k` neighbors.
    pub fn truncated_to(&self, k: usize) -> SynonymList {
        SynonymList {
            head: self.head.clone(),
            neighbors: self.neighbors.iter().take(k).cloned().collect(),
            k,
        }
    }
}

/// The queried hashtag has no centroid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LookupMiss(pub Hashtag);

/// Precomputed norms over a dictionary for repeated exact kNN queries.
pub struct SynonymIndex<'a, T> {
    tags: Vec<&'a Hashtag>,
    vectors: Vec<&'a EmbeddingVector<T>>,
    norms: Vec<T>,
    positions: BTreeMap<&'a Hashtag, usize>,
    max_distance: Option<T>,
}

impl<'a, T: Scalar> SynonymIndex<'a, T> {
    pub fn new(dict: &'a HashtagDictionary<T>) -> Self {
        let (tags, vectors): (Vec<_>, Vec<_>) =
            dict.iter().map(|(h, c)| (h, c.direction())).unzip();
        let norms = vectors.iter().map(|v| v.norm()).collect();
        let positions = tags.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        SynonymIndex {
            tags,
            vectors,
            norms,
            positions,
            max_distance: None,
        }
    }

    /// Drop candidates farther than `max_distance`.
    pub fn with_max_distance(mut self, max_distance: Option<f64>) -> Self {
        self.max_distance = max_distance.map(T::of);
        self
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// The `k` nearest other hashtags to `query`. With fewer than `k`
    /// candidates all of them are returned and the list reports truncation.
    pub fn query(&self, query: &Hashtag, k: usize) -> Result<SynonymList, LookupMiss> {
        let &qi = self
            .positions
            .get(query)
            .ok_or_else(|| LookupMiss(query.clone()))?;
        let (qv, qn) = (self.vectors[qi], self.norms[qi]);

        let mut candidates: Vec<(T, usize)> = (0..self.tags.len())
            .filter(|&i| i != qi)
            .map(|i| {
                (
                    cosine_distance_with_norms(qv, self.vectors[i], qn, self.norms[i]),
                    i,
                )
            })
            .filter(|(d, _)| self.max_distance.is_none_or(|max| *d <= max))
            .collect();

        let cmp = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.tags[a.1].cmp(self.tags[b.1]))
        };
        if k < candidates.len() {
            if k > 0 {
                candidates.select_nth_unstable_by(k - 1, cmp);
            }
            candidates.truncate(k);
        }
        candidates.sort_unstable_by(cmp);

        Ok(SynonymList {
            head: query.clone(),
            neighbors: candidates
                .into_iter()
                .map(|(d, i)| Neighbor {
                    hashtag: self.tags[i].clone(),
                    distance: d.as_f64(),
                })
                .collect(),
            k,
        })
    }
}

/// Synonym list of one hashtag against a dictionary.
pub fn construct_synonyms<T: Scalar>(
    query: &Hashtag,
    k: usize,
    dict: &HashtagDictionary<T>,
) -> Result<SynonymList, LookupMiss> {
    SynonymIndex::new(dict).query(query, k)
}

/// Map from hashtag to its synonym list, all built with the same `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Thesaurus {
    k: usize,
    digest: String,
    entries: BTreeMap<Hashtag, SynonymList>,
    misses: Vec<Hashtag>,
}

impl Thesaurus {
    /// Thesaurus from ready-made lists, e.g. a hand-written fixture.
    pub fn from_lists(k: usize, lists: impl IntoIterator<Item = SynonymList>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for list in lists {
            if list.k != k {
                return Err(Error::Domain(format!(
                    "{}: list built with k = {}, expected {k}",
                    list.head, list.k
                )));
            }
            entries.insert(list.head.clone(), list);
        }
        Ok(Thesaurus {
            k,
            digest: String::new(),
            entries,
            misses: Vec::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Digest of the dictionary the thesaurus was built from (empty for
    /// hand-written thesauri).
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn get(&self, hashtag: &Hashtag) -> Option<&SynonymList> {
        self.entries.get(hashtag)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Hashtag, &SynonymList)> {
        self.entries.iter()
    }

    /// Queries that had no centroid in the source dictionary.
    pub fn misses(&self) -> &[Hashtag] {
        &self.misses
    }

    /// `Syn_k(h)` for `k` up to the thesaurus' own `k`; `None` when `h` has no
    /// entry.
    pub fn synonyms(&self, hashtag: &Hashtag, k: usize) -> Option<impl Iterator<Item = &Hashtag>> {
        self.entries
            .get(hashtag)
            .map(|list| list.members(k.min(self.k)))
    }

    /// Same thesaurus with every list cut to `k` neighbors. Valid because
    /// lists are nested in `k`.
    pub fn truncated(&self, k: usize) -> Result<Thesaurus> {
        if k > self.k {
            return Err(Error::Domain(format!(
                "cannot extend a k = {} thesaurus to k = {k}",
                self.k
            )));
        }
        Ok(Thesaurus {
            k,
            digest: self.digest.clone(),
            entries: self
                .entries
                .iter()
                .map(|(h, l)| (h.clone(), l.truncated_to(k)))
                .collect(),
            misses: self.misses.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let file = ThesaurusFile {
            k: self.k,
            digest: self.digest.clone(),
            entries: self
                .entries
                .iter()
                .map(|(h, list)| {
                    let neighbors = list
                        .neighbors
                        .iter()
                        .map(|n| (n.hashtag.clone(), nine_significant_digits(n.distance)))
                        .collect();
                    (h.clone(), neighbors)
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("thesaurus serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: ThesaurusFile = serde_json::from_str(json)
            .map_err(|e| Error::Domain(format!("thesaurus JSON: {e}")))?;
        let lists = file
            .entries
            .into_iter()
            .map(|(head, neighbors)| {
                let neighbors = neighbors
                    .into_iter()
                    .map(|(hashtag, distance)| Neighbor { hashtag, distance })
                    .collect();
                SynonymList::checked(head, neighbors, file.k, false)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut thesaurus = Thesaurus::from_lists(file.k, lists)?;
        thesaurus.digest = file.digest;
        Ok(thesaurus)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Thesaurus::from_json(&json).map_err(|e| Error::format(path, 0, e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct ThesaurusFile {
    k: usize,
    digest: String,
    entries: BTreeMap<Hashtag, Vec<(Hashtag, f64)>>,
}

fn nine_significant_digits(x: f64) -> f64 {
    format!("{x:.8e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThesaurusOptions {
    pub max_distance: Option<f64>,
}

/// Synonym lists for `queries` (default: every hashtag in the dictionary).
/// Queries without a centroid are collected in [`Thesaurus::misses`].
pub fn build_thesaurus<T: Scalar>(
    dict: &HashtagDictionary<T>,
    k: usize,
    queries: Option<&[Hashtag]>,
) -> Thesaurus {
    build_thesaurus_with(dict, k, queries, ThesaurusOptions::default())
}

pub fn build_thesaurus_with<T: Scalar>(
    dict: &HashtagDictionary<T>,
    k: usize,
    queries: Option<&[Hashtag]>,
    options: ThesaurusOptions,
) -> Thesaurus {
    let index = SynonymIndex::new(dict).with_max_distance(options.max_distance);
    let queries: BTreeSet<&Hashtag> = match queries {
        Some(q) => q.iter().collect(),
        None => dict.hashtags().collect(),
    };
    let results: Vec<_> = queries.into_par_iter().map(|h| index.query(h, k)).collect();

    let mut entries = BTreeMap::new();
    let mut misses = Vec::new();
    for result in results {
        match result {
            Ok(list) => {
                entries.insert(list.head.clone(), list);
            }
            Err(LookupMiss(h)) => misses.push(h),
        }
    }
    Thesaurus {
        k,
        digest: dict.digest(),
        entries,
        misses,
    }
}

/// `Syn(S)`: union of `Syn_k(h)` over `S` at the thesaurus' own `k`.
/// Hashtags without an entry contribute only themselves.
pub fn synonyms_of_set<'a>(
    set: impl IntoIterator<Item = &'a Hashtag>,
    thesaurus: &Thesaurus,
) -> BTreeSet<Hashtag> {
    let mut out = BTreeSet::new();
    for h in set {
        match thesaurus.synonyms(h, thesaurus.k()) {
            Some(members) => out.extend(members.cloned()),
            None => {
                out.insert(h.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashtag::tag;

    fn dict(entries: &[(&str, &[f64])]) -> HashtagDictionary<f64> {
        let mut d = HashtagDictionary::new(entries[0].1.len());
        for (h, v) in entries {
            d.update(&tag(h), &EmbeddingVector::new(v.to_vec()).unwrap())
                .unwrap();
        }
        d
    }

    fn four() -> HashtagDictionary<f64> {
        dict(&[
            ("#h1", &[1.0, 0.0, 0.0]),
            ("#h2", &[0.6, 0.8, 0.0]),
            ("#h3", &[0.0, 1.0, 0.0]),
            ("#h4", &[0.0, 0.0, 1.0]),
        ])
    }

    fn names(list: &SynonymList) -> Vec<&str> {
        list.neighbors()
            .iter()
            .map(|n| n.hashtag.as_str())
            .collect()
    }

    #[test]
    fn four_centroid_example() {
        let list = construct_synonyms(&tag("#h1"), 2, &four()).unwrap();
        assert_eq!(list.head(), &tag("#h1"));
        assert_eq!(names(&list), ["#h2", "#h3"]);
        assert!((list.neighbors()[0].distance - 0.4).abs() < 1e-15);
        assert_eq!(list.neighbors()[1].distance, 1.0);
        assert!(!list.is_truncated());
    }

    #[test]
    fn k_zero_is_head_only() {
        let list = construct_synonyms(&tag("#h3"), 0, &four()).unwrap();
        assert!(list.neighbors().is_empty());
        assert_eq!(list.members(0).collect::<Vec<_>>(), [&tag("#h3")]);
    }

    #[test]
    fn k_clamped_and_flagged() {
        let list = construct_synonyms(&tag("#h4"), 10, &four()).unwrap();
        assert_eq!(list.neighbors().len(), 3);
        assert!(list.is_truncated());
    }

    #[test]
    fn missing_query() {
        assert_eq!(
            construct_synonyms(&tag("#nope"), 2, &four()),
            Err(LookupMiss(tag("#nope")))
        );
    }

    #[test]
    fn single_hashtag_dictionary() {
        let d = dict(&[("#only", &[1.0, 2.0])]);
        let t = build_thesaurus(&d, 5, None);
        assert_eq!(t.len(), 1);
        let list = t.get(&tag("#only")).unwrap();
        assert!(list.neighbors().is_empty() && list.is_truncated());
    }

    #[test]
    fn four_centroid_thesaurus() {
        let t = build_thesaurus(&four(), 2, None);
        assert_eq!(t.len(), 4);
        assert_eq!(t.digest(), four().digest());
        assert_eq!(names(t.get(&tag("#h1")).unwrap()), ["#h2", "#h3"]);
        assert_eq!(names(t.get(&tag("#h2")).unwrap()), ["#h3", "#h1"]);
        assert_eq!(names(t.get(&tag("#h3")).unwrap()), ["#h2", "#h1"]);
        // h4 is orthogonal to everything: three-way tie broken lexicographically
        assert_eq!(names(t.get(&tag("#h4")).unwrap()), ["#h1", "#h2"]);
    }

    #[test]
    fn queries_subset_and_misses() {
        let qs = [tag("#h2"), tag("#zzz"), tag("#h2")];
        let t = build_thesaurus(&four(), 1, Some(&qs));
        assert_eq!(t.len(), 1);
        assert_eq!(t.misses(), [tag("#zzz")]);
    }

    #[test]
    fn max_distance_cuts_far_neighbors() {
        let t = build_thesaurus_with(
            &four(),
            3,
            None,
            ThesaurusOptions {
                max_distance: Some(0.5),
            },
        );
        assert_eq!(names(t.get(&tag("#h1")).unwrap()), ["#h2"]);
        assert!(t.get(&tag("#h4")).unwrap().neighbors().is_empty());
    }

    #[test]
    fn truncation_matches_rebuild() {
        let full = build_thesaurus(&four(), 3, None);
        let cut = full.truncated(1).unwrap();
        let direct = build_thesaurus(&four(), 1, None);
        assert_eq!(cut, direct);
        assert!(full.truncated(4).is_err());
    }

    #[test]
    fn set_union() {
        let t = build_thesaurus(&four(), 1, None);
        let s = synonyms_of_set([&tag("#h1"), &tag("#h4")], &t);
        let got: Vec<_> = s.iter().map(Hashtag::as_str).collect();
        assert_eq!(got, ["#h1", "#h2", "#h4"]);
        assert!(synonyms_of_set([], &t).is_empty());
        let single = synonyms_of_set([&tag("#h3")], &t);
        assert_eq!(single, BTreeSet::from([tag("#h2"), tag("#h3")]));
        // unknown hashtags contribute themselves
        assert_eq!(synonyms_of_set([&tag("#new")], &t).len(), 1);
    }

    #[test]
    fn json_round_trip_and_layout() {
        let t = build_thesaurus(&four(), 2, None);
        let json = t.to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["k"], 2);
        assert_eq!(value["digest"], t.digest());
        assert_eq!(value["entries"]["#h1"][0][0], "#h2");
        assert_eq!(value["entries"]["#h1"][0][1], 0.4);
        let back = Thesaurus::from_json(&json).unwrap();
        assert_eq!(back.k(), 2);
        assert_eq!(back.digest(), t.digest());
        for (h, list) in t.iter() {
            let other = back.get(h).unwrap();
            assert_eq!(names(list), names(other));
            for (a, b) in list.neighbors().iter().zip(other.neighbors()) {
                assert!((a.distance - b.distance).abs() <= 1e-8 * a.distance.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn rounding_ties_keep_file_order() {
        let n = |h: &str, d: f64| Neighbor {
            hashtag: tag(h),
            distance: d,
        };
        let list = SynonymList::new(
            tag("#a"),
            vec![n("#z", 0.1000000001), n("#b", 0.1000000002)],
            2,
        )
        .unwrap();
        let t = Thesaurus::from_lists(2, [list]).unwrap();
        let back = Thesaurus::from_json(&t.to_json()).unwrap();
        assert_eq!(names(back.get(&tag("#a")).unwrap()), ["#z", "#b"]);
    }

    #[test]
    fn rejects_malformed_lists() {
        let n = |h: &str, d: f64| Neighbor {
            hashtag: tag(h),
            distance: d,
        };
        assert!(SynonymList::new(tag("#a"), vec![n("#b", 0.5), n("#c", 0.1)], 2).is_err());
        assert!(SynonymList::new(tag("#a"), vec![n("#c", 0.1), n("#b", 0.1)], 2).is_err());
        assert!(SynonymList::new(tag("#a"), vec![n("#a", 0.0)], 1).is_err());
        assert!(SynonymList::new(tag("#a"), vec![n("#b", 0.1), n("#c", 0.2)], 1).is_err());
        assert!(SynonymList::new(tag("#a"), vec![n("#b", 0.1), n("#c", 0.1)], 2).is_ok());
    }
}
