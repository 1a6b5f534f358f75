//! Hit ratio and its synonym-aware generalization.
//!
//! For recommended hashtags `R` and ground truth `G`:
//!
//! ```text
//! hit_ratio(R, G) = |R ∩ G| / min(|R|, |G|)
//!
//! rho(R, G) = Σ_{r ∈ R} [Syn(r) ∩ G ≠ ∅]   if |R| <= |G|
//!           = Σ_{g ∈ G} [g ∈ Syn(R)]       otherwise
//! ```
//!
//! and the synonym-aware ratio is `rho / min(|R|, |G|)`. Synonyms are only
//! ever expanded on the recommended side.

use std::collections::BTreeSet;
use std::path::Path;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hashtag::Hashtag;
use crate::scalar::Scalar;
use crate::thesaurus::Thesaurus;

/// One recommendation list and its ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPair {
    pub tweet_id: String,
    pub recommended: Vec<Hashtag>,
    pub ground_truth: Vec<Hashtag>,
}

impl EvalPair {
    /// Builds a pair, dropping repeated hashtags (first occurrence wins).
    pub fn new(
        tweet_id: impl Into<String>,
        recommended: Vec<Hashtag>,
        ground_truth: Vec<Hashtag>,
    ) -> Self {
        EvalPair {
            tweet_id: tweet_id.into(),
            recommended: dedup(recommended),
            ground_truth: dedup(ground_truth),
        }
    }
}

fn dedup(tags: Vec<Hashtag>) -> Vec<Hashtag> {
    let mut seen = BTreeSet::new();
    tags.into_iter()
        .filter(|h| seen.insert(h.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MatchResult {
    pub rho: usize,
    pub denominator: usize,
    /// Recommended hashtags with no thesaurus entry (matched exactly).
    #[serde(skip)]
    pub misses: usize,
}

impl MatchResult {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.rho as u64, self.denominator as u64)
    }

    pub fn ratio_as<T: Scalar>(&self) -> T {
        T::of(self.rho as f64) / T::of(self.denominator as f64)
    }

    pub fn ratio_f64(&self) -> f64 {
        self.ratio_as()
    }
}

/// Exact-match hit ratio. `None` when either side is empty.
pub fn hit_ratio(recommended: &[Hashtag], ground_truth: &[Hashtag]) -> Option<MatchResult> {
    let r: BTreeSet<&Hashtag> = recommended.iter().collect();
    let g: BTreeSet<&Hashtag> = ground_truth.iter().collect();
    if r.is_empty() || g.is_empty() {
        return None;
    }
    Some(MatchResult {
        rho: r.intersection(&g).count(),
        denominator: r.len().min(g.len()),
        misses: 0,
    })
}

/// Looks up `Syn_k` for recommended hashtags, falling back to `{h}` for
/// hashtags the thesaurus does not know.
struct Lookup<'a> {
    thesaurus: &'a Thesaurus,
    k: usize,
}

impl<'a> Lookup<'a> {
    fn synonyms<'b>(&self, h: &'b Hashtag) -> (Vec<&'b Hashtag>, bool)
    where
        'a: 'b,
    {
        match self.thesaurus.synonyms(h, self.k) {
            Some(members) => (members.collect(), false),
            None => (vec![h], true),
        }
    }
}

fn distinct(tags: &[Hashtag]) -> Vec<&Hashtag> {
    let mut seen = BTreeSet::new();
    tags.iter().filter(|h| seen.insert(*h)).collect()
}

/// First branch: recommended hashtags whose synonym set meets `G`.
pub fn rho_by_recommended(
    recommended: &[Hashtag],
    ground_truth: &[Hashtag],
    thesaurus: &Thesaurus,
    k: usize,
) -> usize {
    let lookup = Lookup { thesaurus, k };
    let g: BTreeSet<&Hashtag> = ground_truth.iter().collect();
    distinct(recommended)
        .into_iter()
        .filter(|h| lookup.synonyms(h).0.iter().any(|s| g.contains(s)))
        .count()
}

/// Second branch: ground-truth hashtags inside `Syn(R)`.
pub fn rho_by_ground_truth(
    recommended: &[Hashtag],
    ground_truth: &[Hashtag],
    thesaurus: &Thesaurus,
    k: usize,
) -> usize {
    let lookup = Lookup { thesaurus, k };
    let expanded: BTreeSet<&Hashtag> = distinct(recommended)
        .into_iter()
        .flat_map(|h| lookup.synonyms(h).0)
        .collect();
    distinct(ground_truth)
        .into_iter()
        .filter(|g| expanded.contains(g))
        .count()
}

fn match_at(
    recommended: &[Hashtag],
    ground_truth: &[Hashtag],
    thesaurus: &Thesaurus,
    k: usize,
) -> Option<MatchResult> {
    let r = distinct(recommended);
    let g = distinct(ground_truth);
    if r.is_empty() || g.is_empty() {
        return None;
    }
    let misses = r.iter().filter(|h| thesaurus.get(h).is_none()).count();
    let rho = if r.len() <= g.len() {
        rho_by_recommended(recommended, ground_truth, thesaurus, k)
    } else {
        rho_by_ground_truth(recommended, ground_truth, thesaurus, k)
    };
    Some(MatchResult {
        rho,
        denominator: r.len().min(g.len()),
        misses,
    })
}

/// Synonym matching at the thesaurus' own `k`. `None` when either side is
/// empty.
pub fn match_synonyms(
    recommended: &[Hashtag],
    ground_truth: &[Hashtag],
    thesaurus: &Thesaurus,
) -> Option<MatchResult> {
    match_at(recommended, ground_truth, thesaurus, thesaurus.k())
}

/// Synonym-aware hit ratio of one pair using `Syn_k`. Errors when `k`
/// exceeds the `k` the thesaurus was built with; `Ok(None)` marks a pair
/// that cannot be scored.
pub fn reval_hit_ratio(
    pair: &EvalPair,
    thesaurus: &Thesaurus,
    k: usize,
) -> Result<Option<MatchResult>> {
    check_k(thesaurus, k)?;
    Ok(match_at(
        &pair.recommended,
        &pair.ground_truth,
        thesaurus,
        k,
    ))
}

fn check_k(thesaurus: &Thesaurus, k: usize) -> Result<()> {
    if k > thesaurus.k() {
        return Err(Error::Domain(format!(
            "k = {k} exceeds the thesaurus' k = {}",
            thesaurus.k()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResult {
    pub tweet_id: String,
    pub rho: usize,
    pub denominator: usize,
    #[serde(serialize_with = "four_decimals")]
    pub ratio: f64,
}

/// Average synonym-aware hit ratio over a recommendation set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub k: usize,
    pub r: usize,
    pub pairs: usize,
    pub skipped: usize,
    pub thesaurus_misses: usize,
    #[serde(rename = "average_reval_hit_ratio", serialize_with = "four_decimals")]
    pub average: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_pair: Option<Vec<PairResult>>,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn four_decimals<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round4(*x))
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "k,r,average_reval_hit_ratio,pairs,skipped,thesaurus_misses";

    pub fn evaluated(&self) -> usize {
        self.pairs - self.skipped
    }

    pub fn with_top_r(mut self, r: usize) -> Self {
        self.r = r;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.4},{},{},{}",
            self.k, self.r, self.average, self.pairs, self.skipped, self.thesaurus_misses
        )
    }
}

/// Macro average of the synonym-aware hit ratio over `pairs`. Pairs with an
/// empty side are skipped and counted. `r` is reported as the longest
/// recommendation list seen; use [`EvalReport::with_top_r`] to pin it.
pub fn evaluate(pairs: &[EvalPair], thesaurus: &Thesaurus, k: usize) -> Result<EvalReport> {
    evaluate_with(pairs, thesaurus, k, false)
}

pub fn evaluate_with(
    pairs: &[EvalPair],
    thesaurus: &Thesaurus,
    k: usize,
    keep_per_pair: bool,
) -> Result<EvalReport> {
    check_k(thesaurus, k)?;
    let results: Vec<Option<MatchResult>> = pairs
        .par_iter()
        .map(|p| match_at(&p.recommended, &p.ground_truth, thesaurus, k))
        .collect();

    let scored: Vec<MatchResult> = results.iter().flatten().copied().collect();
    let skipped = pairs.len() - scored.len();
    let average = mean_ratio(&scored);
    let per_pair = keep_per_pair.then(|| {
        pairs
            .iter()
            .zip(&results)
            .filter_map(|(p, m)| {
                m.map(|m| PairResult {
                    tweet_id: p.tweet_id.clone(),
                    rho: m.rho,
                    denominator: m.denominator,
                    ratio: m.ratio_f64(),
                })
            })
            .collect()
    });

    Ok(EvalReport {
        k,
        r: pairs.iter().map(|p| p.recommended.len()).max().unwrap_or(0),
        pairs: pairs.len(),
        skipped,
        thesaurus_misses: scored.iter().map(|m| m.misses).sum(),
        average,
        warning: scored
            .is_empty()
            .then(|| "no pair could be evaluated; average reported as 0".to_string()),
        per_pair,
    })
}

/// Mean of the pair ratios. Summed exactly as rationals when every
/// denominator is at most 64, in input order as `f64` otherwise.
fn mean_ratio(scored: &[MatchResult]) -> f64 {
    if scored.is_empty() {
        return 0.0;
    }
    if scored.iter().all(|m| m.denominator <= 64) {
        let mut total = Ratio::<i128>::from_integer(0);
        let exact = scored.iter().all(|m| {
            let term = Ratio::new(m.rho as i128, m.denominator as i128);
            match total.checked_add(&term) {
                Some(t) => {
                    total = t;
                    true
                }
                None => false,
            }
        });
        let mean = exact
            .then(|| total.checked_div(&Ratio::from_integer(scored.len() as i128)))
            .flatten();
        if let Some(mean) = mean {
            return *mean.numer() as f64 / *mean.denom() as f64;
        }
    }
    scored.iter().map(MatchResult::ratio_f64).sum::<f64>() / scored.len() as f64
}

pub fn read_pairs(path: &Path) -> Result<Vec<EvalPair>> {
    let raw: Vec<EvalPair> = crate::corpus::read_jsonl(path)?;
    Ok(raw
        .into_iter()
        .map(|p| EvalPair::new(p.tweet_id, p.recommended, p.ground_truth))
        .collect())
}

pub fn write_pairs(path: &Path, pairs: &[EvalPair]) -> Result<()> {
    crate::corpus::write_jsonl(path, pairs)
}
