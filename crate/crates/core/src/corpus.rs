//! Tweet ingestion: cleaning, hashtag extraction, per-hashtag duplication of
//! tweets into records, and the train/test split.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::LazyLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashtag::Hashtag;

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    pub text: String,
    #[serde(default, rename = "retweet")]
    pub is_retweet: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanTweet {
    pub id: String,
    pub text: String,
    pub hashtags: Vec<Hashtag>,
}

impl CleanTweet {
    /// Text tokens that are not hashtags.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.text.split_whitespace().filter(|t| !t.starts_with('#'))
    }
}

/// One (tweet, hashtag) pair. A tweet with `n` distinct hashtags yields `n`
/// records with ordinals `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CorpusRecord {
    pub tweet_index: u64,
    pub hashtag: Hashtag,
    pub ordinal: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<CleanTweet>,
    pub test: Vec<CleanTweet>,
    pub split_fraction: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Empty,
    NoHashtags,
    NonEnglish,
    DuplicateRetweet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cleaned {
    Kept(CleanTweet),
    Dropped(DropReason),
}

impl Cleaned {
    pub fn kept(self) -> Option<CleanTweet> {
        match self {
            Cleaned::Kept(t) => Some(t),
            Cleaned::Dropped(_) => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn empty() -> Self {
        Stopwords(HashSet::new())
    }

    /// Parses a stopword list: one token per line, `#` lines are comments.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    /// The list shipped with the crate.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8(bytes)
            .map_err(|e| Error::format(path, 0, format!("invalid UTF-8: {e}")))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

/// Decides whether a tweet is in the target language.
pub trait LanguageFilter: Send + Sync {
    fn accept(&self, text: &str) -> bool;
}

/// Accepts every tweet.
#[derive(Debug, Clone, Copy, Default)]
pub struct AcceptAll;

impl LanguageFilter for AcceptAll {
    fn accept(&self, _text: &str) -> bool {
        true
    }
}

impl<F: Fn(&str) -> bool + Send + Sync> LanguageFilter for F {
    fn accept(&self, text: &str) -> bool {
        self(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CleanOptions {
    /// Cap runs of a repeated character at three ("heeeeello" -> "heeello").
    pub truncate_repeats: bool,
}

impl Default for CleanOptions {
    fn default() -> Self {
        CleanOptions {
            truncate_repeats: true,
        }
    }
}

fn truncate_repeats(text: &str, max_run: usize) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev = None;
    let mut run = 0;
    for c in text.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= max_run {
            out.push(c);
        }
    }
    out
}

/// Normalizes tweet text and extracts its hashtags (deduplicated, in order of
/// first appearance).
pub fn clean_text(
    text: &str,
    stopwords: &Stopwords,
    options: CleanOptions,
) -> (String, Vec<Hashtag>) {
    let text = URL.replace_all(text, " ");
    let text = MENTION.replace_all(&text, " ");
    let mut text = text.to_lowercase();
    if options.truncate_repeats {
        text = truncate_repeats(&text, 3);
    }

    let mut spaced = String::with_capacity(text.len() + 8);
    for c in text.chars() {
        match c {
            '\'' | '\u{2019}' => {}
            '#' => spaced.push_str(" #"),
            c if c.is_alphanumeric() || c == '_' || c.is_whitespace() => spaced.push(c),
            _ => spaced.push(' '),
        }
    }

    let mut tokens = Vec::new();
    let mut hashtags: Vec<Hashtag> = Vec::new();
    for token in spaced.split_whitespace() {
        if token.starts_with('#') {
            // a lone '#' carries no tag
            if let Ok(h) = Hashtag::parse(token) {
                if !hashtags.contains(&h) {
                    hashtags.push(h);
                }
                tokens.push(token);
            }
        } else if !stopwords.contains(token) {
            tokens.push(token);
        }
    }
    (tokens.join(" "), hashtags)
}

/// Cleans a single tweet without cross-tweet state (so retweets are never
/// dropped here; see [`Preprocessor`]).
pub fn clean(raw: &RawTweet, stopwords: &Stopwords) -> Cleaned {
    clean_with(raw, stopwords, CleanOptions::default(), &AcceptAll)
}

pub fn clean_with(
    raw: &RawTweet,
    stopwords: &Stopwords,
    options: CleanOptions,
    filter: &dyn LanguageFilter,
) -> Cleaned {
    if raw.text.trim().is_empty() {
        return Cleaned::Dropped(DropReason::Empty);
    }
    if !filter.accept(&raw.text) {
        return Cleaned::Dropped(DropReason::NonEnglish);
    }
    let (text, hashtags) = clean_text(&raw.text, stopwords, options);
    if hashtags.is_empty() {
        return Cleaned::Dropped(DropReason::NoHashtags);
    }
    Cleaned::Kept(CleanTweet {
        id: raw.id.clone(),
        text,
        hashtags,
    })
}

/// Stateful cleaner that also removes retweets repeating an already seen
/// (text, hashtag) record.
pub struct Preprocessor<'a> {
    stopwords: &'a Stopwords,
    options: CleanOptions,
    filter: Box<dyn LanguageFilter + 'a>,
    seen: HashSet<(String, Hashtag)>,
}

impl<'a> Preprocessor<'a> {
    pub fn new(stopwords: &'a Stopwords) -> Self {
        Preprocessor {
            stopwords,
            options: CleanOptions::default(),
            filter: Box::new(AcceptAll),
            seen: HashSet::new(),
        }
    }

    pub fn with_options(mut self, options: CleanOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_filter(mut self, filter: impl LanguageFilter + 'a) -> Self {
        self.filter = Box::new(filter);
        self
    }

    pub fn process(&mut self, raw: &RawTweet) -> Cleaned {
        let tweet = match clean_with(raw, self.stopwords, self.options, self.filter.as_ref()) {
            Cleaned::Kept(t) => t,
            dropped => return dropped,
        };
        if raw.is_retweet
            && tweet
                .hashtags
                .iter()
                .all(|h| self.seen.contains(&(tweet.text.clone(), h.clone())))
        {
            return Cleaned::Dropped(DropReason::DuplicateRetweet);
        }
        for h in &tweet.hashtags {
            self.seen.insert((tweet.text.clone(), h.clone()));
        }
        Cleaned::Kept(tweet)
    }
}

/// Duplicates a tweet once per distinct hashtag.
pub fn explode(tweet_index: u64, tweet: &CleanTweet) -> Vec<CorpusRecord> {
    let mut seen = HashSet::new();
    tweet
        .hashtags
        .iter()
        .filter(|h| seen.insert(*h))
        .zip(1..)
        .map(|(h, ordinal)| CorpusRecord {
            tweet_index,
            hashtag: h.clone(),
            ordinal,
        })
        .collect()
}

/// Records for a whole corpus, indexing tweets by position.
pub fn explode_all(corpus: &[CleanTweet]) -> Vec<CorpusRecord> {
    corpus
        .iter()
        .enumerate()
        .flat_map(|(i, t)| explode(i as u64, t))
        .collect()
}

/// Seeded partition of `0..n` into (train, test) index lists, each ascending.
/// `floor(n * fraction)` indices go to train.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Domain(format!(
            "split fraction {fraction} outside (0, 1)"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("cannot split an empty corpus".into()));
    }
    // the epsilon keeps e.g. 100 * 0.9 = 89.999... from flooring to 89
    let train_len = ((n as f64 * fraction) + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = order[..train_len].to_vec();
    let mut test = order[train_len..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(corpus: &[CleanTweet], fraction: f64, seed: u64) -> Result<CorpusSplit> {
    let (train, test) = split_indices(corpus.len(), fraction, seed)?;
    Ok(CorpusSplit {
        train: train.into_iter().map(|i| corpus[i].clone()).collect(),
        test: test.into_iter().map(|i| corpus[i].clone()).collect(),
        split_fraction: fraction,
        seed,
    })
}

fn for_each_line(path: &Path, mut f: impl FnMut(usize, &str) -> Result<()>) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Ok(());
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf)
            .map_err(|e| Error::format(path, line_no, format!("invalid UTF-8: {e}")))?;
        let line = line.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        f(line_no, line)?;
    }
}

/// Reads a JSON-lines file into `T`, reporting the failing line.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for_each_line(path, |line_no, line| {
        out.push(
            serde_json::from_str(line).map_err(|e| Error::format(path, line_no, e.to_string()))?,
        );
        Ok(())
    })?;
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads raw tweets, rejecting duplicate ids.
pub fn read_raw_tweets(path: &Path) -> Result<Vec<RawTweet>> {
    let mut ids = HashSet::new();
    let mut out = Vec::new();
    for_each_line(path, |line_no, line| {
        let tweet: RawTweet =
            serde_json::from_str(line).map_err(|e| Error::format(path, line_no, e.to_string()))?;
        if !ids.insert(tweet.id.clone()) {
            return Err(Error::format(
                path,
                line_no,
                format!("duplicate tweet id {:?}", tweet.id),
            ));
        }
        out.push(tweet);
        Ok(())
    })?;
    Ok(out)
}

pub fn read_clean_tweets(path: &Path) -> Result<Vec<CleanTweet>> {
    read_jsonl(path)
}

pub fn write_records(path: &Path, records: &[CorpusRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        writeln!(w, "{}\t{}\t{}", r.tweet_index, r.hashtag, r.ordinal)
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<CorpusRecord>> {
    let mut out = Vec::new();
    for_each_line(path, |line_no, line| {
        let bad = |msg: &str| Error::format(path, line_no, msg.to_string());
        let mut fields = line.split('\t');
        let (Some(index), Some(hashtag), Some(ordinal), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad("expected tweet_index<TAB>hashtag<TAB>ordinal"));
        };
        out.push(CorpusRecord {
            tweet_index: index.parse().map_err(|_| bad("bad tweet_index"))?,
            hashtag: Hashtag::parse(hashtag).map_err(|e| bad(&e.to_string()))?,
            ordinal: ordinal.parse().map_err(|_| bad("bad ordinal"))?,
        });
        Ok(())
    })?;
    Ok(out)
}
