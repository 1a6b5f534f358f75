//! Binary and text embedding files.
//!
//! All binary files share an 18-byte little-endian header:
//!
//! ```text
//! magic   "REVL"      4 bytes
//! version u16         currently 1
//! dim     u32
//! count   u64
//! ```
//!
//! followed by `count` records whose key depends on the file kind:
//!
//! | kind             | record                                               |
//! |------------------|------------------------------------------------------|
//! | tweet embeddings | `tweet_index u64`, `dim x f32`                        |
//! | dictionary       | `len u32`, hashtag UTF-8, `n_h u64`, `dim x f32` sum  |
//! | word vectors     | `len u32`, token UTF-8, `dim x f32`                   |
//!
//! Values are `f32` on disk and widened to the in-memory scalar on load.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{EmbeddingVector, HashtagCentroid, HashtagDictionary, TweetEmbeddings};
use crate::error::{Error, Result};
use crate::hashtag::Hashtag;
use crate::recommender::WordVectors;
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"REVL";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: u64 = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub version: u16,
    pub dim: u32,
    pub count: u64,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(io_err(path))?))
}

fn write_header(w: &mut impl Write, dim: usize, count: usize) -> std::io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_u16::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(dim as u32)?;
    w.write_u64::<LittleEndian>(count as u64)
}

fn read_header(r: &mut impl Read, path: &Path) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::format(path, 0, "file too short for header"))?;
    if magic != MAGIC {
        return Err(Error::format(path, 0, format!("bad magic {magic:?}")));
    }
    let version = r.read_u16::<LittleEndian>().map_err(io_err(path))?;
    if version != VERSION {
        return Err(Error::format(
            path,
            0,
            format!("unsupported format version {version}"),
        ));
    }
    let dim = r.read_u32::<LittleEndian>().map_err(io_err(path))?;
    let count = r.read_u64::<LittleEndian>().map_err(io_err(path))?;
    if dim == 0 {
        return Err(Error::format(path, 0, "dimension is zero"));
    }
    Ok(Header {
        version,
        dim,
        count,
    })
}

fn write_values<T: Scalar>(w: &mut impl Write, v: &EmbeddingVector<T>) -> std::io::Result<()> {
    for x in v.values() {
        w.write_f32::<LittleEndian>(x.as_f32())?;
    }
    Ok(())
}

fn read_values<T: Scalar>(
    r: &mut impl Read,
    dim: usize,
    path: &Path,
    record: u64,
) -> Result<EmbeddingVector<T>> {
    let mut values = Vec::with_capacity(dim);
    for _ in 0..dim {
        let x = r
            .read_f32::<LittleEndian>()
            .map_err(|_| Error::format(path, record as usize + 1, "truncated record"))?;
        values.push(T::of_f32(x));
    }
    EmbeddingVector::new(values)
        .map_err(|e| Error::format(path, record as usize + 1, e.to_string()))
}

fn write_key(w: &mut impl Write, key: &str) -> std::io::Result<()> {
    w.write_u32::<LittleEndian>(key.len() as u32)?;
    w.write_all(key.as_bytes())
}

fn read_key(r: &mut impl Read, path: &Path, record: u64) -> Result<String> {
    let bad = |m: &str| Error::format(path, record as usize + 1, m.to_string());
    let len = r
        .read_u32::<LittleEndian>()
        .map_err(|_| bad("truncated record"))? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(|_| bad("truncated key"))?;
    String::from_utf8(buf).map_err(|_| bad("key is not UTF-8"))
}

fn expect_eof(r: &mut impl Read, path: &Path) -> Result<()> {
    let mut byte = [0u8; 1];
    match r.read(&mut byte).map_err(io_err(path))? {
        0 => Ok(()),
        _ => Err(Error::format(path, 0, "trailing bytes after last record")),
    }
}

pub fn write_tweet_embeddings<T: Scalar>(
    path: &Path,
    embeddings: &TweetEmbeddings<T>,
) -> Result<()> {
    let mut w = create(path)?;
    (|| {
        write_header(&mut w, embeddings.dim(), embeddings.len())?;
        for (index, v) in embeddings.iter() {
            w.write_u64::<LittleEndian>(index)?;
            write_values(&mut w, v)?;
        }
        w.flush()
    })()
    .map_err(io_err(path))
}

pub fn read_tweet_embeddings<T: Scalar>(path: &Path) -> Result<TweetEmbeddings<T>> {
    let mut r = open(path)?;
    let header = read_header(&mut r, path)?;
    let mut out = TweetEmbeddings::new(header.dim as usize);
    for record in 0..header.count {
        let index = r
            .read_u64::<LittleEndian>()
            .map_err(|_| Error::format(path, record as usize + 1, "truncated record"))?;
        let v = read_values(&mut r, header.dim as usize, path, record)?;
        if out.get(index).is_some() {
            return Err(Error::format(
                path,
                record as usize + 1,
                format!("duplicate tweet_index {index}"),
            ));
        }
        out.insert(index, v)?;
    }
    expect_eof(&mut r, path)?;
    Ok(out)
}

/// Checks header and total size of a tweet-embedding file without loading it.
pub fn validate_tweet_embedding_file(path: &Path) -> Result<Header> {
    let mut r = open(path)?;
    let header = read_header(&mut r, path)?;
    let len = std::fs::metadata(path).map_err(io_err(path))?.len();
    let expected = HEADER_LEN + header.count * (8 + 4 * header.dim as u64);
    if len != expected {
        return Err(Error::format(
            path,
            0,
            format!("size {len} bytes, header implies {expected}"),
        ));
    }
    Ok(header)
}

pub fn write_dictionary<T: Scalar>(path: &Path, dict: &HashtagDictionary<T>) -> Result<()> {
    let mut w = create(path)?;
    (|| {
        write_header(&mut w, dict.dim(), dict.len())?;
        for (h, c) in dict.iter() {
            write_key(&mut w, h.as_str())?;
            w.write_u64::<LittleEndian>(c.count())?;
            write_values(&mut w, c.running_sum())?;
        }
        w.flush()
    })()
    .map_err(io_err(path))
}

pub fn read_dictionary<T: Scalar>(path: &Path) -> Result<HashtagDictionary<T>> {
    let mut r = open(path)?;
    let header = read_header(&mut r, path)?;
    let mut dict = HashtagDictionary::new(header.dim as usize);
    for record in 0..header.count {
        let line = record as usize + 1;
        let key = read_key(&mut r, path, record)?;
        let hashtag = Hashtag::parse(&key).map_err(|e| Error::format(path, line, e.to_string()))?;
        let count = r
            .read_u64::<LittleEndian>()
            .map_err(|_| Error::format(path, line, "truncated record"))?;
        let sum = read_values(&mut r, header.dim as usize, path, record)?;
        let centroid = HashtagCentroid::from_sum(&hashtag, sum, count)?;
        if dict.contains(&hashtag) {
            return Err(Error::format(
                path,
                line,
                format!("duplicate hashtag {hashtag}"),
            ));
        }
        dict.insert(hashtag, centroid)?;
    }
    expect_eof(&mut r, path)?;
    Ok(dict)
}

pub fn write_word_vectors<T: Scalar>(path: &Path, words: &WordVectors<T>) -> Result<()> {
    let mut w = create(path)?;
    (|| {
        write_header(&mut w, words.dim(), words.len())?;
        for (token, v) in words.iter() {
            write_key(&mut w, token)?;
            write_values(&mut w, v)?;
        }
        w.flush()
    })()
    .map_err(io_err(path))
}

pub fn read_word_vectors<T: Scalar>(path: &Path) -> Result<WordVectors<T>> {
    let mut r = open(path)?;
    let header = read_header(&mut r, path)?;
    let mut words = WordVectors::new(header.dim as usize);
    for record in 0..header.count {
        let token = read_key(&mut r, path, record)?;
        let v = read_values(&mut r, header.dim as usize, path, record)?;
        words.insert(token, v)?;
    }
    expect_eof(&mut r, path)?;
    Ok(words)
}

/// Debug text form: `tweet_index<TAB>v1<TAB>...<TAB>v_dim` per line.
pub fn write_tweet_embeddings_tsv<T: Scalar>(
    path: &Path,
    embeddings: &TweetEmbeddings<T>,
) -> Result<()> {
    let mut w = create(path)?;
    (|| {
        for (index, v) in embeddings.iter() {
            write!(w, "{index}")?;
            for x in v.values() {
                write!(w, "\t{}", x.as_f32())?;
            }
            writeln!(w)?;
        }
        w.flush()
    })()
    .map_err(io_err(path))
}

pub fn read_tweet_embeddings_tsv<T: Scalar>(path: &Path) -> Result<TweetEmbeddings<T>> {
    let r = open(path)?;
    let mut out: Option<TweetEmbeddings<T>> = None;
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::format(path, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: String| Error::format(path, line_no, m);
        let mut fields = line.split('\t');
        let index: u64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| bad("bad tweet_index".into()))?;
        let values = fields
            .map(|f| {
                f.parse::<f32>()
                    .map(T::of_f32)
                    .map_err(|e| bad(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let v = EmbeddingVector::new(values).map_err(|e| bad(e.to_string()))?;
        let store = out.get_or_insert_with(|| TweetEmbeddings::new(v.dim()));
        store.insert(index, v).map_err(|e| bad(e.to_string()))?;
    }
    out.ok_or_else(|| Error::format(path, 0, "no embeddings"))
}
