use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A lowercase `#`-prefixed tag. Identity is case-insensitive: `#Covid19` and
/// `#covid19` parse to the same value.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hashtag(String);

impl Hashtag {
    /// Parses a hashtag, lowercasing it. The input must be `#` followed by at
    /// least one character that is neither whitespace nor `#`.
    pub fn parse(raw: &str) -> Result<Self> {
        let body = raw
            .strip_prefix('#')
            .ok_or_else(|| Error::Domain(format!("hashtag {raw:?} does not start with '#'")))?;
        if body.is_empty() || body.chars().any(|c| c.is_whitespace() || c == '#') {
            return Err(Error::Domain(format!("malformed hashtag {raw:?}")));
        }
        Ok(Hashtag(format!("#{}", body.to_lowercase())))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Hashtag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Hashtag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Hashtag {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Hashtag {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::str::FromStr for Hashtag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Hashtag::parse(s)
    }
}

impl Serialize for Hashtag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Hashtag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Hashtag::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Shorthand for tests and fixtures; panics on malformed input.
pub fn tag(raw: &str) -> Hashtag {
    Hashtag::parse(raw).unwrap_or_else(|e| panic!("{e}"))
}
