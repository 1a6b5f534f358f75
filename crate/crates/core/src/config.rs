use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Settings for a full run. Stored as TOML; command line flags override
/// values loaded from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dim: usize,
    pub k_values: Vec<usize>,
    pub r_values: Vec<usize>,
    pub split_fraction: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_distance: Option<f64>,
    pub truncate_repeats: bool,
    pub global_popularity: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub words: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            dim: 768,
            k_values: vec![0, 5, 10, 20, 30, 40, 50, 60, 70],
            r_values: vec![1, 5, 10],
            split_fraction: 0.9,
            threshold: 0.5,
            max_distance: None,
            truncate_repeats: true,
            global_popularity: false,
            input: None,
            stopwords: None,
            embeddings: None,
            words: None,
            out: PathBuf::from("reval-out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Domain(format!("config: {e}")))?;
        config.validated()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::format(path, 0, e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }

    /// Checks ranges; sorts and deduplicates `k_values` and `r_values`.
    pub fn validated(mut self) -> Result<Self> {
        self.k_values.sort_unstable();
        self.k_values.dedup();
        self.r_values.sort_unstable();
        self.r_values.dedup();
        if self.k_values.is_empty() {
            return Err(Error::Domain("k_values is empty".into()));
        }
        if self.r_values.is_empty() || self.r_values[0] == 0 {
            return Err(Error::Domain(
                "r_values must be non-empty and positive".into(),
            ));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Domain(format!(
                "split_fraction {} outside (0, 1)",
                self.split_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Domain(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if self.dim < 2 {
            return Err(Error::Domain(format!("dim {} below 2", self.dim)));
        }
        if let Some(d) = self.max_distance {
            if !(0.0..=2.0).contains(&d) {
                return Err(Error::Domain(format!("max_distance {d} outside [0, 2]")));
            }
        }
        Ok(self)
    }

    pub fn max_k(&self) -> usize {
        self.k_values.iter().copied().max().unwrap_or(0)
    }
}
