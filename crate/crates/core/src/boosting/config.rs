use std::fmt;
use std::str::FromStr;

use crate::complexity::Encoding;
use crate::error::{Error, Result};

use super::loss::Loss;

/// How tree-fit weights are formed each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrustMode {
    /// `w = |g| * exp(-normalized LZ complexity)`.
    Enabled,
    /// Uniform weights: classic gradient boosting.
    Disabled,
    /// `w = |g|`, the trust term fixed at one.
    MagnitudeOnly,
}

impl TrustMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrustMode::Enabled => "enabled",
            TrustMode::Disabled => "disabled",
            TrustMode::MagnitudeOnly => "magnitude-only",
        }
    }
}

impl fmt::Display for TrustMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrustMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enabled" | "itboost" => Ok(TrustMode::Enabled),
            "disabled" | "gbdt" => Ok(TrustMode::Disabled),
            "magnitude-only" | "magnitude" => Ok(TrustMode::MagnitudeOnly),
            _ => Err(Error::InvalidArgument(format!("unknown trust mode {s:?}"))),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub loss: Loss,
    pub encoding: Encoding,
    pub trust: TrustMode,
    pub seed: u64,
    /// Use the resumable LZ76 parser instead of re-parsing each history.
    pub incremental_lz: bool,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 1,
            loss: Loss::Logistic,
            encoding: Encoding::BinarySign,
            trust: TrustMode::Enabled,
            seed: 42,
            incremental_lz: false,
        }
    }
}

const KEYS: [&str; 9] = [
    "iterations",
    "learning_rate",
    "max_depth",
    "min_samples_leaf",
    "loss",
    "encoding",
    "trust",
    "seed",
    "incremental_lz",
];

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.iterations == 0 {
            return bad("iterations must be >= 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad(format!("learning_rate {} outside (0, 1]", self.learning_rate));
        }
        if self.max_depth == 0 {
            return bad("max_depth must be >= 1".into());
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be >= 1".into());
        }
        Ok(())
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse {value:?}")))
        }
        match key {
            "iterations" => self.iterations = num(key, value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "max_depth" => self.max_depth = num(key, value)?,
            "min_samples_leaf" => self.min_samples_leaf = num(key, value)?,
            "loss" => self.loss = value.parse()?,
            "encoding" => self.encoding = value.parse()?,
            "trust" => self.trust = value.parse()?,
            "seed" => self.seed = num(key, value)?,
            "incremental_lz" => self.incremental_lz = num(key, value)?,
            _ => return Err(Error::InvalidArgument(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file; `#` starts a comment. Keys not
    /// present keep their defaults.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.merge_kv(text)?;
        Ok(config)
    }

    pub fn merge_kv(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigFormat {
                line: n + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| Error::ConfigFormat {
                line: n + 1,
                msg: e.to_string(),
            })?;
        }
        self.validate()
    }

    pub fn to_kv(&self) -> String {
        KEYS.iter()
            .zip(self.values())
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Single-line `key=value` form used in model headers.
    pub fn to_inline(&self) -> String {
        KEYS.iter()
            .zip(self.values())
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn from_inline(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for pair in text.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("bad config token {pair:?}")))?;
            config.set(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn values(&self) -> [String; 9] {
        [
            self.iterations.to_string(),
            self.learning_rate.to_string(),
            self.max_depth.to_string(),
            self.min_samples_leaf.to_string(),
            self.loss.to_string(),
            self.encoding.to_string(),
            self.trust.to_string(),
            self.seed.to_string(),
            self.incremental_lz.to_string(),
        ]
    }
}
