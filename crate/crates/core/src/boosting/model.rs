use std::fmt::Write as _;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};

use super::config::BoostConfig;
use super::tree::RegressionTree;

const MAGIC: &str = "itboost-model v1";

/// Scores are clamped to this range before the logistic link.
pub const SCORE_CLAMP: f64 = 50.0;

/// Additive tree ensemble `F0 + nu * sum h_m(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: BoostConfig,
    pub init_score: f64,
    pub n_features: usize,
    pub trees: Vec<RegressionTree>,
}

impl Model {
    pub fn learning_rate(&self) -> f64 {
        self.config.learning_rate
    }

    /// Raw score. Trees are added in training order, one shrunken step at a
    /// time, so the result matches the training-time scores exactly.
    pub fn predict_score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let nu = self.config.learning_rate;
        Ok(self
            .trees
            .iter()
            .fold(self.init_score, |score, tree| score + nu * tree.predict(x)))
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        self.predict_score(x).map(sigmoid)
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<i8> {
        self.predict_proba(x).map(label_from_proba)
    }

    pub fn predict_proba_all(&self, data: &Dataset) -> Result<Vec<f64>> {
        (0..data.n_rows()).map(|i| self.predict_proba(data.row(i))).collect()
    }

    /// Plain-text form: a magic line, the config, then one preorder line per tree.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "config {}", self.config.to_inline());
        let _ = writeln!(out, "init_score {:?}", self.init_score);
        let _ = writeln!(out, "n_features {}", self.n_features);
        let _ = writeln!(out, "trees {}", self.trees.len());
        for tree in &self.trees {
            let _ = writeln!(out, "{}", tree.to_preorder());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next = |prefix: &str| -> Result<(usize, String)> {
            let (n, line) = lines.next().ok_or_else(|| Error::ModelFormat {
                line: 0,
                msg: format!("unexpected end of file, expected {prefix:?}"),
            })?;
            let rest = line.strip_prefix(prefix).ok_or_else(|| Error::ModelFormat {
                line: n + 1,
                msg: format!("expected {prefix:?}"),
            })?;
            Ok((n + 1, rest.trim().to_string()))
        };
        let bad = |line: usize, msg: String| Error::ModelFormat { line, msg };

        next(MAGIC)?;
        let (n, config) = next("config")?;
        let config = BoostConfig::from_inline(&config).map_err(|e| bad(n, e.to_string()))?;
        let (n, init) = next("init_score")?;
        let init_score: f64 = init.parse().map_err(|_| bad(n, format!("bad init_score {init:?}")))?;
        let (n, d) = next("n_features")?;
        let n_features: usize = d.parse().map_err(|_| bad(n, format!("bad n_features {d:?}")))?;
        let (n, count) = next("trees")?;
        let count: usize = count.parse().map_err(|_| bad(n, format!("bad tree count {count:?}")))?;
        let mut trees = Vec::with_capacity(count);
        for _ in 0..count {
            let (n, line) = next("")?;
            let tree = RegressionTree::from_preorder(&line).map_err(|msg| bad(n, msg))?;
            if tree.max_feature().is_some_and(|f| f >= n_features) {
                return Err(bad(n, "split feature out of range".into()));
            }
            trees.push(tree);
        }
        Ok(Self {
            config,
            init_score,
            n_features,
            trees,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Logistic link with the score clamped to `[-50, 50]`.
pub fn sigmoid(score: f64) -> f64 {
    let s = score.clamp(-SCORE_CLAMP, SCORE_CLAMP);
    1.0 / (1.0 + (-s).exp())
}

/// `+1` iff `p >= 0.5`.
pub fn label_from_proba(p: f64) -> i8 {
    if p >= 0.5 {
        1
    } else {
        -1
    }
}
