use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Training loss for labels in `{-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    /// `log(1 + exp(-y F))`
    Logistic,
    /// `(y - F)^2 / 2`
    Squared,
}

impl Loss {
    /// Negative gradient of the loss with respect to the score.
    pub fn gradient(self, y: f64, score: f64) -> f64 {
        match self {
            Loss::Logistic => logistic_gradient(y, score),
            Loss::Squared => squared_gradient(y, score),
        }
    }

    pub fn value(self, y: f64, score: f64) -> f64 {
        match self {
            Loss::Logistic => logistic_loss(y, score),
            Loss::Squared => 0.5 * (y - score) * (y - score),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Loss::Logistic => "logistic",
            Loss::Squared => "squared",
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" | "log" => Ok(Loss::Logistic),
            "squared" | "l2" => Ok(Loss::Squared),
            _ => Err(Error::InvalidArgument(format!("unknown loss {s:?}"))),
        }
    }
}

/// `y / (1 + exp(y F))`. Past `y F > 500` the asymptote `y exp(-y F)` is used.
pub fn logistic_gradient(y: f64, score: f64) -> f64 {
    let margin = y * score;
    if margin > 500.0 {
        y * (-margin).exp()
    } else {
        y / (1.0 + margin.exp())
    }
}

pub fn logistic_loss(y: f64, score: f64) -> f64 {
    let margin = y * score;
    if margin > 0.0 {
        (-margin).exp().ln_1p()
    } else {
        -margin + margin.exp().ln_1p()
    }
}

pub fn squared_gradient(y: f64, score: f64) -> f64 {
    y - score
}

/// Constant score minimizing the summed loss.
pub fn init_score(labels: &[i8], loss: Loss) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::InvalidDataset("no labels".into()));
    }
    let n = labels.len() as f64;
    match loss {
        Loss::Squared => Ok(labels.iter().map(|&y| f64::from(y)).sum::<f64>() / n),
        Loss::Logistic => {
            let pos = labels.iter().filter(|&&y| y == 1).count();
            if pos == 0 || pos == labels.len() {
                return Err(Error::TooFewLabels(1));
            }
            let p = pos as f64 / n;
            Ok((p / (1.0 - p)).ln())
        }
    }
}
