//! Seeded synthetic classification tasks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Two unit-variance Gaussian classes, optionally padded with noise columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    /// Informative dimensions.
    pub d: usize,
    /// Pure N(0, 1) columns appended after the informative ones.
    pub distractors: usize,
    /// Euclidean distance between the class means.
    pub sep: f64,
    pub positive_fraction: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 400,
            d: 10,
            distractors: 0,
            sep: 4.0,
            positive_fraction: 0.5,
            seed: 42,
        }
    }
}

/// Class means sit at `±sep/2` along the diagonal of the informative block,
/// so the Bayes accuracy is `Phi(sep / 2)` for balanced classes.
pub fn two_gaussians(spec: &SynthSpec) -> Result<Dataset> {
    if spec.n < 2 || spec.d == 0 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 and d >= 1, got n = {} and d = {}",
            spec.n, spec.d
        )));
    }
    if !(spec.sep.is_finite() && spec.sep >= 0.0) {
        return Err(Error::InvalidArgument(format!("separation {} must be >= 0", spec.sep)));
    }
    if !(spec.positive_fraction > 0.0 && spec.positive_fraction < 1.0) {
        return Err(Error::InvalidArgument("positive_fraction must lie in (0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_pos = ((spec.n as f64 * spec.positive_fraction).round() as usize).clamp(1, spec.n - 1);
    let mut labels: Vec<i8> = (0..spec.n).map(|i| if i < n_pos { 1 } else { -1 }).collect();
    labels.shuffle(&mut rng);

    let width = spec.d + spec.distractors;
    let offset = spec.sep / 2.0 / (spec.d as f64).sqrt();
    let mut features = Vec::with_capacity(spec.n * width);
    for &y in &labels {
        let shift = f64::from(y) * offset;
        for _ in 0..spec.d {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(z + shift);
        }
        for _ in 0..spec.distractors {
            features.push(StandardNormal.sample(&mut rng));
        }
    }
    let names = (0..spec.d)
        .map(|j| format!("x{j}"))
        .chain((0..spec.distractors).map(|j| format!("noise{j}")))
        .collect();
    Dataset::new(features, width, labels)?.with_feature_names(names)
}
