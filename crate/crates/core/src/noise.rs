//! Reproducible label and feature corruption.
//!
//! Every injector returns the corrupted dataset together with a
//! [`NoiseMask`] listing the affected row ids, so an experiment can be
//! audited or replayed from the clean data.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// Every label flips independently with probability `p`.
    Symmetric,
    /// Only positives flip, to `-1`, each with probability `p`.
    Asymmetric,
    /// An exact fraction `p` of rows gets Gaussian feature perturbation.
    Feature,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Symmetric => "symmetric",
            NoiseKind::Asymmetric => "asymmetric",
            NoiseKind::Feature => "feature",
        }
    }

    pub fn is_label_noise(self) -> bool {
        self != NoiseKind::Feature
    }

    fn check_rate(self, rate: f64) -> Result<()> {
        let ok = match self {
            // closed at 0.5: pure label noise
            NoiseKind::Symmetric | NoiseKind::Asymmetric => (0.0..=0.5).contains(&rate),
            NoiseKind::Feature => (0.0..=1.0).contains(&rate),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{self} noise rate {rate} out of range")))
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(NoiseKind::Symmetric),
            "asymmetric" => Ok(NoiseKind::Asymmetric),
            "feature" => Ok(NoiseKind::Feature),
            _ => Err(Error::InvalidArgument(format!("unknown noise kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, rate: f64, seed: u64) -> Result<Self> {
        kind.check_rate(rate)?;
        Ok(Self { kind, rate, seed })
    }
}

/// Row ids touched by one injection.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMask {
    pub rows: BTreeSet<usize>,
    pub spec: NoiseSpec,
}

impl NoiseMask {
    pub fn contains(&self, row_id: usize) -> bool {
        self.rows.contains(&row_id)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn empty(spec: NoiseSpec) -> Self {
        Self {
            rows: BTreeSet::new(),
            spec,
        }
    }

    /// Re-applies recorded label flips to a clean dataset.
    pub fn apply_labels(&self, clean: &Dataset) -> Dataset {
        let labels = clean
            .labels()
            .iter()
            .zip(clean.row_ids())
            .map(|(&y, id)| if self.contains(*id) { -y } else { y })
            .collect();
        clean.with_labels(labels)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row_id,kind")?;
        for id in &self.rows {
            writeln!(out, "{id},{}", self.spec.kind)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Row ids listed in a mask CSV written by [`NoiseMask::write_csv`].
pub fn read_mask_rows(path: &Path) -> Result<BTreeSet<usize>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let mut rows = BTreeSet::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let cell = record.get(0).unwrap_or("");
        let id = cell.parse().map_err(|_| Error::ParseCell {
            row: line + 1,
            column: "row_id".into(),
            value: cell.to_string(),
        })?;
        rows.insert(id);
    }
    Ok(rows)
}

pub fn inject(dataset: &Dataset, spec: &NoiseSpec) -> Result<(Dataset, NoiseMask)> {
    match spec.kind {
        NoiseKind::Symmetric => inject_symmetric(dataset, spec.rate, spec.seed),
        NoiseKind::Asymmetric => inject_asymmetric(dataset, spec.rate, spec.seed),
        NoiseKind::Feature => inject_feature_noise(dataset, spec.rate, spec.seed),
    }
}

pub fn inject_symmetric(dataset: &Dataset, p: f64, seed: u64) -> Result<(Dataset, NoiseMask)> {
    let spec = NoiseSpec::new(NoiseKind::Symmetric, p, seed)?;
    flip_labels(dataset, spec, |_| true)
}

pub fn inject_asymmetric(dataset: &Dataset, p: f64, seed: u64) -> Result<(Dataset, NoiseMask)> {
    let spec = NoiseSpec::new(NoiseKind::Asymmetric, p, seed)?;
    if dataset.n_positive() == 0 {
        return Err(Error::InvalidArgument("asymmetric noise needs positive rows".into()));
    }
    flip_labels(dataset, spec, |y| y == 1)
}

/// One Bernoulli draw per row, in row order, so masks depend only on the seed
/// and the row order; rows not eligible still consume their draw.
fn flip_labels(dataset: &Dataset, spec: NoiseSpec, eligible: impl Fn(i8) -> bool) -> Result<(Dataset, NoiseMask)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = BTreeSet::new();
    let labels = dataset
        .labels()
        .iter()
        .zip(dataset.row_ids())
        .map(|(&y, &id)| {
            let hit = rng.random::<f64>() < spec.rate;
            if hit && eligible(y) {
                rows.insert(id);
                -y
            } else {
                y
            }
        })
        .collect();
    Ok((dataset.with_labels(labels), NoiseMask { rows, spec }))
}

/// Adds `N(0, sd_j^2)` to every feature of `floor(p * n)` seeded rows, where
/// `sd_j` is the population standard deviation of column `j` in `dataset`.
pub fn inject_feature_noise(dataset: &Dataset, p: f64, seed: u64) -> Result<(Dataset, NoiseMask)> {
    let spec = NoiseSpec::new(NoiseKind::Feature, p, seed)?;
    let (n, d) = (dataset.n_rows(), dataset.n_features());
    let sd = column_std(dataset);
    let count = (p * n as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = index::sample(&mut rng, n, count).into_vec();
    chosen.sort_unstable();

    let mut features = dataset.features().to_vec();
    let mut rows = BTreeSet::new();
    for i in chosen {
        rows.insert(dataset.row_ids()[i]);
        for (j, &s) in sd.iter().enumerate() {
            if s > 0.0 {
                let normal = Normal::new(0.0, s).expect("positive finite sd");
                features[i * d + j] += normal.sample(&mut rng);
            }
        }
    }
    Ok((dataset.with_features(features), NoiseMask { rows, spec }))
}

fn column_std(dataset: &Dataset) -> Vec<f64> {
    let (n, d) = (dataset.n_rows() as f64, dataset.n_features());
    (0..d)
        .map(|j| {
            let mean = (0..dataset.n_rows()).map(|i| dataset.value(i, j)).sum::<f64>() / n;
            let var = (0..dataset.n_rows())
                .map(|i| (dataset.value(i, j) - mean).powi(2))
                .sum::<f64>()
                / n;
            var.sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{two_gaussians, SynthSpec};

    fn data(n: usize) -> Dataset {
        two_gaussians(&SynthSpec {
            n,
            d: 3,
            ..SynthSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_rate_is_identity() {
        let ds = data(100);
        for kind in [NoiseKind::Symmetric, NoiseKind::Asymmetric, NoiseKind::Feature] {
            let (noisy, mask) = inject(&ds, &NoiseSpec::new(kind, 0.0, 3).unwrap()).unwrap();
            assert!(mask.is_empty());
            assert_eq!(noisy, ds);
        }
    }

    #[test]
    fn symmetric_flip_count_within_three_sigma() {
        let ds = data(1000);
        let (noisy, mask) = inject_symmetric(&ds, 0.2, 5).unwrap();
        let sigma = (1000.0f64 * 0.2 * 0.8).sqrt();
        assert!((mask.len() as f64 - 200.0).abs() <= 3.0 * sigma, "{}", mask.len());
        assert_eq!(noisy.features(), ds.features());
        assert_eq!(mask.apply_labels(&ds), noisy);
        let (_, again) = inject_symmetric(&ds, 0.2, 5).unwrap();
        assert_eq!(mask, again);
    }

    #[test]
    fn asymmetric_flips_only_positives() {
        let ds = two_gaussians(&SynthSpec {
            n: 1000,
            d: 2,
            ..SynthSpec::default()
        })
        .unwrap();
        assert_eq!(ds.n_positive(), 500);
        let (noisy, mask) = inject_asymmetric(&ds, 0.3, 8).unwrap();
        for (k, id) in ds.row_ids().iter().enumerate() {
            if mask.contains(*id) {
                assert_eq!(ds.labels()[k], 1);
                assert_eq!(noisy.labels()[k], -1);
            }
        }
        let sigma = (500.0f64 * 0.3 * 0.7).sqrt();
        assert!((mask.len() as f64 - 150.0).abs() <= 3.0 * sigma, "{}", mask.len());
        assert_eq!(mask.apply_labels(&ds), noisy);
    }

    #[test]
    fn asymmetric_needs_positives() {
        let ds = Dataset::new(vec![0.0, 1.0], 1, vec![-1, -1]).unwrap();
        assert!(inject_asymmetric(&ds, 0.3, 1).is_err());
    }

    #[test]
    fn rate_ranges() {
        let ds = data(10);
        assert!(inject_symmetric(&ds, 0.51, 1).is_err());
        assert!(inject_symmetric(&ds, 0.5, 1).is_ok());
        assert!(inject_symmetric(&ds, -0.1, 1).is_err());
        assert!(inject_feature_noise(&ds, 1.0, 1).is_ok());
        assert!(inject_feature_noise(&ds, 1.1, 1).is_err());
    }

    #[test]
    fn feature_noise_exact_fraction() {
        let ds = data(200);
        let (noisy, mask) = inject_feature_noise(&ds, 0.5, 2).unwrap();
        assert_eq!(mask.len(), 100);
        assert_eq!(noisy.labels(), ds.labels());
        for (k, id) in ds.row_ids().iter().enumerate() {
            let changed = noisy.row(k) != ds.row(k);
            assert_eq!(changed, mask.contains(*id));
        }
    }

    #[test]
    fn feature_noise_skips_constant_columns() {
        let features: Vec<f64> = (0..20).flat_map(|i| [3.0, i as f64]).collect();
        let labels = (0..20).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let ds = Dataset::new(features, 2, labels).unwrap();
        let (noisy, mask) = inject_feature_noise(&ds, 1.0, 4).unwrap();
        assert_eq!(mask.len(), 20);
        assert!((0..20).all(|i| noisy.value(i, 0) == 3.0));
        assert!((0..20).any(|i| noisy.value(i, 1) != ds.value(i, 1)));
    }

    #[test]
    fn mask_csv() {
        let ds = data(50);
        let (_, mask) = inject_symmetric(&ds, 0.3, 1).unwrap();
        let mut buf = Vec::new();
        mask.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), mask.len() + 1);
        assert!(text.lines().skip(1).all(|l| l.ends_with(",symmetric")));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.csv");
        mask.save_csv(&path).unwrap();
        assert_eq!(read_mask_rows(&path).unwrap(), mask.rows);
    }
}
