//! Datasets, CSV ingestion, stratified folds and class rebalancing.
//!
//! Labels are canonicalized to `-1`/`+1` when a [`Dataset`] is built; all
//! downstream math relies on that convention. Every row carries a stable
//! `row_id` that survives subsetting, so noise masks and traces can refer to
//! rows of the original file.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense binary-classification dataset, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<i8>,
    row_ids: Vec<usize>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset from row-major features. Row ids default to `0..n`.
    pub fn new(features: Vec<f64>, n_features: usize, labels: Vec<i8>) -> Result<Self> {
        let row_ids = (0..labels.len()).collect();
        Self::with_row_ids(features, n_features, labels, row_ids)
    }

    pub fn with_row_ids(features: Vec<f64>, n_features: usize, labels: Vec<i8>, row_ids: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || n_features == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one row and one feature, got {n}x{n_features}"
            )));
        }
        if features.len() != n * n_features {
            return Err(Error::LengthMismatch {
                expected: n * n_features,
                actual: features.len(),
            });
        }
        if row_ids.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: row_ids.len(),
            });
        }
        if let Some(&bad) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidDataset(format!("label {bad} is not -1 or +1")));
        }
        let mut sorted = row_ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDataset("duplicate row ids".into()));
        }
        Ok(Self {
            features,
            n_features,
            labels,
            row_ids,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features {
            return Err(Error::LengthMismatch {
                expected: self.n_features,
                actual: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.features[i * self.n_features + feature]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> f64 {
        f64::from(self.labels[i])
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    /// Rows at `indices`, in the given order, keeping their row ids.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let row_ids = indices.iter().map(|&i| self.row_ids[i]).collect();
        let mut out = Self::with_row_ids(features, self.n_features, labels, row_ids)?;
        out.feature_names = self.feature_names.clone();
        Ok(out)
    }

    /// Same rows with replaced labels. Used by the label-noise injectors.
    pub(crate) fn with_labels(&self, labels: Vec<i8>) -> Self {
        debug_assert_eq!(labels.len(), self.labels.len());
        Self { labels, ..self.clone() }
    }

    pub(crate) fn with_features(&self, features: Vec<f64>) -> Self {
        debug_assert_eq!(features.len(), self.features.len());
        Self {
            features,
            ..self.clone()
        }
    }

    /// Writes the dataset as CSV with a trailing `label` column holding `1`/`-1`.
    ///
    /// Values use the shortest representation that parses back to the same
    /// `f64`, so [`load_csv`] with `positive_label = "1"` reproduces the data
    /// bit-exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv_to(&mut out)
            .and_then(|()| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// [`Dataset::write_csv`] into any writer.
    pub fn write_csv_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = match &self.feature_names {
            Some(names) => names.clone(),
            None => (0..self.n_features).map(|j| format!("x{j}")).collect(),
        };
        writeln!(out, "{},label", header.join(","))?;
        for i in 0..self.n_rows() {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{}", row.join(","), self.labels[i])?;
        }
        Ok(())
    }
}

/// How the label column is located in a CSV header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl LabelColumn {
    /// Interprets a purely numeric token as a zero-based index, anything else as a name.
    pub fn parse(token: &str) -> Self {
        match token.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(token.to_string()),
        }
    }
}

/// Loads a headered CSV. Rows keep file order and get row ids `0..n`.
///
/// A row is labelled `+1` iff its raw label token equals `positive_label`.
/// Any non-finite or unparsable feature cell is an error naming the row
/// (1-based, header excluded) and the column.
pub fn load_csv(path: &Path, label: &LabelColumn, positive_label: &str) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_idx = match label {
        LabelColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?,
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => return Err(Error::MissingLabelColumn(i.to_string())),
    };
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut distinct: Vec<String> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let value: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::ParseCell {
                    row: r + 1,
                    column: headers[j].clone(),
                    value: cell.to_string(),
                })?;
            features.push(value);
        }
        let raw = &record[label_idx];
        if !distinct.iter().any(|d| d == raw) {
            distinct.push(raw.to_string());
        }
        labels.push(if raw == positive_label { 1 } else { -1 });
    }
    if distinct.len() < 2 {
        return Err(Error::TooFewLabels(distinct.len()));
    }
    Dataset::new(features, feature_names.len(), labels)?.with_feature_names(feature_names)
}

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// `(train, test)` row indices for one fold, each in ascending order.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..self.assignments.len()).partition(|&i| self.assignments[i] == fold);
        (train, test)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold plan: each class is shuffled with the seed, then dealt
/// round-robin into folds. The second class continues the deal where the
/// first stopped so fold sizes differ by at most one.
pub fn stratified_kfold(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    let n = dataset.n_rows();
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!(
            "fold count k = {k} must satisfy 2 <= k <= {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; n];
    let mut next = 0;
    for class in [-1i8, 1] {
        let mut members: Vec<usize> = (0..n).filter(|&i| dataset.labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                label: class,
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, assignments, seed })
}

/// Subsamples the majority class without replacement down to the minority
/// size. Every minority row is kept; output preserves the input row order.
pub fn random_undersample(dataset: &Dataset, seed: u64) -> Result<Dataset> {
    let n = dataset.n_rows();
    let positives: Vec<usize> = (0..n).filter(|&i| dataset.labels[i] == 1).collect();
    let negatives: Vec<usize> = (0..n).filter(|&i| dataset.labels[i] == -1).collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::TooFewLabels(1));
    }
    if positives.len() == negatives.len() {
        return Ok(dataset.clone());
    }
    let (minority, majority) = if positives.len() < negatives.len() {
        (positives, negatives)
    } else {
        (negatives, positives)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kept = index::sample(&mut rng, majority.len(), minority.len());
    let mut rows: Vec<usize> = kept.iter().map(|j| majority[j]).chain(minority).collect();
    rows.sort_unstable();
    dataset.subset(&rows)
}
