//! The boosting loop and its per-iteration trace.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use crate::complexity::{HistoryBank, TrustState};
use crate::data::Dataset;
use crate::error::{Error, Result};

use super::config::{BoostConfig, TrustMode};
use super::loss::init_score;
use super::model::Model;
use super::tree::{fit_tree_weighted, RegressionTree, TreeParams};

/// State of one boosting iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSnapshot {
    /// 1-based iteration number.
    pub iteration: usize,
    /// Pseudo-residuals at the scores before this iteration's update.
    pub gradients: Vec<f64>,
    pub trust: TrustState,
    /// Training scores after this iteration's update.
    pub scores: Vec<f64>,
    /// Mean training loss at `scores`.
    pub loss: f64,
}

/// Per-iteration record of a training run, rows identified by `row_ids`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub row_ids: Vec<usize>,
    pub labels: Vec<i8>,
    pub init_score: f64,
    pub snapshots: Vec<IterationSnapshot>,
}

impl RunTrace {
    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn iterations(&self) -> usize {
        self.snapshots.len()
    }

    /// Snapshot of a 1-based iteration.
    pub fn at(&self, iteration: usize) -> Option<&IterationSnapshot> {
        iteration.checked_sub(1).and_then(|i| self.snapshots.get(i))
    }

    pub const CSV_HEADER: &'static str = "iteration,row_id,raw_C,normalized_C,tau,weight";

    /// One line per (iteration, row).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for snap in &self.snapshots {
            let t = &snap.trust;
            for (i, id) in self.row_ids.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{:?},{:?},{:?}",
                    snap.iteration, id, t.raw_complexity[i], t.normalized[i], t.trust[i], t.weights[i]
                )?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace csv is ascii")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Wall-clock breakdown of a training run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrainTiming {
    /// History updates, LZ complexities, normalization and trust weights.
    pub trust: Duration,
    pub trees: Duration,
    pub total: Duration,
}

pub fn train(dataset: &Dataset, config: &BoostConfig) -> Result<(Model, RunTrace)> {
    train_timed(dataset, config).map(|(model, trace, _)| (model, trace))
}

/// Runs the boosting loop. Each iteration computes pseudo-residuals, extends
/// the residual histories, derives trust weights from their LZ76
/// complexities and fits a weighted tree, in that order.
pub fn train_timed(dataset: &Dataset, config: &BoostConfig) -> Result<(Model, RunTrace, TrainTiming)> {
    config.validate()?;
    let started = Instant::now();
    let n = dataset.n_rows();
    let labels: Vec<f64> = (0..n).map(|i| dataset.label(i)).collect();
    let f0 = init_score(dataset.labels(), config.loss)?;
    let params = TreeParams {
        max_depth: config.max_depth,
        min_samples_leaf: config.min_samples_leaf,
    };
    let nu = config.learning_rate;

    let mut scores = vec![f0; n];
    let mut histories =
        (config.trust == TrustMode::Enabled).then(|| HistoryBank::new(n, config.encoding, config.incremental_lz));
    let mut trees = Vec::with_capacity(config.iterations);
    let mut snapshots = Vec::with_capacity(config.iterations);
    let mut timing = TrainTiming::default();

    for m in 1..=config.iterations {
        let gradients: Vec<f64> = labels
            .iter()
            .zip(&scores)
            .map(|(&y, &f)| config.loss.gradient(y, f))
            .collect();

        let clock = Instant::now();
        let trust = match config.trust {
            TrustMode::Disabled => TrustState::untracked(m, vec![1.0; n]),
            TrustMode::MagnitudeOnly => TrustState::untracked(m, gradients.iter().map(|g| g.abs()).collect()),
            TrustMode::Enabled => {
                let bank = histories.as_mut().expect("histories exist when trust is enabled");
                bank.append(&gradients)?;
                TrustState::compute(m, bank.complexities(), &gradients)?
            }
        };
        timing.trust += clock.elapsed();

        let clock = Instant::now();
        let tree = match fit_tree_weighted(
            dataset.features(),
            dataset.n_features(),
            &gradients,
            &trust.weights,
            params,
        ) {
            Ok(tree) => tree,
            // every residual is exactly zero: nothing left to fit
            Err(Error::ZeroWeights) => RegressionTree::leaf(0.0),
            Err(e) => return Err(e),
        };
        timing.trees += clock.elapsed();

        for (i, score) in scores.iter_mut().enumerate() {
            *score += nu * tree.predict(dataset.row(i));
        }
        let loss = labels
            .iter()
            .zip(&scores)
            .map(|(&y, &f)| config.loss.value(y, f))
            .sum::<f64>()
            / n as f64;
        trees.push(tree);
        snapshots.push(IterationSnapshot {
            iteration: m,
            gradients,
            trust,
            scores: scores.clone(),
            loss,
        });
    }
    timing.total = started.elapsed();

    let model = Model {
        config: *config,
        init_score: f0,
        n_features: dataset.n_features(),
        trees,
    };
    let trace = RunTrace {
        row_ids: dataset.row_ids().to_vec(),
        labels: dataset.labels().to_vec(),
        init_score: f0,
        snapshots,
    };
    Ok((model, trace, timing))
}
