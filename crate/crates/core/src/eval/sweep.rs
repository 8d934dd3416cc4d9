use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;

use crate::boosting::{BoostConfig, TrustMode};
use crate::data::{Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::noise::{NoiseKind, NoiseSpec};

use super::cv::{cross_validate_runs, CvOptions, MetricReport};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kind: NoiseKind,
    pub rate: f64,
    pub trust: TrustMode,
    pub report: MetricReport,
    /// Hash of every fold's test labels, in fold order.
    pub test_label_hash: u64,
}

/// One cross-validation per `(rate, trust mode)`, rates outermost.
///
/// `rates` must be ascending and valid for `kind`. All rates share the same
/// folds and noise seed, so rate 0 reproduces a noise-free run.
pub fn noise_sweep(
    dataset: &Dataset,
    config: &BoostConfig,
    folds: &FoldPlan,
    kind: NoiseKind,
    rates: &[f64],
    modes: &[TrustMode],
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if rates.is_empty() || modes.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep needs at least one rate and one mode".into(),
        ));
    }
    if rates.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("sweep rates must be ascending".into()));
    }
    let specs = rates
        .iter()
        .map(|&r| NoiseSpec::new(kind, r, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(rates.len() * modes.len());
    for spec in specs {
        for &trust in modes {
            let config = BoostConfig { trust, ..*config };
            let options = CvOptions {
                noise: Some(spec),
                ..CvOptions::default()
            };
            let started = std::time::Instant::now();
            let runs = cross_validate_runs(dataset, &config, folds, &options)?;
            let mut hasher = DefaultHasher::new();
            for run in &runs {
                run.test_labels.hash(&mut hasher);
            }
            let results = runs.into_iter().map(|r| r.result).collect();
            rows.push(SweepRow {
                kind,
                rate: spec.rate,
                trust,
                report: MetricReport::from_folds(results, started.elapsed().as_secs_f64()),
                test_label_hash: hasher.finish(),
            });
        }
    }
    Ok(rows)
}

/// Hash of the clean test labels for a fold plan, comparable with
/// [`SweepRow::test_label_hash`].
pub fn test_label_hash(dataset: &Dataset, folds: &FoldPlan) -> u64 {
    let mut hasher = DefaultHasher::new();
    for fold in 0..folds.k {
        let (_, test) = folds.split(fold);
        let labels: Vec<i8> = test.iter().map(|&i| dataset.labels()[i]).collect();
        labels.hash(&mut hasher);
    }
    hasher.finish()
}

pub const SWEEP_CSV_HEADER: &str =
    "kind,rate,mode,acc_mean,acc_std,f1_mean,f1_std,auc_mean,auc_std,log_loss_mean,log_loss_std,train_seconds";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W, timings: bool) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        let r = &row.report;
        let seconds: f64 = r.folds.iter().map(|f| f.train_seconds).sum();
        writeln!(
            out,
            "{},{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
            row.kind,
            row.rate,
            row.trust,
            r.acc.mean,
            r.acc.std,
            r.f1.mean,
            r.f1.std,
            r.auc.mean,
            r.auc.std,
            r.log_loss.mean,
            r.log_loss.std,
            if timings {
                format!("{seconds:.6}")
            } else {
                String::new()
            }
        )?;
    }
    Ok(())
}
