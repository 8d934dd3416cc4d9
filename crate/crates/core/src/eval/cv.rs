use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::boosting::{train_timed, BoostConfig, Model, RunTrace};
use crate::data::{random_undersample, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::noise::{inject, NoiseMask, NoiseSpec};

use super::metrics::{score_all, Scores};

/// Knobs for [`cross_validate_runs`] beyond the plain protocol.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CvOptions {
    /// Corrupts each training split; test splits stay clean.
    pub noise: Option<NoiseSpec>,
    /// Undersamples each training split with this seed (after the split).
    pub undersample_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub scores: Scores,
    pub n_train: usize,
    pub n_test: usize,
    pub noisy_rows: usize,
    pub train_seconds: f64,
    pub trust_seconds: f64,
}

/// Everything produced while evaluating one fold.
#[derive(Debug, Clone)]
pub struct FoldRun {
    pub result: FoldResult,
    pub model: Model,
    pub trace: RunTrace,
    pub mask: Option<NoiseMask>,
    /// Training split as the model saw it (after noise and rebalancing).
    pub train: Dataset,
    /// Labels of the clean test split.
    pub test_labels: Vec<i8>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    /// Mean and population standard deviation.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

/// Per-fold metrics with their mean and standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub folds: Vec<FoldResult>,
    pub acc: Summary,
    pub f1: Summary,
    pub auc: Summary,
    pub log_loss: Summary,
    pub wall_time_seconds: f64,
}

impl MetricReport {
    pub fn from_folds(folds: Vec<FoldResult>, wall_time_seconds: f64) -> Self {
        let pick = |f: fn(&FoldResult) -> f64| Summary::of(&folds.iter().map(f).collect::<Vec<_>>());
        Self {
            acc: pick(|r| r.scores.acc),
            f1: pick(|r| r.scores.f1),
            auc: pick(|r| r.scores.auc),
            log_loss: pick(|r| r.scores.log_loss),
            folds,
            wall_time_seconds,
        }
    }

    pub const CSV_HEADER: &'static str =
        "fold,acc,f1,auc,log_loss,n_train,n_test,noisy_rows,train_seconds,trust_seconds";

    /// Per-fold rows followed by `mean` and `std` rows.
    ///
    /// With `timings = false` the timing columns are left empty so the output
    /// is byte-reproducible.
    pub fn write_csv<W: Write>(&self, mut out: W, timings: bool) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let secs = |v: f64| if timings { format!("{v:.6}") } else { String::new() };
        for r in &self.folds {
            let s = r.scores;
            writeln!(
                out,
                "{},{:?},{:?},{:?},{:?},{},{},{},{},{}",
                r.fold,
                s.acc,
                s.f1,
                s.auc,
                s.log_loss,
                r.n_train,
                r.n_test,
                r.noisy_rows,
                secs(r.train_seconds),
                secs(r.trust_seconds)
            )?;
        }
        let train_total: f64 = self.folds.iter().map(|r| r.train_seconds).sum();
        let trust_total: f64 = self.folds.iter().map(|r| r.trust_seconds).sum();
        for (name, pick) in [
            ("mean", (|s: Summary| s.mean) as fn(Summary) -> f64),
            ("std", |s: Summary| s.std),
        ] {
            writeln!(
                out,
                "{name},{:?},{:?},{:?},{:?},,,,{},{}",
                pick(self.acc),
                pick(self.f1),
                pick(self.auc),
                pick(self.log_loss),
                if name == "mean" {
                    secs(train_total)
                } else {
                    String::new()
                },
                if name == "mean" {
                    secs(trust_total)
                } else {
                    String::new()
                },
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self, timings: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, timings).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("report csv is ascii")
    }
}

/// k-fold evaluation: corrupt the training split (if `noise`), train, score
/// on the clean test split.
pub fn cross_validate(
    dataset: &Dataset,
    config: &BoostConfig,
    folds: &FoldPlan,
    noise: Option<&NoiseSpec>,
) -> Result<MetricReport> {
    let options = CvOptions {
        noise: noise.copied(),
        ..CvOptions::default()
    };
    let started = Instant::now();
    let runs = cross_validate_runs(dataset, config, folds, &options)?;
    let results = runs.into_iter().map(|r| r.result).collect();
    Ok(MetricReport::from_folds(results, started.elapsed().as_secs_f64()))
}

/// Like [`cross_validate`] but keeps each fold's model, trace and noise mask.
/// Folds train in parallel; results come back in fold order.
pub fn cross_validate_runs(
    dataset: &Dataset,
    config: &BoostConfig,
    folds: &FoldPlan,
    options: &CvOptions,
) -> Result<Vec<FoldRun>> {
    if folds.assignments.len() != dataset.n_rows() {
        return Err(Error::LengthMismatch {
            expected: dataset.n_rows(),
            actual: folds.assignments.len(),
        });
    }
    (0..folds.k)
        .into_par_iter()
        .map(|fold| run_fold(dataset, config, folds, options, fold))
        .collect()
}

fn run_fold(
    dataset: &Dataset,
    config: &BoostConfig,
    folds: &FoldPlan,
    options: &CvOptions,
    fold: usize,
) -> Result<FoldRun> {
    let (train_idx, test_idx) = folds.split(fold);
    let mut train = dataset.subset(&train_idx)?;
    let test = dataset.subset(&test_idx)?;
    if let Some(seed) = options.undersample_seed {
        train = random_undersample(&train, seed.wrapping_add(fold as u64))?;
    }
    let mask = match &options.noise {
        Some(spec) => {
            let spec = NoiseSpec {
                seed: spec.seed.wrapping_add(fold as u64),
                ..*spec
            };
            let (noisy, mask) = inject(&train, &spec)?;
            train = noisy;
            Some(mask)
        }
        None => None,
    };
    let (model, trace, timing) = train_timed(&train, config)?;
    let probs = model.predict_proba_all(&test)?;
    let scores = score_all(test.labels(), &probs)?;
    let result = FoldResult {
        fold,
        scores,
        n_train: train.n_rows(),
        n_test: test.n_rows(),
        noisy_rows: mask.as_ref().map_or(0, NoiseMask::len),
        train_seconds: timing.total.as_secs_f64(),
        trust_seconds: timing.trust.as_secs_f64(),
    };
    Ok(FoldRun {
        result,
        model,
        trace,
        mask,
        train,
        test_labels: test.labels().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boosting::{Loss, TrustMode};
    use crate::data::stratified_kfold;
    use crate::noise::NoiseKind;
    use crate::synth::{two_gaussians, SynthSpec};

    fn small() -> (Dataset, FoldPlan, BoostConfig) {
        let ds = two_gaussians(&SynthSpec {
            n: 100,
            d: 3,
            ..SynthSpec::default()
        })
        .unwrap();
        let plan = stratified_kfold(&ds, 5, 42).unwrap();
        let config = BoostConfig {
            iterations: 10,
            loss: Loss::Squared,
            ..BoostConfig::default()
        };
        (ds, plan, config)
    }

    #[test]
    fn five_folds_reported() {
        let (ds, plan, config) = small();
        let report = cross_validate(&ds, &config, &plan, None).unwrap();
        assert_eq!(report.folds.len(), 5);
        assert!(report
            .folds
            .iter()
            .enumerate()
            .all(|(i, r)| r.fold == i && r.n_test == 20));
        let csv = report.to_csv_string(true);
        assert_eq!(csv.lines().count(), 1 + 5 + 2);
        let accs: Vec<f64> = report.folds.iter().map(|r| r.scores.acc).collect();
        assert_eq!(report.acc, Summary::of(&accs));
    }

    #[test]
    fn deterministic_without_timings() {
        let (ds, plan, config) = small();
        let a = cross_validate(&ds, &config, &plan, None).unwrap();
        let b = cross_validate(&ds, &config, &plan, None).unwrap();
        assert_eq!(a.to_csv_string(false), b.to_csv_string(false));
    }

    #[test]
    fn noise_only_touches_training_rows() {
        let (ds, plan, config) = small();
        let options = CvOptions {
            noise: Some(NoiseSpec::new(NoiseKind::Symmetric, 0.3, 9).unwrap()),
            ..CvOptions::default()
        };
        let runs = cross_validate_runs(&ds, &config, &plan, &options).unwrap();
        for run in &runs {
            let (_, test_idx) = plan.split(run.result.fold);
            let clean: Vec<i8> = test_idx.iter().map(|&i| ds.labels()[i]).collect();
            assert_eq!(run.test_labels, clean);
            let mask = run.mask.as_ref().unwrap();
            let test_ids: Vec<usize> = test_idx.iter().map(|&i| ds.row_ids()[i]).collect();
            assert!(test_ids.iter().all(|id| !mask.contains(*id)));
            assert!(!mask.is_empty());
        }
    }

    #[test]
    fn undersampling_after_split() {
        let ds = two_gaussians(&SynthSpec {
            n: 100,
            d: 2,
            positive_fraction: 0.2,
            ..SynthSpec::default()
        })
        .unwrap();
        let plan = stratified_kfold(&ds, 5, 1).unwrap();
        let options = CvOptions {
            undersample_seed: Some(3),
            ..CvOptions::default()
        };
        let config = BoostConfig {
            iterations: 3,
            trust: TrustMode::Disabled,
            ..BoostConfig::default()
        };
        let runs = cross_validate_runs(&ds, &config, &plan, &options).unwrap();
        for run in runs {
            assert_eq!(run.train.n_positive() * 2, run.train.n_rows());
            assert_eq!(run.result.n_test, 20);
        }
    }
}
