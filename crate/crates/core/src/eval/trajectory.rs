//! Mean trust weight over iterations for noisy, hard and easy rows.

use std::fmt;
use std::io::Write;

use crate::boosting::RunTrace;
use crate::error::{Error, Result};
use crate::noise::NoiseMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Easy,
    Hard,
    Noisy,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Easy => "easy",
            Category::Hard => "hard",
            Category::Noisy => "noisy",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryCurve {
    pub category: Category,
    /// Trace row indices in this category.
    pub rows: Vec<usize>,
    /// Mean weight per iteration, index 0 = iteration 1.
    pub mean_weight: Vec<f64>,
    pub mean_trust: Vec<f64>,
}

impl CategoryCurve {
    /// Mean weight at a 1-based iteration.
    pub fn weight_at(&self, iteration: usize) -> f64 {
        self.mean_weight[iteration - 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySummary {
    pub curves: Vec<CategoryCurve>,
}

impl TrajectorySummary {
    pub fn curve(&self, category: Category) -> Option<&CategoryCurve> {
        self.curves.iter().find(|c| c.category == category)
    }

    pub const CSV_HEADER: &'static str = "iteration,category,rows,mean_weight,mean_trust";

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let iterations = self.curves.first().map_or(0, |c| c.mean_weight.len());
        for m in 0..iterations {
            for c in &self.curves {
                writeln!(
                    out,
                    "{},{},{},{:?},{:?}",
                    m + 1,
                    c.category,
                    c.rows.len(),
                    c.mean_weight[m],
                    c.mean_trust[m]
                )?;
            }
        }
        Ok(())
    }
}

/// Iteration whose scores define row difficulty: `max(1, M / 10)`.
pub fn margin_iteration(trace: &RunTrace) -> usize {
    (trace.iterations() / 10).max(1)
}

/// Margins `y * F` at [`margin_iteration`].
pub fn early_margins(trace: &RunTrace) -> Result<Vec<f64>> {
    let snap = trace
        .at(margin_iteration(trace))
        .ok_or_else(|| Error::InvalidArgument("trace has no iterations".into()))?;
    Ok(trace
        .labels
        .iter()
        .zip(&snap.scores)
        .map(|(&y, &f)| f64::from(y) * f)
        .collect())
}

/// Splits rows into noisy (in `mask`), hard (lowest quartile of clean
/// margins) and easy (highest quartile) and averages their weights per
/// iteration. Empty categories are dropped with a warning.
pub fn trajectory_summary(trace: &RunTrace, mask: Option<&NoiseMask>, margins: &[f64]) -> Result<TrajectorySummary> {
    let n = trace.n_rows();
    if margins.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: margins.len(),
        });
    }
    if trace.iterations() == 0 {
        return Err(Error::InvalidArgument("trace has no iterations".into()));
    }
    let is_noisy = |i: usize| mask.is_some_and(|m| m.contains(trace.row_ids[i]));
    let noisy: Vec<usize> = (0..n).filter(|&i| is_noisy(i)).collect();
    let mut clean: Vec<usize> = (0..n).filter(|&i| !is_noisy(i)).collect();
    clean.sort_by(|&a, &b| margins[a].total_cmp(&margins[b]).then(a.cmp(&b)));
    let quartile = if clean.len() >= 2 { (clean.len() / 4).max(1) } else { 0 };
    let mut hard = clean[..quartile].to_vec();
    let mut easy = clean[clean.len() - quartile..].to_vec();
    hard.sort_unstable();
    easy.sort_unstable();

    let mut curves = Vec::new();
    for (category, rows) in [(Category::Easy, easy), (Category::Hard, hard), (Category::Noisy, noisy)] {
        if rows.is_empty() {
            if category != Category::Noisy || mask.is_some_and(|m| !m.is_empty()) {
                log::warn!("trajectory category {category} is empty; omitted");
            }
            continue;
        }
        let mean = |values: &[f64]| rows.iter().map(|&i| values[i]).sum::<f64>() / rows.len() as f64;
        let mean_weight = trace.snapshots.iter().map(|s| mean(&s.trust.weights)).collect();
        let mean_trust = trace.snapshots.iter().map(|s| mean(&s.trust.trust)).collect();
        curves.push(CategoryCurve {
            category,
            rows,
            mean_weight,
            mean_trust,
        });
    }
    Ok(TrajectorySummary { curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boosting::{train, BoostConfig, Loss, TrustMode};
    use crate::noise::inject_symmetric;
    use crate::synth::{two_gaussians, SynthSpec};

    fn run(trust: TrustMode, rate: f64) -> (RunTrace, NoiseMask) {
        let ds = two_gaussians(&SynthSpec {
            n: 80,
            d: 3,
            ..SynthSpec::default()
        })
        .unwrap();
        let (noisy, mask) = inject_symmetric(&ds, rate, 3).unwrap();
        let config = BoostConfig {
            iterations: 20,
            loss: Loss::Squared,
            trust,
            ..BoostConfig::default()
        };
        (train(&noisy, &config).unwrap().1, mask)
    }

    #[test]
    fn no_noise_gives_easy_and_hard() {
        let (trace, mask) = run(TrustMode::Enabled, 0.0);
        let margins = early_margins(&trace).unwrap();
        let s = trajectory_summary(&trace, Some(&mask), &margins).unwrap();
        let cats: Vec<Category> = s.curves.iter().map(|c| c.category).collect();
        assert_eq!(cats, vec![Category::Easy, Category::Hard]);
        assert_eq!(s.curve(Category::Easy).unwrap().rows.len(), 20);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 20 * 2);
    }

    #[test]
    fn uniform_weights_give_flat_curves() {
        let (trace, mask) = run(TrustMode::Disabled, 0.2);
        let margins = early_margins(&trace).unwrap();
        let s = trajectory_summary(&trace, Some(&mask), &margins).unwrap();
        assert_eq!(s.curves.len(), 3);
        for c in &s.curves {
            assert!(c.mean_weight.iter().all(|&w| w == 1.0));
        }
    }

    #[test]
    fn hard_rows_have_lower_margins_than_easy() {
        let (trace, mask) = run(TrustMode::Enabled, 0.2);
        let margins = early_margins(&trace).unwrap();
        let s = trajectory_summary(&trace, Some(&mask), &margins).unwrap();
        let max_hard = s
            .curve(Category::Hard)
            .unwrap()
            .rows
            .iter()
            .map(|&i| margins[i])
            .fold(f64::MIN, f64::max);
        let min_easy = s
            .curve(Category::Easy)
            .unwrap()
            .rows
            .iter()
            .map(|&i| margins[i])
            .fold(f64::MAX, f64::min);
        assert!(max_hard <= min_easy);
        assert!(s
            .curve(Category::Noisy)
            .unwrap()
            .rows
            .iter()
            .all(|&i| mask.contains(trace.row_ids[i])));
    }

    #[test]
    fn margin_length_checked() {
        let (trace, _) = run(TrustMode::Enabled, 0.0);
        assert!(trajectory_summary(&trace, None, &[0.0]).is_err());
        assert_eq!(margin_iteration(&trace), 2);
    }
}
