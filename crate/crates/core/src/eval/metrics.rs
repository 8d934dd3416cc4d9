//! Binary classification metrics over `±1` labels and positive-class probabilities.

use crate::error::{Error, Result};

/// Lower clip for probabilities in [`log_loss`]; the upper clip is `1 - EPS`.
pub const PROBA_EPS: f64 = 1e-15;

fn check(labels: &[i8], probs: &[f64]) -> Result<()> {
    if labels.len() != probs.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            actual: probs.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    if let Some(&bad) = probs.iter().find(|p| !p.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    Ok(())
}

fn both_classes(labels: &[i8]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::TooFewLabels(1));
    }
    Ok((pos, neg))
}

/// Fraction of rows where `p >= 0.5` agrees with the label.
pub fn accuracy(labels: &[i8], probs: &[f64]) -> Result<f64> {
    check(labels, probs)?;
    let correct = labels
        .iter()
        .zip(probs)
        .filter(|&(&y, &p)| (p >= 0.5) == (y == 1))
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// F1 of the positive class; zero when precision and recall are both zero.
pub fn f1(labels: &[i8], probs: &[f64]) -> Result<f64> {
    check(labels, probs)?;
    both_classes(labels)?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&y, &p) in labels.iter().zip(probs) {
        match (p >= 0.5, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = tp as f64 / (tp + fn_) as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// ROC AUC from the Mann-Whitney U statistic; tied scores get average ranks
/// (half credit per tied pair).
pub fn auc(labels: &[i8], probs: &[f64]) -> Result<f64> {
    check(labels, probs)?;
    let (pos, neg) = both_classes(labels)?;
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && probs[order[end]] == probs[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share their average
        let avg_rank = (start + 1 + end) as f64 / 2.0;
        let positives = order[start..end].iter().filter(|&&i| labels[i] == 1).count();
        rank_sum += avg_rank * positives as f64;
        start = end;
    }
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Mean binary cross-entropy with probabilities clipped to `[1e-15, 1 - 1e-15]`.
pub fn log_loss(labels: &[i8], probs: &[f64]) -> Result<f64> {
    check(labels, probs)?;
    let total: f64 = labels
        .iter()
        .zip(probs)
        .map(|(&y, &p)| {
            let q = p.clamp(PROBA_EPS, 1.0 - PROBA_EPS);
            if y == 1 {
                -q.ln()
            } else {
                -(1.0 - q).ln()
            }
        })
        .sum();
    Ok(total / labels.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub acc: f64,
    pub f1: f64,
    pub auc: f64,
    pub log_loss: f64,
}

pub fn score_all(labels: &[i8], probs: &[f64]) -> Result<Scores> {
    Ok(Scores {
        acc: accuracy(labels, probs)?,
        f1: f1(labels, probs)?,
        auc: auc(labels, probs)?,
        log_loss: log_loss(labels, probs)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(labels: &[i8], probs: &[f64]) -> f64 {
        let (mut credit, mut pairs) = (0.0, 0.0);
        for i in 0..labels.len() {
            for j in 0..labels.len() {
                if labels[i] == 1 && labels[j] == -1 {
                    pairs += 1.0;
                    credit += match probs[i].partial_cmp(&probs[j]).unwrap() {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => 0.5,
                        std::cmp::Ordering::Less => 0.0,
                    };
                }
            }
        }
        credit / pairs
    }

    #[test]
    fn perfect_ranking() {
        assert_eq!(auc(&[-1, -1, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
    }

    #[test]
    fn uninformative_predictor() {
        let labels = [1, -1, 1, -1];
        let probs = [0.5; 4];
        assert_eq!(auc(&labels, &probs).unwrap(), 0.5);
        assert!((log_loss(&labels, &probs).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn four_point_example() {
        let labels = [1, 1, -1, -1];
        let probs = [0.9, 0.4, 0.6, 0.1];
        assert_eq!(auc(&labels, &probs).unwrap(), 0.75);
        assert_eq!(accuracy(&labels, &probs).unwrap(), 0.5);
        assert_eq!(f1(&labels, &probs).unwrap(), 0.5);
    }

    #[test]
    fn f1_zero_when_nothing_predicted_positive() {
        assert_eq!(f1(&[1, -1], &[0.1, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn threshold_tie_is_positive() {
        assert_eq!(accuracy(&[1], &[0.5]).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        assert!(auc(&[1, 1], &[0.2, 0.3]).is_err());
        assert!(f1(&[-1, -1], &[0.2, 0.3]).is_err());
        assert!(accuracy(&[1], &[0.2, 0.3]).is_err());
        assert!(log_loss(&[1], &[f64::NAN]).is_err());
    }

    #[test]
    fn log_loss_clips() {
        let ll = log_loss(&[1], &[0.0]).unwrap();
        assert!((ll - (-(1e-15f64).ln())).abs() < 1e-9);
    }

    #[test]
    fn base_rate_minimizes_constant_log_loss() {
        let labels: Vec<i8> = (0..40).map(|i| if i % 4 == 0 { 1 } else { -1 }).collect();
        let at = |q: f64| log_loss(&labels, &vec![q; labels.len()]).unwrap();
        let best = (1..1000)
            .map(|k| k as f64 / 1000.0)
            .min_by(|a, b| at(*a).total_cmp(&at(*b)))
            .unwrap();
        assert!((best - 0.25).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_count(
            rows in prop::collection::vec((any::<bool>(), 0u8..20), 2..200)
        ) {
            let labels: Vec<i8> = rows.iter().map(|&(b, _)| if b { 1 } else { -1 }).collect();
            let probs: Vec<f64> = rows.iter().map(|&(_, p)| f64::from(p) / 20.0).collect();
            prop_assume!(labels.contains(&1) && labels.contains(&-1));
            let fast = auc(&labels, &probs).unwrap();
            prop_assert!((fast - brute_auc(&labels, &probs)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&fast));
        }
    }
}
