//! Friedman rank test over algorithms evaluated on several datasets.

use crate::error::{Error, Result};

/// Datasets × algorithms score table.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix {
    /// `scores[dataset][algorithm]`
    pub scores: Vec<Vec<f64>>,
    pub higher_is_better: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub mean_ranks: Vec<f64>,
    pub statistic: f64,
    pub p_value: f64,
    pub n_datasets: usize,
}

/// Ranks every row (1 = best, ties share the average rank) and applies the
/// Friedman chi-square statistic with `A - 1` degrees of freedom.
pub fn friedman_test(matrix: &RankMatrix) -> Result<FriedmanResult> {
    let d = matrix.scores.len();
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 datasets, got {d}")));
    }
    let a = matrix.scores[0].len();
    if a < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 algorithms, got {a}")));
    }
    if let Some(row) = matrix.scores.iter().find(|r| r.len() != a) {
        return Err(Error::LengthMismatch {
            expected: a,
            actual: row.len(),
        });
    }
    if matrix.scores.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN in score matrix".into()));
    }
    let mut totals = vec![0.0; a];
    for row in &matrix.scores {
        let oriented: Vec<f64> = if matrix.higher_is_better {
            row.iter().map(|v| -v).collect()
        } else {
            row.clone()
        };
        for (total, r) in totals.iter_mut().zip(average_ranks(&oriented)) {
            *total += r;
        }
    }
    let mean_ranks: Vec<f64> = totals.iter().map(|t| t / d as f64).collect();
    friedman_from_mean_ranks(&mean_ranks, d)
}

/// Friedman statistic from published mean ranks:
/// `12 D / (A (A + 1)) * sum R_j^2 - 3 D (A + 1)`.
pub fn friedman_from_mean_ranks(mean_ranks: &[f64], n_datasets: usize) -> Result<FriedmanResult> {
    let a = mean_ranks.len();
    if a < 2 || n_datasets < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 datasets and 2 algorithms".into(),
        ));
    }
    let (d, af) = (n_datasets as f64, a as f64);
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let statistic = (12.0 * d / (af * (af + 1.0)) * sum_sq - 3.0 * d * (af + 1.0)).max(0.0);
    Ok(FriedmanResult {
        mean_ranks: mean_ranks.to_vec(),
        statistic,
        p_value: chi_square_sf(statistic, af - 1.0),
        n_datasets,
    })
}

/// Ascending ranks starting at 1; tied values share their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Upper tail `P(X > x)` of a chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(dof / 2.0, x / 2.0)
}

/// `Q(a, x) = Gamma(a, x) / Gamma(a)`: power series below `x = a + 1`,
/// Lentz continued fraction above.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

const MAX_ITER: usize = 500;
const TOL: f64 = 1e-15;

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * TOL {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < TOL {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Lanczos approximation (g = 7, n = 9), accurate to ~1e-15 for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
