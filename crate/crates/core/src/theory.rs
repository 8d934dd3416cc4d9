//! Numerical checks of the trust-weight bounds on empirical complexity samples.
//!
//! Every check uses the sample's own empirical distribution, so the bounds
//! hold exactly (up to floating-point rounding) rather than asymptotically.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::boosting::RunTrace;
use crate::error::{Error, Result};
use crate::noise::NoiseMask;

/// Slack allowed on bound comparisons.
pub const BOUND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    Clean,
    Noisy,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Clean => "clean",
            Group::Noisy => "noisy",
        })
    }
}

/// Complexity values of one group of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexitySample {
    values: Vec<f64>,
    group: Group,
}

impl ComplexitySample {
    pub fn new(values: Vec<f64>, group: Group) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(format!("{group} complexity sample is empty")));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(Self { values, group })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `max - min`.
    pub fn range(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.values.len() as f64
    }

    /// Mean trust `mean(exp(-C))`.
    pub fn mean_trust(&self) -> f64 {
        self.values.iter().map(|v| (-v).exp()).sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub empirical_tau: f64,
    pub mean_complexity: f64,
    pub range: f64,
    /// `exp(-mean)`
    pub jensen_lower: f64,
    /// `exp(-mean + range^2 / 8)`
    pub hoeffding_upper: f64,
    /// `exp(-mean + var / 2)` with the plug-in variance. Informational.
    pub subgaussian_upper: Option<f64>,
    pub jensen_satisfied: bool,
    pub hoeffding_satisfied: bool,
    pub subgaussian_satisfied: Option<bool>,
}

impl BoundReport {
    pub fn satisfied(&self) -> bool {
        self.jensen_satisfied && self.hoeffding_satisfied
    }
}

/// Checks `exp(-mean) <= mean(exp(-C)) <= exp(-mean + R^2/8)`.
pub fn trust_bound_check(sample: &ComplexitySample) -> BoundReport {
    let empirical_tau = sample.mean_trust();
    let mean = sample.mean();
    let range = sample.range();
    let jensen_lower = (-mean).exp();
    let hoeffding_upper = (-mean + range * range / 8.0).exp();
    let subgaussian_upper = (sample.len() > 1).then(|| (-mean + sample.variance() / 2.0).exp());
    BoundReport {
        empirical_tau,
        mean_complexity: mean,
        range,
        jensen_lower,
        hoeffding_upper,
        subgaussian_upper,
        jensen_satisfied: jensen_lower <= empirical_tau + BOUND_TOLERANCE,
        hoeffding_satisfied: empirical_tau <= hoeffding_upper + BOUND_TOLERANCE,
        subgaussian_satisfied: subgaussian_upper.map(|u| empirical_tau <= u + BOUND_TOLERANCE),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub clean: BoundReport,
    pub noisy: BoundReport,
    /// `tau_noisy / tau_clean`
    pub empirical_ratio: f64,
    /// `mean_noisy - mean_clean`
    pub gap: f64,
    /// `R_noisy^2 / 8`
    pub correction: f64,
    /// `exp(-gap + correction)`
    pub bound: f64,
    pub bound_satisfied: bool,
    /// Whether the gap exceeds the correction, i.e. noisy rows are
    /// guaranteed less trust than clean ones.
    pub downweights_noisy: bool,
}

/// Bounds the noisy/clean trust ratio by applying the upper bound to the
/// noisy group and the lower bound to the clean group.
pub fn ratio_bound_check(clean: &ComplexitySample, noisy: &ComplexitySample) -> RatioReport {
    let c = trust_bound_check(clean);
    let n = trust_bound_check(noisy);
    let empirical_ratio = n.empirical_tau / c.empirical_tau;
    let gap = n.mean_complexity - c.mean_complexity;
    let correction = n.range * n.range / 8.0;
    let bound = (-gap + correction).exp();
    // the ratio bound only follows when both per-group bounds hold
    let premises = c.jensen_satisfied && n.hoeffding_satisfied;
    RatioReport {
        clean: c,
        noisy: n,
        empirical_ratio,
        gap,
        correction,
        bound,
        bound_satisfied: !premises || empirical_ratio <= bound * (1.0 + BOUND_TOLERANCE) + BOUND_TOLERANCE,
        downweights_noisy: gap > correction,
    }
}

/// Smallest group size for which a Hoeffding radius of `epsilon` holds with
/// probability `1 - delta`: `ceil(ln(2/delta) / (2 epsilon^2))`.
pub fn required_sample_size(epsilon: f64, delta: f64) -> Result<usize> {
    check_eps_delta(epsilon, delta)?;
    Ok(((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil() as usize)
}

/// Hoeffding confidence radius `sqrt(ln(2/delta) / (2n))` for a mean of `n`
/// values in `[0, 1]`.
pub fn hoeffding_radius(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

fn check_eps_delta(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must be in (0, 1), got {delta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityReport {
    pub iteration: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub n_clean: usize,
    pub n_noisy: usize,
    pub mean_clean: f64,
    pub mean_noisy: f64,
    /// `mean_noisy - mean_clean`
    pub gap: f64,
    pub radius_clean: f64,
    pub radius_noisy: f64,
    pub required_n: usize,
    /// `gap > 2 epsilon` and both groups have at least `required_n` rows.
    pub separable: bool,
}

impl SeparabilityReport {
    pub fn write_kv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration = {}", self.iteration)?;
        writeln!(out, "epsilon = {:?}", self.epsilon)?;
        writeln!(out, "delta = {:?}", self.delta)?;
        writeln!(out, "n_clean = {}", self.n_clean)?;
        writeln!(out, "n_noisy = {}", self.n_noisy)?;
        writeln!(out, "mean_clean = {:?}", self.mean_clean)?;
        writeln!(out, "mean_noisy = {:?}", self.mean_noisy)?;
        writeln!(out, "gap = {:?}", self.gap)?;
        writeln!(out, "radius_clean = {:?}", self.radius_clean)?;
        writeln!(out, "radius_noisy = {:?}", self.radius_noisy)?;
        writeln!(out, "required_n = {}", self.required_n)?;
        writeln!(out, "separable = {}", self.separable)
    }
}

/// Splits per-row complexities into `(clean, noisy)` samples.
pub fn split_by_rows(
    row_ids: &[usize],
    values: &[f64],
    noisy_rows: &BTreeSet<usize>,
) -> Result<(ComplexitySample, ComplexitySample)> {
    if row_ids.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: row_ids.len(),
            actual: values.len(),
        });
    }
    let (mut clean, mut noisy) = (Vec::new(), Vec::new());
    for (id, &c) in row_ids.iter().zip(values) {
        if noisy_rows.contains(id) {
            noisy.push(c);
        } else {
            clean.push(c);
        }
    }
    if clean.is_empty() || noisy.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "mask must mark some but not all rows ({} of {} marked)",
            noisy.len(),
            row_ids.len()
        )));
    }
    Ok((
        ComplexitySample::new(clean, Group::Clean)?,
        ComplexitySample::new(noisy, Group::Noisy)?,
    ))
}

/// Normalized complexities of a trace at `iteration`, split by `mask`
/// into `(clean, noisy)`.
pub fn split_complexities(
    trace: &RunTrace,
    iteration: usize,
    mask: &NoiseMask,
) -> Result<(ComplexitySample, ComplexitySample)> {
    let snap = trace.at(iteration).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "iteration {iteration} outside trace of {} iterations",
            trace.iterations()
        ))
    })?;
    if snap.trust.normalized.len() != trace.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "iteration {iteration} has no tracked complexities"
        )));
    }
    split_by_rows(&trace.row_ids, &snap.trust.normalized, &mask.rows)
}

/// Compares mean normalized complexity of noisy and clean rows at
/// `iteration` against Hoeffding radii at confidence `1 - delta`.
pub fn separability_report(
    trace: &RunTrace,
    iteration: usize,
    mask: &NoiseMask,
    epsilon: f64,
    delta: f64,
) -> Result<SeparabilityReport> {
    check_eps_delta(epsilon, delta)?;
    let (clean, noisy) = split_complexities(trace, iteration, mask)?;
    separability(iteration, &clean, &noisy, epsilon, delta)
}

pub fn separability(
    iteration: usize,
    clean: &ComplexitySample,
    noisy: &ComplexitySample,
    epsilon: f64,
    delta: f64,
) -> Result<SeparabilityReport> {
    let required_n = required_sample_size(epsilon, delta)?;
    let (mean_clean, mean_noisy) = (clean.mean(), noisy.mean());
    let gap = mean_noisy - mean_clean;
    Ok(SeparabilityReport {
        iteration,
        epsilon,
        delta,
        n_clean: clean.len(),
        n_noisy: noisy.len(),
        mean_clean,
        mean_noisy,
        gap,
        radius_clean: hoeffding_radius(clean.len(), delta),
        radius_noisy: hoeffding_radius(noisy.len(), delta),
        required_n,
        separable: gap > 2.0 * epsilon && clean.len() >= required_n && noisy.len() >= required_n,
    })
}

/// Reads `(iteration, row_ids, normalized complexities)` from a trace CSV
/// written by [`RunTrace::write_csv`]. `None` picks the last iteration.
pub fn read_trace_complexities(path: &Path, iteration: Option<usize>) -> Result<(usize, Vec<usize>, Vec<f64>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidDataset(format!("{}: missing column {name}", path.display())))
    };
    let (it_col, id_col, c_col) = (col("iteration")?, col("row_id")?, col("normalized_C")?);
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |c: usize| record.get(c).unwrap_or("");
        let parse_err = |c: usize| Error::ParseCell {
            row: line + 1,
            column: headers.get(c).unwrap_or("").to_string(),
            value: cell(c).to_string(),
        };
        let it: usize = cell(it_col).parse().map_err(|_| parse_err(it_col))?;
        let id: usize = cell(id_col).parse().map_err(|_| parse_err(id_col))?;
        let c: f64 = cell(c_col).parse().map_err(|_| parse_err(c_col))?;
        rows.push((it, id, c));
    }
    let last = rows
        .iter()
        .map(|r| r.0)
        .max()
        .ok_or_else(|| Error::InvalidDataset(format!("{}: empty trace", path.display())))?;
    let iteration = iteration.unwrap_or(last);
    let (ids, values) = rows
        .iter()
        .filter(|r| r.0 == iteration)
        .map(|r| (r.1, r.2))
        .unzip::<_, _, Vec<_>, Vec<_>>();
    if ids.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "iteration {iteration} not in trace (last is {last})"
        )));
    }
    Ok((iteration, ids, values))
}
