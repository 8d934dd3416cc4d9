//! Residual-history encoding, LZ76 complexity and trust weights.
//!
//! Each training row accumulates one symbol per boosting iteration. The
//! history's Lempel-Ziv (1976) complexity is min-max normalized across rows,
//! and the row's tree-fit weight becomes `|g| * exp(-normalized)`.
//!
//! Two LZ76 parsers are provided. [`lz76_complexity`] parses a whole
//! sequence from scratch (Kaspar-Schuster scan); [`Lz76Parser`] keeps the
//! scan state between appends. Both must agree on every sequence.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// How a pseudo-residual becomes a history symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// `1` iff `g > 0`.
    BinarySign,
    /// `1` iff `g` increased since the previous iteration; sign rule on the first.
    BinaryDelta,
    /// Sign and above/below-median magnitude, four symbols.
    Quantized,
}

impl Encoding {
    pub fn alphabet_size(self) -> u8 {
        match self {
            Encoding::BinarySign | Encoding::BinaryDelta => 2,
            Encoding::Quantized => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::BinarySign => "binary-sign",
            Encoding::BinaryDelta => "binary-delta",
            Encoding::Quantized => "quantized",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary-sign" | "binary" | "sign" => Ok(Encoding::BinarySign),
            "binary-delta" | "delta" | "delta-sign" => Ok(Encoding::BinaryDelta),
            "quantized" => Ok(Encoding::Quantized),
            _ => Err(Error::InvalidArgument(format!("unknown encoding {s:?}"))),
        }
    }
}

/// Binarization rule for [`binarize_gradient`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryMode {
    Sign,
    DeltaSign,
}

/// `1` iff `g > 0` (sign mode) or `g - previous > 0` (delta mode). A zero
/// maps to `0`. Delta mode without a previous value falls back to sign mode.
pub fn binarize_gradient(g: f64, mode: BinaryMode, previous: Option<f64>) -> Result<u8> {
    if !g.is_finite() {
        return Err(Error::NonFinite(g));
    }
    let delta = match (mode, previous) {
        (BinaryMode::DeltaSign, Some(prev)) if !prev.is_finite() => return Err(Error::NonFinite(prev)),
        (BinaryMode::DeltaSign, Some(prev)) => g - prev,
        _ => g,
    };
    Ok(u8::from(delta > 0.0))
}

/// `2 * [g > 0] + [|g| >= threshold]`.
pub fn quantize_gradient(g: f64, magnitude_threshold: f64) -> Result<u8> {
    if !g.is_finite() {
        return Err(Error::NonFinite(g));
    }
    if !magnitude_threshold.is_finite() {
        return Err(Error::NonFinite(magnitude_threshold));
    }
    if magnitude_threshold <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "magnitude threshold must be positive, got {magnitude_threshold}"
        )));
    }
    Ok(2 * u8::from(g > 0.0) + u8::from(g.abs() >= magnitude_threshold))
}

/// Median of `|g|`, the quantization threshold for one iteration. Falls back
/// to the smallest positive `f64` when more than half the residuals are zero.
pub fn median_abs(gradients: &[f64]) -> f64 {
    if gradients.is_empty() {
        return f64::MIN_POSITIVE;
    }
    let mut abs: Vec<f64> = gradients.iter().map(|g| g.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len();
    let median = if n % 2 == 1 {
        abs[n / 2]
    } else {
        0.5 * (abs[n / 2 - 1] + abs[n / 2])
    };
    if median > 0.0 {
        median
    } else {
        f64::MIN_POSITIVE
    }
}

/// Append-only symbol history over a fixed alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    alphabet: u8,
    symbols: Vec<u8>,
}

impl SymbolSequence {
    pub fn new(alphabet: u8) -> Self {
        Self {
            alphabet,
            symbols: Vec::new(),
        }
    }

    pub fn from_symbols(alphabet: u8, symbols: &[u8]) -> Result<Self> {
        let mut seq = Self::new(alphabet);
        for &s in symbols {
            seq.push(s)?;
        }
        Ok(seq)
    }

    pub fn push(&mut self, symbol: u8) -> Result<()> {
        if symbol >= self.alphabet {
            return Err(Error::InvalidArgument(format!(
                "symbol {symbol} outside alphabet of size {}",
                self.alphabet
            )));
        }
        self.symbols.push(symbol);
        Ok(())
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn complexity(&self) -> usize {
        lz76_complexity(&self.symbols)
    }
}

impl fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Number of phrases in the exhaustive LZ76 parsing of `s`.
///
/// A phrase starting at `l` grows while it can be copied from a match that
/// starts before `l` (the source may overlap the phrase). The trailing
/// phrase counts even if it is reproducible. Worst case `O(n^2)`.
pub fn lz76_complexity(s: &[u8]) -> usize {
    let n = s.len();
    if n <= 1 {
        return n;
    }
    let (mut c, mut l, mut i, mut k, mut k_max) = (1, 1, 0, 1, 1);
    loop {
        if s[i + k - 1] == s[l + k - 1] {
            k += 1;
            if l + k > n {
                c += 1;
                break;
            }
        } else {
            k_max = k_max.max(k);
            i += 1;
            if i == l {
                c += 1;
                l += k_max;
                if l + 1 > n {
                    break;
                }
                i = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    c
}

/// LZ76 parser that resumes its scan on every appended symbol.
///
/// `closed` counts finished phrases; the phrase starting at `start` is still
/// open while `start < len` and counts as one more.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lz76Parser {
    symbols: Vec<u8>,
    closed: usize,
    start: usize,
    candidate: usize,
    matched: usize,
    longest: usize,
}

impl Lz76Parser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, symbol: u8) -> usize {
        self.symbols.push(symbol);
        let n = self.symbols.len();
        if n == 1 {
            // the first symbol has no history to copy from
            self.closed = 1;
            self.start = 1;
            self.candidate = 0;
            self.matched = 1;
            self.longest = 1;
            return 1;
        }
        let s = &self.symbols;
        while self.start + self.matched - 1 < n {
            if s[self.candidate + self.matched - 1] == s[self.start + self.matched - 1] {
                self.matched += 1;
            } else {
                self.longest = self.longest.max(self.matched);
                self.candidate += 1;
                if self.candidate == self.start {
                    self.closed += 1;
                    self.start += self.longest;
                    self.candidate = 0;
                    self.longest = 1;
                }
                self.matched = 1;
            }
        }
        self.complexity()
    }

    pub fn complexity(&self) -> usize {
        self.closed + usize::from(self.start < self.symbols.len())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Min-max scaling to `[0, 1]`. All zeros when every value is equal.
pub fn normalize_complexities(raw: &[usize]) -> Result<Vec<f64>> {
    let (&min, &max) = match (raw.iter().min(), raw.iter().max()) {
        (Some(min), Some(max)) => (min, max),
        _ => return Err(Error::InvalidArgument("no complexities to normalize".into())),
    };
    if max == min {
        return Ok(vec![0.0; raw.len()]);
    }
    let span = (max - min) as f64;
    Ok(raw.iter().map(|&c| (c - min) as f64 / span).collect())
}

/// Trust terms `exp(-c)` and weights `|g| * exp(-c)`.
pub fn trust_weights(gradients: &[f64], normalized: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if gradients.len() != normalized.len() {
        return Err(Error::LengthMismatch {
            expected: gradients.len(),
            actual: normalized.len(),
        });
    }
    if let Some(&bad) = normalized.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(Error::InvalidArgument(format!(
            "normalized complexity {bad} outside [0, 1]"
        )));
    }
    let trust: Vec<f64> = normalized.iter().map(|c| (-c).exp()).collect();
    let weights = gradients.iter().zip(&trust).map(|(g, t)| g.abs() * t).collect();
    Ok((trust, weights))
}

/// Complexity and weight state of every row at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustState {
    pub iteration: usize,
    pub raw_complexity: Vec<usize>,
    pub normalized: Vec<f64>,
    pub trust: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TrustState {
    pub fn compute(iteration: usize, raw_complexity: Vec<usize>, gradients: &[f64]) -> Result<Self> {
        let normalized = normalize_complexities(&raw_complexity)?;
        let (trust, weights) = trust_weights(gradients, &normalized)?;
        Ok(Self {
            iteration,
            raw_complexity,
            normalized,
            trust,
            weights,
        })
    }

    /// State for runs that do not track histories: `trust` fixed at 1.
    pub fn untracked(iteration: usize, weights: Vec<f64>) -> Self {
        let n = weights.len();
        Self {
            iteration,
            raw_complexity: vec![0; n],
            normalized: vec![0.0; n],
            trust: vec![1.0; n],
            weights,
        }
    }
}

/// Residual histories of all training rows.
#[derive(Debug, Clone)]
pub struct HistoryBank {
    encoding: Encoding,
    histories: Vec<SymbolSequence>,
    parsers: Option<Vec<Lz76Parser>>,
    previous: Option<Vec<f64>>,
}

impl HistoryBank {
    /// With `incremental`, complexities come from per-row [`Lz76Parser`]s
    /// instead of re-parsing each full history.
    pub fn new(n_rows: usize, encoding: Encoding, incremental: bool) -> Self {
        let alphabet = encoding.alphabet_size();
        Self {
            encoding,
            histories: vec![SymbolSequence::new(alphabet); n_rows],
            parsers: incremental.then(|| vec![Lz76Parser::new(); n_rows]),
            previous: None,
        }
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn histories(&self) -> &[SymbolSequence] {
        &self.histories
    }

    /// Encodes one iteration's pseudo-residuals and appends a symbol per row.
    pub fn append(&mut self, gradients: &[f64]) -> Result<()> {
        if gradients.len() != self.histories.len() {
            return Err(Error::LengthMismatch {
                expected: self.histories.len(),
                actual: gradients.len(),
            });
        }
        let symbols: Vec<u8> = match self.encoding {
            Encoding::BinarySign => gradients
                .iter()
                .map(|&g| binarize_gradient(g, BinaryMode::Sign, None))
                .collect::<Result<_>>()?,
            Encoding::BinaryDelta => {
                let prev = self.previous.as_deref();
                gradients
                    .iter()
                    .enumerate()
                    .map(|(i, &g)| binarize_gradient(g, BinaryMode::DeltaSign, prev.map(|p| p[i])))
                    .collect::<Result<_>>()?
            }
            Encoding::Quantized => {
                let threshold = median_abs(gradients);
                gradients
                    .iter()
                    .map(|&g| quantize_gradient(g, threshold))
                    .collect::<Result<_>>()?
            }
        };
        for (history, &s) in self.histories.iter_mut().zip(&symbols) {
            history.push(s)?;
        }
        if let Some(parsers) = &mut self.parsers {
            for (parser, &s) in parsers.iter_mut().zip(&symbols) {
                parser.push(s);
            }
        }
        if self.encoding == Encoding::BinaryDelta {
            self.previous = Some(gradients.to_vec());
        }
        Ok(())
    }

    /// Current LZ76 complexity of every history.
    pub fn complexities(&self) -> Vec<usize> {
        match &self.parsers {
            Some(parsers) => parsers.iter().map(Lz76Parser::complexity).collect(),
            None => self.histories.par_iter().map(SymbolSequence::complexity).collect(),
        }
    }
}
