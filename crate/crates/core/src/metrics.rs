//! Overlap scores for binary patterns and the summary statistics built on
//! top of them.

use crate::error::{Error, Result};
use crate::patterns::{Dataset, TactilePattern};

/// Dice coefficient `2|A ∩ B| / (|A| + |B|)`. Two empty patterns score 1.
pub fn dice(a: &TactilePattern, b: &TactilePattern) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "dice of patterns with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mut both, mut total) = (0usize, 0usize);
    for (&x, &y) in a.cells().iter().zip(b.cells()) {
        both += usize::from(x && y);
        total += usize::from(x) + usize::from(y);
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / total as f64)
}

/// Index of the best-matching dataset pattern together with its Dice score.
/// Ties resolve to the lowest index.
pub fn best_match(s: &TactilePattern, dataset: &Dataset) -> Result<(usize, f64)> {
    if dataset.is_empty() {
        return Err(Error::invalid("performance of an empty dataset"));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in dataset.iter().enumerate() {
        let d = dice(p, s)?;
        if d > best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}

/// Performance `Q`: the largest Dice coefficient between `s` and any
/// dataset pattern.
pub fn performance_q(s: &TactilePattern, dataset: &Dataset) -> Result<f64> {
    best_match(s, dataset).map(|(_, q)| q)
}

pub fn dq_loss(q_pattern: f64, q_blank: f64) -> f64 {
    q_pattern - q_blank
}

pub fn dq_gain(q_hallucination: f64, q_blank: f64) -> f64 {
    q_hallucination - q_blank
}

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("correlation of series with different lengths"));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant series"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Per-trial decoding scores for the clamped scenarios and after homeostasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioResult {
    pub q_pattern: f64,
    pub q_corrupted: f64,
    pub q_blank: f64,
    pub q_hallucination: f64,
    pub dq_loss: f64,
    pub dq_gain: f64,
}

impl ScenarioResult {
    pub fn new(q_pattern: f64, q_corrupted: f64, q_blank: f64, q_hallucination: f64) -> Self {
        Self {
            q_pattern,
            q_corrupted,
            q_blank,
            q_hallucination,
            dq_loss: dq_loss(q_pattern, q_blank),
            dq_gain: dq_gain(q_hallucination, q_blank),
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}
