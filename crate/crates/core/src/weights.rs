//! Variable/site weight sequences and their sampling distribution.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    PowerLaw { beta: f64 },
    Uniform,
    Explicit,
}

/// Positive weights with their cached total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    weights: Vec<f64>,
    total: f64,
    kind: WeightKind,
}

/// Compensated summation.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

impl WeightSequence {
    fn build(weights: Vec<f64>, kind: WeightKind) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("n", "need at least one weight"));
        }
        if let Some((i, &w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(invalid("weights", format!("weight {} is {w}; weights must be positive and finite", i + 1)));
        }
        let total = kahan_sum(weights.iter().copied());
        Ok(WeightSequence { weights, total, kind })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::build(vec![1.0; n], WeightKind::Uniform)
    }

    pub fn explicit(weights: Vec<f64>) -> Result<Self> {
        Self::build(weights, WeightKind::Explicit)
    }

    /// Parses one weight per line; blank lines and `#` comments are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut weights = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let w: f64 =
                line.parse().map_err(|_| Error::Parse { line: i + 1, reason: format!("`{line}` is not a number") })?;
            weights.push(w);
        }
        Self::explicit(weights)
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Result<Self>> {
        Ok(Self::parse_text(&std::fs::read_to_string(path)?))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sampling probabilities `w_i / W`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }
}

/// `w_i = i^{-1/(β-1)}` for `i = 1..=n`.
pub fn power_law_weights(n: usize, beta: f64) -> Result<WeightSequence> {
    if !(beta > 2.0) || !beta.is_finite() {
        return Err(invalid("beta", format!("power-law exponent must satisfy beta > 2 (got {beta})")));
    }
    if n == 0 {
        return Err(invalid("n", "need at least one weight"));
    }
    let exponent = -1.0 / (beta - 1.0);
    let weights = (1..=n).map(|i| (i as f64).powf(exponent)).collect();
    WeightSequence::build(weights, WeightKind::PowerLaw { beta })
}

/// Sum of the `i` largest sampling probabilities.
pub fn prefix_mass(ws: &WeightSequence, i: usize) -> Result<f64> {
    if i == 0 || i > ws.len() {
        return Err(Error::IndexOutOfRange { index: i, len: ws.len() });
    }
    if i == ws.len() {
        return Ok(1.0);
    }
    let mut sorted = ws.weights.clone();
    if !sorted.windows(2).all(|w| w[0] >= w[1]) {
        sorted.sort_by(|a, b| b.total_cmp(a));
    }
    Ok(kahan_sum(sorted[..i].iter().copied()) / ws.total)
}

/// `Σ p_j²` by exact summation.
pub fn second_moment(ws: &WeightSequence) -> f64 {
    kahan_sum(ws.weights.iter().map(|w| w * w)) / (ws.total * ws.total)
}

/// Divides every weight by the minimum so the smallest becomes exactly 1.
pub fn normalize_min_one(ws: &WeightSequence) -> WeightSequence {
    let min = ws.min();
    let weights: Vec<f64> = ws.weights.iter().map(|w| if *w == min { 1.0 } else { w / min }).collect();
    let total = kahan_sum(weights.iter().copied());
    WeightSequence { weights, total, kind: ws.kind }
}
