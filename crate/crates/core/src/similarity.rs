//! Histogram dissimilarities: intersection and chi-square.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of a histogram sum from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Hi,
    Chi2,
}

impl Metric {
    pub fn distance(self, h1: &[f64], h2: &[f64]) -> Result<f64> {
        let score = match self {
            Metric::Hi => hist_intersection(h1, h2)?,
            Metric::Chi2 => chi_square(h1, h2)?,
        };
        Ok(score.value)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Hi => f.write_str("hi"),
            Metric::Chi2 => f.write_str("chi2"),
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hi" => Ok(Metric::Hi),
            "chi2" => Ok(Metric::Chi2),
            other => Err(format!("unknown metric '{other}' (expected hi or chi2)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub metric: Metric,
    pub value: f64,
}

fn check_lengths(h1: &[f64], h2: &[f64]) -> Result<()> {
    if h1.len() != h2.len() {
        return Err(Error::LengthMismatch(h1.len(), h2.len()));
    }
    Ok(())
}

fn check_nonnegative(h: &[f64]) -> Result<()> {
    match h.iter().position(|&v| v < 0.0 || !v.is_finite()) {
        Some(index) => Err(Error::NegativeBin { index }),
        None => Ok(()),
    }
}

fn check_normalized(h: &[f64]) -> Result<()> {
    check_nonnegative(h)?;
    let sum: f64 = h.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized { sum });
    }
    Ok(())
}

/// `1 - sum_i min(h1_i, h2_i)`; 0 for identical histograms, 1 for disjoint
/// ones. Both inputs must sum to 1.
///
/// Evaluated as `sum_i |h1_i - h2_i| / 2`, which is the same quantity for
/// normalized inputs but is exactly zero on identical histograms and exactly
/// symmetric in floating point.
pub fn hist_intersection(h1: &[f64], h2: &[f64]) -> Result<SimilarityScore> {
    check_lengths(h1, h2)?;
    check_normalized(h1)?;
    check_normalized(h2)?;
    let half_l1: f64 = 0.5 * h1.iter().zip(h2).map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(SimilarityScore {
        metric: Metric::Hi,
        value: half_l1.min(1.0),
    })
}

/// `sum_i (h1_i - h2_i)^2 / (h1_i + h2_i)`, with empty bins contributing 0.
pub fn chi_square(h1: &[f64], h2: &[f64]) -> Result<SimilarityScore> {
    check_lengths(h1, h2)?;
    check_nonnegative(h1)?;
    check_nonnegative(h2)?;
    let value = h1
        .iter()
        .zip(h2)
        .map(|(a, b)| {
            let s = a + b;
            if s == 0.0 {
                0.0
            } else {
                (a - b) * (a - b) / s
            }
        })
        .sum();
    Ok(SimilarityScore {
        metric: Metric::Chi2,
        value,
    })
}
