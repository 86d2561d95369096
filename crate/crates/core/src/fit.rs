//! Least-squares power-law fits in log-log space.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    /// Exponent `p` in `y ≈ C x^p`.
    pub slope: f64,
    /// `ln C`.
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// Fewer than one residual degree of freedom (two points or fewer).
    pub low_confidence: bool,
}

/// Fits `ln |y| = p ln x + ln C` by ordinary least squares.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput("fit: x and y lengths differ".into()));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput("fit: need at least two points".into()));
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y != 0.0 && x.is_finite() && y.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "fit: need positive x and non-zero y, got ({x}, {y})"
            )));
        }
        lx.push(x.ln());
        ly.push(y.abs().ln());
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("fit: all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
        low_confidence: xs.len() <= 2,
    })
}

/// Number of decades covered by a positive sequence.
pub fn decades(xs: &[f64]) -> f64 {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (hi / lo).log10()
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0 && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// A measured exponent compared with its expected value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentCheck {
    pub quantity: String,
    pub slope: f64,
    pub expected: f64,
    /// Absolute tolerance on the slope.
    pub tolerance: f64,
    pub deviation: f64,
    pub pass: bool,
    pub low_confidence: bool,
}

impl ExponentCheck {
    pub fn new(quantity: &str, fit: &PowerLawFit, expected: f64, tolerance: f64) -> Self {
        let deviation = fit.slope - expected;
        Self {
            quantity: quantity.to_string(),
            slope: fit.slope,
            expected,
            tolerance,
            deviation,
            pass: deviation.abs() <= tolerance,
            low_confidence: fit.low_confidence,
        }
    }
}
