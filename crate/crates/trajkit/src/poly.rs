//! Polynomial basis and evaluation helpers.
//!
//! Coefficients are stored in ascending power order throughout the crate:
//! `coeffs[j]` multiplies `t^j`.

use crate::error::{Error, Result};

/// Highest polynomial degree the model family supports.
pub const MAX_DEGREE: usize = 3;

/// Design-matrix row `(1, t, t^2, ..., t^degree)`.
pub fn design_row(t: f64, degree: usize) -> Result<Vec<f64>> {
    if degree > MAX_DEGREE {
        return Err(Error::InvalidDegree(degree));
    }
    let mut row = Vec::with_capacity(degree + 1);
    let mut power = 1.0;
    for _ in 0..=degree {
        row.push(power);
        power *= t;
    }
    Ok(row)
}

/// Evaluate a polynomial with ascending-power coefficients via Horner's rule.
pub fn polyval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc.mul_add(t, c))
}

/// Mean of the polynomial over a set of times (used for the ascending-mean
/// group labeling convention).
pub fn grid_mean(coeffs: &[f64], times: &[f64]) -> f64 {
    let sum: f64 = times.iter().map(|&t| polyval(coeffs, t)).sum();
    sum / times.len() as f64
}
