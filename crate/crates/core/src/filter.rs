//! Reconstruction of an elementary component viewed as linear filtering of
//! the series.

use serde::Serialize;

use crate::error::{Result, SsaError};

/// Symmetric filter with taps at lags `-(L-1)..=(L-1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterCoefficients {
    window: usize,
    coeffs: Vec<f64>,
}

impl FilterCoefficients {
    pub fn window_len(&self) -> usize {
        self.window
    }

    /// Taps ordered from lag `-(L-1)` to `L-1`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn lag(&self, j: isize) -> f64 {
        let idx = j + self.window as isize - 1;
        if idx < 0 {
            return 0.0;
        }
        self.coeffs.get(idx as usize).copied().unwrap_or(0.0)
    }

    /// Output `sum_j c_j x_{n+j}` for every `n` with a full neighbourhood,
    /// i.e. 0-based `n` in `L-1..=N-L`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let taps = self.coeffs.len();
        if x.len() < taps {
            return Err(SsaError::SeriesTooShort { len: x.len(), min: taps });
        }
        Ok(x.windows(taps)
            .map(|w| w.iter().zip(&self.coeffs).map(|(a, c)| a * c).sum())
            .collect())
    }

    /// Real frequency response `sum_j c_j cos(2 pi omega j)`.
    pub fn frequency_response(&self, omega: f64) -> f64 {
        let l = self.window as isize;
        (-(l - 1)..l)
            .map(|j| self.lag(j) * (2.0 * std::f64::consts::PI * omega * j as f64).cos())
            .sum()
    }
}

/// Filter whose output on the middle positions equals the elementary
/// component built from the unit eigenvector `u`.
pub fn middle_point_filter(u: &[f64]) -> FilterCoefficients {
    let l = u.len();
    let mut coeffs = vec![0.0; 2 * l - 1];
    for j in 0..l {
        let c: f64 = u[..l - j].iter().zip(&u[j..]).map(|(a, b)| a * b).sum::<f64>() / l as f64;
        coeffs[l - 1 + j] = c;
        coeffs[l - 1 - j] = c;
    }
    FilterCoefficients { window: l, coeffs }
}

/// Causal weights for the last point of the elementary component: entry `i`
/// multiplies `x_{N-1-i}` (0-based), so the weights apply to the reversed tail.
pub fn last_point_weights(u: &[f64]) -> Vec<f64> {
    let l = u.len();
    let last = u[l - 1];
    (0..l).map(|i| last * u[l - 1 - i]).collect()
}

/// Dot product of [`last_point_weights`] with the reversed tail of `x`.
pub fn apply_last_point(weights: &[f64], x: &[f64]) -> Result<f64> {
    if x.len() < weights.len() {
        return Err(SsaError::SeriesTooShort { len: x.len(), min: weights.len() });
    }
    Ok(weights.iter().zip(x.iter().rev()).map(|(w, v)| w * v).sum())
}
