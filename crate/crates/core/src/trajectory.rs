//! Hankel embedding of a series and the inverse diagonal-averaging step.
//!
//! The trajectory matrix of `x` with window `L` is the `L x K` Hankel matrix
//! whose `(i, j)` entry is `x[i + j]`. It is never stored: products with it
//! and its transpose are correlations of the series with the input vector and
//! run through a cached real FFT of length `>= N`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsaError};
use crate::fft::{self, FftPlan};
use crate::linalg::LinearOperator;
use crate::series::Series;

/// Below this many matrix entries, products are evaluated directly.
const DIRECT_PRODUCT_ENTRIES: usize = 1 << 14;

/// Window length `L` for a series of length `N`, with `K = N - L + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    n: usize,
    l: usize,
}

impl WindowConfig {
    pub fn new(series_len: usize, window: usize) -> Result<Self> {
        if window < 2 || window >= series_len {
            return Err(SsaError::WindowOutOfRange {
                window,
                len: series_len,
            });
        }
        Ok(Self {
            n: series_len,
            l: window,
        })
    }

    /// Series length `N`.
    pub fn series_len(&self) -> usize {
        self.n
    }

    /// Window length `L`.
    pub fn window_len(&self) -> usize {
        self.l
    }

    /// Number of lagged vectors `K = N - L + 1`.
    pub fn lagged_count(&self) -> usize {
        self.n - self.l + 1
    }

    pub fn min_dim(&self) -> usize {
        self.l.min(self.lagged_count())
    }

    /// Window of the transposed trajectory matrix (`L' = K`).
    pub fn transposed(&self) -> Self {
        Self {
            n: self.n,
            l: self.lagged_count(),
        }
    }

    /// Number of trajectory-matrix entries equal to sample `i` (0-based).
    pub fn weight(&self, i: usize) -> usize {
        (i + 1).min(self.l).min(self.lagged_count()).min(self.n - i)
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.weight(i) as f64).collect()
    }
}

struct SeriesSpectrum {
    plan: Arc<FftPlan>,
    spectrum: Vec<Complex64>,
}

/// The trajectory matrix of a complete series, applied without materializing it.
#[derive(Clone)]
pub struct TrajectoryOperator {
    values: Arc<[f64]>,
    window: WindowConfig,
    spectrum: Option<Arc<SeriesSpectrum>>,
}

impl std::fmt::Debug for TrajectoryOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrajectoryOperator")
            .field("window", &self.window)
            .field("fft", &self.spectrum.is_some())
            .finish()
    }
}

/// Embeds a complete series with window length `window`.
pub fn embed(series: &Series, window: usize) -> Result<TrajectoryOperator> {
    if series.has_missing() {
        return Err(SsaError::MissingSamples);
    }
    let window = WindowConfig::new(series.len(), window)?;
    Ok(TrajectoryOperator::from_values(series.values().into(), window))
}

impl TrajectoryOperator {
    pub(crate) fn from_values(values: Arc<[f64]>, window: WindowConfig) -> Self {
        debug_assert_eq!(values.len(), window.series_len());
        let entries = window.window_len() * window.lagged_count();
        let spectrum = (entries > DIRECT_PRODUCT_ENTRIES).then(|| {
            let plan = fft::plan(fft::fast_len(window.series_len()));
            let spectrum = plan.forward_padded(values.iter().copied());
            Arc::new(SeriesSpectrum { plan, spectrum })
        });
        Self {
            values,
            window,
            spectrum,
        }
    }

    pub fn window(&self) -> WindowConfig {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry `(i, j)` (0-based), equal to `x[i + j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.values[i + j]
    }

    /// `X y` for `y` of length `K`.
    pub fn matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.window.lagged_count(), y.len())?;
        Ok(self.correlate(y, self.window.window_len()))
    }

    /// `X^T z` for `z` of length `L`.
    pub fn rmatvec(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.window.window_len(), z.len())?;
        Ok(self.correlate(z, self.window.lagged_count()))
    }

    /// `out[i] = sum_j x[i + j] * y[j]` for `i < out_len`, where
    /// `y.len() + out_len == N + 1`.
    fn correlate(&self, y: &[f64], out_len: usize) -> Vec<f64> {
        match &self.spectrum {
            None => (0..out_len)
                .map(|i| {
                    self.values[i..i + y.len()]
                        .iter()
                        .zip(y)
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
            Some(state) => {
                // correlation = convolution with the reversed vector; the
                // needed outputs sit at offsets y.len()-1 .. N-1, which are
                // untouched by circular wrap-around once the length is >= N
                let fy = state.plan.forward_padded(y.iter().rev().copied());
                let prod = state
                    .spectrum
                    .iter()
                    .zip(&fy)
                    .map(|(a, b)| a * b)
                    .collect();
                let full = state.plan.inverse(prod);
                let start = y.len() - 1;
                full[start..start + out_len].to_vec()
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let (l, k) = (self.window.window_len(), self.window.lagged_count());
        DMatrix::from_fn(l, k, |i, j| self.values[i + j])
    }

    /// Squared Frobenius norm, `sum_i w_i x_i^2`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, x)| self.window.weight(i) as f64 * x * x)
            .sum()
    }
}

impl LinearOperator for TrajectoryOperator {
    fn nrows(&self) -> usize {
        self.window.window_len()
    }

    fn ncols(&self) -> usize {
        self.window.lagged_count()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.correlate(x, self.window.window_len())
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.correlate(y, self.window.lagged_count())
    }

    fn to_dense(&self) -> DMatrix<f64> {
        TrajectoryOperator::to_dense(self)
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(SsaError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Diagonal averaging of a dense `L x K` matrix: entry `n` of the result is
/// the mean of the antidiagonal `i + j = n`.
pub fn diagonal_average(matrix: &DMatrix<f64>, window: WindowConfig) -> Result<Vec<f64>> {
    check_len(window.window_len(), matrix.nrows())?;
    check_len(window.lagged_count(), matrix.ncols())?;
    let mut sums = vec![0.0; window.series_len()];
    for j in 0..matrix.ncols() {
        for i in 0..matrix.nrows() {
            sums[i + j] += matrix[(i, j)];
        }
    }
    for (n, s) in sums.iter_mut().enumerate() {
        *s /= window.weight(n) as f64;
    }
    Ok(sums)
}

/// A term `scale * u v^T` of a low-rank matrix.
#[derive(Debug, Clone, Copy)]
pub struct RankOne<'a> {
    pub scale: f64,
    pub u: &'a [f64],
    pub v: &'a [f64],
}

/// Diagonal averaging of `sum_m scale_m u_m v_m^T` without forming the matrix.
///
/// The antidiagonal sums of `u v^T` are the convolution of `u` and `v`, so the
/// whole sum costs one forward transform per vector and a single inverse.
pub fn diagonal_average_rank_one(terms: &[RankOne<'_>], window: WindowConfig) -> Result<Vec<f64>> {
    let (l, k, n) = (
        window.window_len(),
        window.lagged_count(),
        window.series_len(),
    );
    for t in terms {
        check_len(l, t.u.len())?;
        check_len(k, t.v.len())?;
    }
    let mut sums = if terms.is_empty() {
        vec![0.0; n]
    } else if l * k <= DIRECT_PRODUCT_ENTRIES {
        let mut sums = vec![0.0; n];
        for t in terms {
            for (i, &ui) in t.u.iter().enumerate() {
                let a = t.scale * ui;
                for (s, &vj) in sums[i..i + k].iter_mut().zip(t.v) {
                    *s += a * vj;
                }
            }
        }
        sums
    } else {
        let plan = fft::plan(fft::fast_len(n));
        let mut acc = vec![Complex64::new(0.0, 0.0); plan.spectrum_len()];
        for t in terms {
            let fu = plan.forward_padded(t.u.iter().copied());
            let fv = plan.forward_padded(t.v.iter().copied());
            for ((a, x), y) in acc.iter_mut().zip(&fu).zip(&fv) {
                *a += x * y * t.scale;
            }
        }
        let mut full = plan.inverse(acc);
        full.truncate(n);
        full
    };
    for (i, s) in sums.iter_mut().enumerate() {
        *s /= window.weight(i) as f64;
    }
    Ok(sums)
}
