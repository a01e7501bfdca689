//! Decomposition stage: Basic (SVD) and Toeplitz SSA, optionally with double
//! centering of the trajectory matrix.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsaError};
use crate::linalg::{self, LinearOperator};
use crate::series::Series;
use crate::svd::{self, truncated_svd, EigenTriple, SvdOptions, RANK_CUTOFF};
use crate::trajectory::{diagonal_average_rank_one, embed, RankOne, TrajectoryOperator, WindowConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Basic,
    Toeplitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centering {
    None,
    Double,
}

/// Default window length: `round(0.4 N)` for Basic SSA, `min(N/4, 100)` for
/// Toeplitz SSA, clamped into `2..N`.
pub fn default_window(series_len: usize, method: Method) -> usize {
    let l = match method {
        Method::Basic => (0.4 * series_len as f64).round() as usize,
        Method::Toeplitz => (series_len / 4).min(100),
    };
    l.clamp(2, series_len.saturating_sub(1).max(2))
}

/// Ordered eigentriples of a trajectory matrix plus their provenance.
#[derive(Debug, Clone)]
pub struct Decomposition {
    method: Method,
    centering: Centering,
    window: WindowConfig,
    series: Arc<Series>,
    triples: Vec<EigenTriple>,
    centering_component: Option<Vec<f64>>,
    total_energy: f64,
}

impl Decomposition {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn window(&self) -> WindowConfig {
        self.window
    }

    pub fn series(&self) -> &Series {
        &self.series
    }

    pub fn triples(&self) -> &[EigenTriple] {
        &self.triples
    }

    /// Number of stored triples.
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Numerical rank: stored triples with `sigma >= 1e-11 * sigma_1`.
    pub fn rank(&self) -> usize {
        let top = self.triples.first().map_or(0.0, |t| t.sigma);
        self.triples
            .iter()
            .filter(|t| top > 0.0 && t.sigma >= RANK_CUTOFF * top)
            .count()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.triples.iter().map(|t| t.sigma).collect()
    }

    /// Shares `lambda_m / ||X||_F^2` of the (uncentered) trajectory matrix.
    pub fn contributions(&self) -> Vec<f64> {
        self.triples
            .iter()
            .map(|t| {
                if self.total_energy > 0.0 {
                    t.lambda() / self.total_energy
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Hankelized rank-<=2 part removed by double centering.
    pub fn centering_component(&self) -> Option<&[f64]> {
        self.centering_component.as_deref()
    }

    /// Reconstruction from the triples with the given 0-based indices.
    pub fn reconstruct_indices(&self, indices: &[usize]) -> Result<Vec<f64>> {
        let mut terms = Vec::with_capacity(indices.len());
        for &i in indices {
            let t = self.triples.get(i).ok_or(SsaError::IndexOutOfRange {
                index: i + 1,
                max: self.triples.len(),
            })?;
            terms.push(RankOne {
                scale: t.sigma,
                u: &t.u,
                v: &t.v,
            });
        }
        diagonal_average_rank_one(&terms, self.window)
    }

    /// Elementary reconstructed series of triple `i` (0-based).
    pub fn elementary(&self, i: usize) -> Result<Vec<f64>> {
        self.reconstruct_indices(&[i])
    }

    pub fn to_json(&self) -> DecompositionDoc {
        DecompositionDoc {
            method: self.method,
            window: self.window.window_len(),
            series_len: self.window.series_len(),
            centering: self.centering,
            sigmas: self.sigmas(),
            u: self.triples.iter().map(|t| t.u.clone()).collect(),
            v: self.triples.iter().map(|t| t.v.clone()).collect(),
            series: self.series.values().to_vec(),
            centering_component: self.centering_component.clone(),
        }
    }

    pub fn from_json(doc: DecompositionDoc) -> Result<Self> {
        let series = Series::new(doc.series)?;
        let window = WindowConfig::new(series.len(), doc.window)?;
        if doc.series_len != series.len() {
            return Err(SsaError::DimensionMismatch {
                expected: doc.series_len,
                got: series.len(),
            });
        }
        if doc.u.len() != doc.sigmas.len() || doc.v.len() != doc.sigmas.len() {
            return Err(SsaError::Parse("sigmas, u and v differ in length".into()));
        }
        let mut triples = Vec::with_capacity(doc.sigmas.len());
        for ((sigma, u), v) in doc.sigmas.into_iter().zip(doc.u).zip(doc.v) {
            if u.len() != window.window_len() {
                return Err(SsaError::DimensionMismatch {
                    expected: window.window_len(),
                    got: u.len(),
                });
            }
            if v.len() != window.lagged_count() {
                return Err(SsaError::DimensionMismatch {
                    expected: window.lagged_count(),
                    got: v.len(),
                });
            }
            triples.push(EigenTriple { sigma, u, v });
        }
        if let Some(c) = &doc.centering_component {
            if c.len() != series.len() {
                return Err(SsaError::DimensionMismatch {
                    expected: series.len(),
                    got: c.len(),
                });
            }
        }
        let total_energy = embed(&series, window.window_len())?.frobenius_norm_sq();
        Ok(Self {
            method: doc.method,
            centering: doc.centering,
            window,
            series: Arc::new(series),
            triples,
            centering_component: doc.centering_component,
            total_energy,
        })
    }
}

/// JSON form of a decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionDoc {
    pub method: Method,
    #[serde(rename = "L")]
    pub window: usize,
    #[serde(rename = "N")]
    pub series_len: usize,
    pub centering: Centering,
    pub sigmas: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// The decomposed series, so the document can be reconstructed standalone.
    pub series: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centering_component: Option<Vec<f64>>,
}

/// Decomposes `series` with the chosen method and centering.
pub fn decompose(
    series: &Series,
    window: usize,
    k: usize,
    method: Method,
    centering: Centering,
    opts: &SvdOptions,
) -> Result<Decomposition> {
    match (method, centering) {
        (Method::Basic, Centering::None) => basic(series, window, k, opts),
        (Method::Basic, Centering::Double) => double_centered(series, window, k, opts),
        (Method::Toeplitz, Centering::None) => toeplitz(series, window, k),
        (Method::Toeplitz, Centering::Double) => Err(SsaError::InvalidParameter(
            "double centering is only available for Basic SSA".into(),
        )),
    }
}

/// Basic SSA: leading `k` singular triples of the trajectory matrix.
pub fn decompose_basic(series: &Series, window: usize, k: usize) -> Result<Decomposition> {
    basic(series, window, k, &SvdOptions::default())
}

/// Toeplitz SSA: left vectors are eigenvectors of the Toeplitz lag-covariance
/// estimate, `v_m = X^T u_m / sigma_m` with `sigma_m = ||X^T u_m||`.
pub fn decompose_toeplitz(series: &Series, window: usize, k: usize) -> Result<Decomposition> {
    toeplitz(series, window, k)
}

/// Basic SSA of the double-centered trajectory matrix. The removed row/column
/// mean part is kept as the decomposition's centering component.
pub fn decompose_double_centered(series: &Series, window: usize, k: usize) -> Result<Decomposition> {
    double_centered(series, window, k, &SvdOptions::default())
}

fn check_k(k: usize, window: WindowConfig) -> Result<()> {
    if k > window.min_dim() {
        return Err(SsaError::TooManyComponents {
            requested: k,
            max: window.min_dim(),
        });
    }
    Ok(())
}

fn basic(series: &Series, window: usize, k: usize, opts: &SvdOptions) -> Result<Decomposition> {
    let op = embed(series, window)?;
    check_k(k, op.window())?;
    let triples = truncated_svd(&op, k, opts)?;
    Ok(Decomposition {
        method: Method::Basic,
        centering: Centering::None,
        window: op.window(),
        series: Arc::new(series.clone()),
        triples,
        centering_component: None,
        total_energy: op.frobenius_norm_sq(),
    })
}

/// Toeplitz lag-covariance estimate
/// `c_ij = sum_{k < N-|i-j|} x_k x_{k+|i-j|} / (N - |i-j|)`.
pub fn toeplitz_covariance(values: &[f64], window: usize) -> DMatrix<f64> {
    let n = values.len();
    let lags: Vec<f64> = (0..window)
        .map(|lag| {
            let s: f64 = values[..n - lag]
                .iter()
                .zip(&values[lag..])
                .map(|(a, b)| a * b)
                .sum();
            s / (n - lag) as f64
        })
        .collect();
    DMatrix::from_fn(window, window, |i, j| lags[i.abs_diff(j)])
}

fn toeplitz(series: &Series, window: usize, k: usize) -> Result<Decomposition> {
    let op = embed(series, window)?;
    let w = op.window();
    // the left vectors span all of R^L even when L > K; all L are needed
    // for a complete expansion
    if k > w.window_len() {
        return Err(SsaError::TooManyComponents { requested: k, max: w.window_len() });
    }
    let cov = toeplitz_covariance(series.values(), w.window_len());
    let eig = cov.symmetric_eigen();
    let mut triples: Vec<EigenTriple> = (0..w.window_len())
        .map(|m| {
            let u: Vec<f64> = eig.eigenvectors.column(m).iter().copied().collect();
            let mut v = op.apply_adjoint(&u);
            let sigma = linalg::norm(&v);
            if sigma > 0.0 {
                linalg::scale(1.0 / sigma, &mut v);
            }
            EigenTriple { sigma, u, v }
        })
        .collect();
    triples.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
    triples.truncate(k);
    for t in &mut triples {
        svd::normalize_sign(t);
    }
    Ok(Decomposition {
        method: Method::Toeplitz,
        centering: Centering::None,
        window: w,
        series: Arc::new(series.clone()),
        triples,
        centering_component: None,
        total_energy: op.frobenius_norm_sq(),
    })
}

/// `X - r 1^T - 1 c^T`, where `r` are row means and `c` column means minus
/// the grand mean.
struct DoubleCentered {
    base: TrajectoryOperator,
    row_means: Vec<f64>,
    col_offsets: Vec<f64>,
}

impl DoubleCentered {
    fn new(base: TrajectoryOperator) -> Self {
        let w = base.window();
        let (l, k) = (w.window_len(), w.lagged_count());
        let x = base.values();
        let row_means = sliding_means(x, k);
        let col_means = sliding_means(x, l);
        let grand = row_means.iter().sum::<f64>() / l as f64;
        let col_offsets = col_means.iter().map(|c| c - grand).collect();
        Self {
            base,
            row_means,
            col_offsets,
        }
    }

    fn centering_series(&self) -> Result<Vec<f64>> {
        let w = self.base.window();
        let ones_l = vec![1.0; w.window_len()];
        let ones_k = vec![1.0; w.lagged_count()];
        diagonal_average_rank_one(
            &[
                RankOne {
                    scale: 1.0,
                    u: &self.row_means,
                    v: &ones_k,
                },
                RankOne {
                    scale: 1.0,
                    u: &ones_l,
                    v: &self.col_offsets,
                },
            ],
            w,
        )
    }
}

fn sliding_means(x: &[f64], width: usize) -> Vec<f64> {
    let count = x.len() - width + 1;
    let mut sum: f64 = x[..width].iter().sum();
    let mut out = Vec::with_capacity(count);
    out.push(sum / width as f64);
    for i in 1..count {
        sum += x[i + width - 1] - x[i - 1];
        out.push(sum / width as f64);
    }
    out
}

impl LinearOperator for DoubleCentered {
    fn nrows(&self) -> usize {
        self.base.nrows()
    }

    fn ncols(&self) -> usize {
        self.base.ncols()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.base.apply(x);
        let sx: f64 = x.iter().sum();
        let cx = linalg::dot(&self.col_offsets, x);
        for (o, r) in out.iter_mut().zip(&self.row_means) {
            *o -= r * sx + cx;
        }
        out
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.base.apply_adjoint(y);
        let sy: f64 = y.iter().sum();
        let ry = linalg::dot(&self.row_means, y);
        for (o, c) in out.iter_mut().zip(&self.col_offsets) {
            *o -= ry + c * sy;
        }
        out
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut d = self.base.to_dense();
        for j in 0..d.ncols() {
            for i in 0..d.nrows() {
                d[(i, j)] -= self.row_means[i] + self.col_offsets[j];
            }
        }
        d
    }
}

fn double_centered(series: &Series, window: usize, k: usize, opts: &SvdOptions) -> Result<Decomposition> {
    let base = embed(series, window)?;
    let w = base.window();
    check_k(k, w)?;
    let total_energy = base.frobenius_norm_sq();
    let op = DoubleCentered::new(base);
    let mut triples = truncated_svd(&op, k, opts)?;
    // the centered matrix of an exact line is pure rounding noise
    let floor = RANK_CUTOFF * total_energy.sqrt();
    triples.retain(|t| t.sigma > floor);
    let centering_component = Some(op.centering_series()?);
    Ok(Decomposition {
        method: Method::Basic,
        centering: Centering::Double,
        window: w,
        series: Arc::new(series.clone()),
        triples,
        centering_component,
        total_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(n: usize, a: f64, omega: f64, phase: f64) -> Vec<f64> {
        (0..n)
            .map(|i| a * (2.0 * PI * omega * i as f64 + phase).sin())
            .collect()
    }

    #[test]
    fn exponential_is_rank_one() {
        let s = Series::new(vec![1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        let d = decompose_basic(&s, 2, 2).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.rank(), 1);
    }

    #[test]
    fn separable_sine_eigenvalues() {
        let s = Series::new(sine(27, 1.0, 0.25, 0.3)).unwrap();
        let d = decompose_basic(&s, 12, 2).unwrap();
        assert_eq!(d.len(), 2);
        for t in d.triples() {
            assert!((t.lambda() - 48.0).abs() < 1e-8);
        }
    }

    #[test]
    fn two_separable_sines_pair_up_by_amplitude() {
        // L*omega and K*omega integers for omega in {1/4, 1/6}: L = 12, K = 36
        let x: Vec<f64> = sine(47, 3.0, 0.25, 0.2)
            .iter()
            .zip(sine(47, 1.0, 1.0 / 6.0, 1.0))
            .map(|(a, b)| a + b)
            .collect();
        let d = decompose_basic(&Series::new(x).unwrap(), 12, 4).unwrap();
        let lam: Vec<f64> = d.triples().iter().map(|t| t.lambda()).collect();
        let big = 9.0 * 12.0 * 36.0 / 4.0;
        let small = 12.0 * 36.0 / 4.0;
        assert!((lam[0] - big).abs() < 1e-8 * big);
        assert!((lam[1] - big).abs() < 1e-8 * big);
        assert!((lam[2] - small).abs() < 1e-8 * big);
        assert!((lam[3] - small).abs() < 1e-8 * big);
    }

    #[test]
    fn rank_facts_for_sines() {
        let s = Series::new(sine(50, 1.0, 0.1, 0.4)).unwrap();
        assert_eq!(decompose_basic(&s, 20, 6).unwrap().rank(), 2);
        let alt: Vec<f64> = (0..50).map(|i| if i % 2 == 0 { 1.5 } else { -1.5 }).collect();
        assert_eq!(decompose_basic(&Series::new(alt).unwrap(), 20, 6).unwrap().rank(), 1);
    }

    #[test]
    fn toeplitz_covariance_small_case() {
        let c = toeplitz_covariance(&[1.0, 2.0, 3.0], 2);
        assert!((c[(0, 0)] - 14.0 / 3.0).abs() < 1e-15);
        assert!((c[(0, 1)] - 4.0).abs() < 1e-15);
        assert_eq!(c[(0, 1)], c[(1, 0)]);
    }

    #[test]
    fn zero_series() {
        let z = Series::new(vec![0.0; 20]).unwrap();
        let t = decompose_toeplitz(&z, 5, 5).unwrap();
        assert!(t.triples().iter().all(|t| t.sigma == 0.0));
        assert_eq!(t.reconstruct_indices(&[0, 1, 2, 3, 4]).unwrap(), vec![0.0; 20]);
        let b = decompose_basic(&z, 5, 5).unwrap();
        assert!(b.is_empty());
        let c = decompose_double_centered(&z, 5, 5).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.centering_component().unwrap(), &[0.0; 20][..]);
    }

    #[test]
    fn toeplitz_is_complete_and_orthonormal() {
        let x: Vec<f64> = (0..60).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let s = Series::new(x.clone()).unwrap();
        let d = decompose_toeplitz(&s, 10, 10).unwrap();
        let all: Vec<usize> = (0..10).collect();
        let rec = d.reconstruct_indices(&all).unwrap();
        for (a, b) in rec.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
        for i in 0..10 {
            for j in 0..10 {
                let ip = linalg::dot(&d.triples()[i].u, &d.triples()[j].u);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-10);
            }
        }
        let sig = d.sigmas();
        assert!(sig.windows(2).all(|w| w[0] >= w[1]));
        let contrib: f64 = d.contributions().iter().sum();
        assert!((contrib - 1.0).abs() < 1e-10);
    }

    #[test]
    fn double_centering_recovers_lines() {
        let line: Vec<f64> = (0..40).map(|i| 0.7 * i as f64 - 3.0).collect();
        let d = decompose_double_centered(&Series::new(line.clone()).unwrap(), 15, 5).unwrap();
        assert!(d.is_empty(), "centered line should have no triples");
        for (a, b) in d.centering_component().unwrap().iter().zip(&line) {
            assert!((a - b).abs() < 1e-8);
        }
        // line plus a sine with L*omega and K*omega integral
        let n = 59;
        let x: Vec<f64> = (0..n)
            .map(|i| 0.2 * i as f64 + 1.0 + (2.0 * PI * i as f64 / 10.0).sin())
            .collect();
        let d = decompose_double_centered(&Series::new(x).unwrap(), 20, 4).unwrap();
        for (i, c) in d.centering_component().unwrap().iter().enumerate() {
            assert!((c - (0.2 * i as f64 + 1.0)).abs() < 1e-6, "{i}: {c}");
        }
    }

    #[test]
    fn json_round_trip() {
        let s = Series::new(sine(30, 2.0, 0.1, 0.0)).unwrap();
        let d = decompose_basic(&s, 10, 4).unwrap();
        let text = serde_json::to_string(&d.to_json()).unwrap();
        assert!(text.contains("\"L\":10"));
        let back = Decomposition::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.triples(), d.triples());
        assert_eq!(back.window(), d.window());
    }

    #[test]
    fn default_windows() {
        assert_eq!(default_window(100, Method::Basic), 40);
        assert_eq!(default_window(1000, Method::Toeplitz), 100);
        assert_eq!(default_window(40, Method::Toeplitz), 10);
        assert_eq!(default_window(3, Method::Basic), 2);
    }
}
