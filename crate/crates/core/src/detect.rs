//! Monte Carlo SSA: testing eigenvalues of a series against red-noise
//! surrogates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::decompose_basic;
use crate::error::{Result, SsaError};
use crate::series::Series;
use crate::trajectory::WindowConfig;

/// `x_t - mean = phi (x_{t-1} - mean) + e_t`, `e_t ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Model {
    pub phi: f64,
    pub sigma: f64,
    pub mean: f64,
}

impl Ar1Model {
    pub fn new(phi: f64, sigma: f64, mean: f64) -> Result<Self> {
        if phi.is_nan() || phi.abs() >= 1.0 || sigma.is_nan() || sigma <= 0.0 || !sigma.is_finite() || !mean.is_finite() {
            return Err(SsaError::InvalidParameter(format!(
                "AR(1) needs |phi| < 1 and sigma > 0, got phi = {phi}, sigma = {sigma}"
            )));
        }
        Ok(Self { phi, sigma, mean })
    }

    /// Stationary sample path of length `n`.
    pub fn simulate<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let innov = Normal::new(0.0, self.sigma).expect("sigma is positive");
        let sd0 = self.sigma / (1.0 - self.phi * self.phi).sqrt();
        let mut x = Vec::with_capacity(n);
        let mut prev = sd0 * Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
        for _ in 0..n {
            x.push(self.mean + prev);
            prev = self.phi * prev + innov.sample(rng);
        }
        x
    }
}

/// Lag-1 moment fit. `phi` is the lag-1 autocorrelation of the centered
/// series; `sigma` the standard deviation of the one-step residuals.
pub fn fit_ar1(series: &Series) -> Result<Ar1Model> {
    if series.has_missing() {
        return Err(SsaError::MissingSamples);
    }
    let x = series.values();
    if x.len() < 10 {
        return Err(SsaError::SeriesTooShort { len: x.len(), min: 10 });
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    if c0 <= 1e-28 * (mean * mean * n).max(f64::MIN_POSITIVE) {
        return Err(SsaError::Degenerate("series has zero variance".into()));
    }
    let c1: f64 = c.windows(2).map(|w| w[0] * w[1]).sum();
    let phi = c1 / c0;
    let rss: f64 = c.windows(2).map(|w| (w[1] - phi * w[0]).powi(2)).sum();
    let sigma = (rss / (n - 1.0)).sqrt();
    Ar1Model::new(phi, sigma, mean)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    None,
    #[default]
    Bonferroni,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McssaOptions {
    /// Confidence of the surrogate band, in (0, 1).
    pub gamma: f64,
    pub surrogates: usize,
    pub seed: u64,
    pub correction: Correction,
    /// Number of leading eigenvectors tested; `None` tests all of them.
    pub components: Option<usize>,
}

impl Default for McssaOptions {
    fn default() -> Self {
        Self { gamma: 0.95, surrogates: 1000, seed: 0, correction: Correction::Bonferroni, components: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorTest {
    /// 1-based eigentriple index.
    pub index: usize,
    /// Eigenvalue of the observed (centered) series.
    pub statistic: f64,
    pub lower: f64,
    pub upper: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McssaReport {
    pub model: Ar1Model,
    pub tests: Vec<VectorTest>,
    pub rejected: bool,
    pub correction: Correction,
    pub gamma: f64,
    /// Two-sided level used for each vector after correction.
    pub per_vector_alpha: f64,
    pub surrogates: usize,
    pub seed: u64,
}

/// Lag-covariance `X X^T` of the trajectory matrix of `x`.
fn lag_covariance(x: &[f64], window: usize) -> Vec<f64> {
    let k = x.len() - window + 1;
    let mut s = vec![0.0; window * window];
    for j in 0..window {
        s[j] = x[..k].iter().zip(&x[j..j + k]).map(|(a, b)| a * b).sum();
    }
    // S[i+1][j+1] = S[i][j] - x_i x_j + x_{i+K} x_{j+K}
    for i in 1..window {
        for j in i..window {
            let v = s[(i - 1) * window + j - 1] - x[i - 1] * x[j - 1] + x[i - 1 + k] * x[j - 1 + k];
            s[i * window + j] = v;
        }
    }
    for i in 0..window {
        for j in 0..i {
            s[i * window + j] = s[j * window + i];
        }
    }
    s
}

fn quadratic_form(s: &[f64], u: &[f64]) -> f64 {
    let l = u.len();
    (0..l)
        .map(|i| u[i] * s[i * l..(i + 1) * l].iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tests each data eigenvalue against the squared projections of AR(1)
/// surrogate trajectory matrices onto the same eigenvector. Data and
/// surrogates are centered. Surrogate `b` draws from stream `b` of a
/// generator seeded with `opts.seed`.
pub fn mcssa_test(series: &Series, window: usize, opts: &McssaOptions) -> Result<McssaReport> {
    if opts.surrogates < 100 {
        return Err(SsaError::InvalidParameter(format!(
            "at least 100 surrogates required, got {}",
            opts.surrogates
        )));
    }
    if !(opts.gamma > 0.0 && opts.gamma < 1.0) {
        return Err(SsaError::InvalidParameter(format!("gamma must lie in (0, 1), got {}", opts.gamma)));
    }
    let model = fit_ar1(series)?;
    let cfg = WindowConfig::new(series.len(), window)?;
    let count = opts.components.unwrap_or(cfg.min_dim()).min(cfg.min_dim());
    if count == 0 {
        return Err(SsaError::InvalidParameter("no components to test".into()));
    }
    let centered: Vec<f64> = series.values().iter().map(|v| v - model.mean).collect();
    let dec = decompose_basic(&Series::new(centered)?, window, count)?;
    let triples = dec.triples();
    let null = Ar1Model { mean: 0.0, ..model };
    let n = series.len();
    let stats: Vec<Vec<f64>> = (0..opts.surrogates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(b as u64);
            let mut x = null.simulate(n, &mut rng);
            let m = x.iter().sum::<f64>() / n as f64;
            x.iter_mut().for_each(|v| *v -= m);
            let s = lag_covariance(&x, window);
            triples.iter().map(|t| quadratic_form(&s, &t.u)).collect()
        })
        .collect();
    let alpha = match opts.correction {
        Correction::None => 1.0 - opts.gamma,
        Correction::Bonferroni => (1.0 - opts.gamma) / triples.len() as f64,
    };
    let tests: Vec<VectorTest> = triples
        .iter()
        .enumerate()
        .map(|(m, t)| {
            let mut column: Vec<f64> = stats.iter().map(|s| s[m]).collect();
            column.sort_by(f64::total_cmp);
            let lower = quantile(&column, alpha / 2.0);
            let upper = quantile(&column, 1.0 - alpha / 2.0);
            let statistic = t.lambda();
            VectorTest { index: m + 1, statistic, lower, upper, rejected: statistic < lower || statistic > upper }
        })
        .collect();
    Ok(McssaReport {
        model,
        rejected: tests.iter().any(|t| t.rejected),
        tests,
        correction: opts.correction,
        gamma: opts.gamma,
        per_vector_alpha: alpha,
        surrogates: opts.surrogates,
        seed: opts.seed,
    })
}
