//! Finite-rank approximation of series: one-step SSA signal extraction,
//! Cadzow alternating projections and information-criterion rank choice.

use serde::{Deserialize, Serialize};

use crate::decompose::decompose_basic;
use crate::error::{Result, SsaError};
use crate::linalg::LinearOperator;
use crate::series::Series;
use crate::svd::{dense_singular_values, truncated_svd, SvdOptions};
use crate::trajectory::{embed, WindowConfig};

pub const DEFAULT_CADZOW_ITERATIONS: usize = 50;
pub const DEFAULT_CADZOW_TOL: f64 = 1e-8;

fn check_rank(window: WindowConfig, r: usize) -> Result<()> {
    if r >= window.min_dim() {
        return Err(SsaError::TooManyComponents { requested: r, max: window.min_dim() - 1 });
    }
    Ok(())
}

/// Hankelized rank-`r` approximation of the trajectory matrix.
pub fn extract_signal(series: &Series, window: usize, r: usize) -> Result<Vec<f64>> {
    let cfg = WindowConfig::new(series.len(), window)?;
    check_rank(cfg, r)?;
    if series.has_missing() {
        return Err(SsaError::MissingSamples);
    }
    if r == 0 {
        return Ok(vec![0.0; series.len()]);
    }
    let dec = decompose_basic(series, window, r)?;
    dec.reconstruct_indices(&(0..dec.len()).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CadzowResult {
    pub signal: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `sigma_{r+1} / sigma_r` of the output trajectory matrix; 0 when
    /// `sigma_{r+1}` is numerically zero.
    pub rank_gap: f64,
    /// Frobenius distance from the trajectory matrix of each iterate to the
    /// rank-`r` matrices, starting with the input. Nonincreasing.
    pub objective: Vec<f64>,
}

/// Distance of the trajectory matrix of `values` to the rank-`r` matrices,
/// and its leading `r + 1` singular values.
fn rank_distance(values: &[f64], window: usize, r: usize) -> Result<(f64, Vec<f64>)> {
    let op = embed(&Series::new(values.to_vec())?, window)?;
    let (m, n) = (op.nrows(), op.ncols());
    if m.min(n) <= 64 && m * n <= 4_000_000 || m * n <= 250_000 {
        let s = dense_singular_values(&op.to_dense());
        let tail: f64 = s[r.min(s.len())..].iter().map(|x| x * x).sum();
        return Ok((tail.sqrt(), s.into_iter().take(r + 1).collect()));
    }
    let k = (r + 1).min(m.min(n));
    let s: Vec<f64> = truncated_svd(&op, k, &SvdOptions::default())?.iter().map(|t| t.sigma).collect();
    let head: f64 = s.iter().take(r).map(|x| x * x).sum();
    Ok(((op.frobenius_norm_sq() - head).max(0.0).sqrt(), s))
}

/// Alternates rank-`r` truncation and hankelization until the relative
/// change between iterates drops below `tol` or `max_iter` passes are spent.
pub fn cadzow(series: &Series, window: usize, r: usize, max_iter: usize, tol: f64) -> Result<CadzowResult> {
    let cfg = WindowConfig::new(series.len(), window)?;
    check_rank(cfg, r)?;
    if max_iter == 0 {
        return Err(SsaError::InvalidParameter("at least one iteration required".into()));
    }
    let mut current = series.values().to_vec();
    let (d0, _) = rank_distance(&current, window, r)?;
    let mut objective = vec![d0];
    let mut iterations = 0;
    let mut converged = false;
    let mut sigmas = Vec::new();
    while iterations < max_iter {
        iterations += 1;
        let next = extract_signal(&Series::new(current.clone())?, window, r)?;
        let diff: f64 = next.iter().zip(&current).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = current.iter().map(|x| x * x).sum::<f64>().sqrt();
        current = next;
        let (d, s) = rank_distance(&current, window, r)?;
        objective.push(d);
        sigmas = s;
        if diff <= tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("Cadzow iterations stopped after {iterations} passes without converging");
    }
    let rank_gap = match (sigmas.get(r.wrapping_sub(1)), sigmas.get(r)) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => 0.0,
    };
    Ok(CadzowResult { signal: current, iterations, converged, rank_gap, objective })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    #[default]
    Bic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    #[default]
    Cadzow,
    Ssa,
}

/// `N ln(RSS/N) + 4d`
pub fn aic(n: usize, rss: f64, d: usize) -> f64 {
    let n = n as f64;
    n * (rss / n).ln() + 4.0 * d as f64
}

/// `N ln(RSS/N) + 2d ln N`
pub fn bic(n: usize, rss: f64, d: usize) -> f64 {
    let n = n as f64;
    n * (rss / n).ln() + 2.0 * d as f64 * n.ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSelection {
    pub ranks: Vec<usize>,
    pub rss: Vec<f64>,
    pub aic: Vec<f64>,
    pub bic: Vec<f64>,
    pub criterion: Criterion,
    pub chosen: usize,
}

/// Scores ranks `0..=d_max` by the residual sum of squares of the rank-`d`
/// signal estimate and picks the minimizer of the chosen criterion.
pub fn rank_select(
    series: &Series,
    window: usize,
    d_max: usize,
    criterion: Criterion,
    estimator: Estimator,
) -> Result<RankSelection> {
    let cfg = WindowConfig::new(series.len(), window)?;
    check_rank(cfg, d_max)?;
    let x = series.values();
    let n = x.len();
    let ranks: Vec<usize> = (0..=d_max).collect();
    let mut rss = Vec::with_capacity(ranks.len());
    for &d in &ranks {
        let fit = match (d, estimator) {
            (0, _) => vec![0.0; n],
            (_, Estimator::Ssa) => extract_signal(series, window, d)?,
            (_, Estimator::Cadzow) => {
                cadzow(series, window, d, DEFAULT_CADZOW_ITERATIONS, DEFAULT_CADZOW_TOL)?.signal
            }
        };
        rss.push(x.iter().zip(&fit).map(|(a, b)| (a - b).powi(2)).sum::<f64>());
    }
    // an exact fit would give ln(0); cap it at a tiny positive value
    let floor = rss[0].max(f64::MIN_POSITIVE) * 1e-300;
    let aic_v: Vec<f64> = ranks.iter().zip(&rss).map(|(&d, &s)| aic(n, s.max(floor), d)).collect();
    let bic_v: Vec<f64> = ranks.iter().zip(&rss).map(|(&d, &s)| bic(n, s.max(floor), d)).collect();
    let scores = match criterion {
        Criterion::Aic => &aic_v,
        Criterion::Bic => &bic_v,
    };
    let chosen = scores
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| ranks[i]);
    Ok(RankSelection { ranks, rss, aic: aic_v, bic: bic_v, criterion, chosen })
}
