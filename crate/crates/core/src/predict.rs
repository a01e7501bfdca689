//! Forecasting, gap filling and bootstrap intervals built on the signal
//! subspace of a decomposition.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{decompose_basic, Centering, Decomposition};
use crate::error::{Result, SsaError};
use crate::linalg::{dot, LinearOperator};
use crate::model::{minnorm_lrr, LinearRecurrence, SubspaceModel};
use crate::series::Series;
use crate::svd::{truncated_svd, SvdOptions};
use crate::trajectory::WindowConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForecastMethod {
    Recurrent,
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalKind {
    /// Covers a future observation: simulated forecasts plus fresh noise.
    #[default]
    Prediction,
    /// Covers the future signal: simulated forecasts only.
    Confidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    #[default]
    Gaussian,
    /// Draws with replacement from the observed residuals.
    Resample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Intervals {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    pub kind: IntervalKind,
    /// Set when the residuals vanish and the intervals collapse to the point forecast.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastResult {
    pub fitted: Vec<f64>,
    pub forecast: Vec<f64>,
    pub method: ForecastMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Intervals>,
}

/// Signal subspace, its min-norm recurrence and the reconstructed group.
fn group_model(dec: &Decomposition, group: &[usize]) -> Result<(SubspaceModel, LinearRecurrence, Vec<f64>)> {
    if dec.centering() != Centering::None {
        return Err(SsaError::InvalidParameter(
            "forecasting needs a decomposition without centering".into(),
        ));
    }
    if group.is_empty() {
        return Err(SsaError::InvalidParameter("forecast group is empty".into()));
    }
    let subspace = SubspaceModel::from_decomposition(dec, group)?;
    let lrr = minnorm_lrr(&subspace)?;
    let zero_based: Vec<usize> = group.iter().map(|i| i - 1).collect();
    let fitted = dec.reconstruct_indices(&zero_based)?;
    Ok((subspace, lrr, fitted))
}

/// Continues the reconstruction of the 1-based `group` by its min-norm recurrence.
pub fn forecast_recurrent(dec: &Decomposition, group: &[usize], h: usize) -> Result<ForecastResult> {
    let (_, lrr, fitted) = group_model(dec, group)?;
    let forecast = lrr.extend(&fitted, h)?;
    Ok(ForecastResult { fitted, forecast, method: ForecastMethod::Recurrent, intervals: None })
}

/// Extends the sequence of projected lagged vectors inside the signal
/// subspace and reads the forecast off the diagonal averages.
///
/// A vector `U c` is continued by `U (Psi c)`, where `Psi` solves
/// `U_lower Psi = U_upper` in the least-squares sense. Its first `L-1`
/// coordinates are the projection of the shifted vector onto the span of
/// `U_lower` and its last coordinate is the min-norm recurrence applied to
/// them.
pub fn forecast_vector(dec: &Decomposition, group: &[usize], h: usize) -> Result<ForecastResult> {
    let (subspace, _, fitted) = group_model(dec, group)?;
    let l = subspace.window_len();
    let r = subspace.rank();
    let basis = subspace.basis();
    let lower = DMatrix::from_fn(l - 1, r, |i, j| basis[j][i]);
    let upper = DMatrix::from_fn(l - 1, r, |i, j| basis[j][i + 1]);
    let svd = lower.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    let psi = svd.solve(&upper, eps).map_err(|e| SsaError::Degenerate(e.to_string()))?;

    // coordinates of the last projected lagged vector: sigma_m v_m[K-1]
    let k = dec.window().lagged_count();
    let triples = dec.triples();
    let mut c = nalgebra::DVector::from_iterator(r, group.iter().map(|&i| triples[i - 1].sigma * triples[i - 1].v[k - 1]));
    // columns K..K+h+L-2 of the extended matrix, each L long
    let extra = h + l - 1;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(extra);
    for _ in 0..extra {
        c = &psi * c;
        columns.push((0..l).map(|i| (0..r).map(|m| basis[m][i] * c[m]).sum()).collect());
    }
    let forecast = (0..h)
        .map(|s| (0..l).map(|i| columns[s + l - 1 - i][i]).sum::<f64>() / l as f64)
        .collect();
    Ok(ForecastResult { fitted, forecast, method: ForecastMethod::Vector, intervals: None })
}

pub fn forecast(dec: &Decomposition, group: &[usize], h: usize, method: ForecastMethod) -> Result<ForecastResult> {
    match method {
        ForecastMethod::Recurrent => forecast_recurrent(dec, group, h),
        ForecastMethod::Vector => forecast_vector(dec, group, h),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapFill {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapFillResult {
    pub completed: Vec<f64>,
    pub iterations: usize,
    pub fills: Vec<GapFill>,
    pub converged: bool,
    /// Positions filled from one side only.
    pub one_sided: Vec<usize>,
}

fn missing_positions(series: &Series) -> Vec<usize> {
    (0..series.len()).filter(|&i| !series.is_present(i)).collect()
}

/// Rank-`r` SSA reconstruction of a complete sample vector.
fn low_rank_signal(values: &[f64], window: usize, r: usize) -> Result<Vec<f64>> {
    let dec = decompose_basic(&Series::new(values.to_vec())?, window, r)?;
    dec.reconstruct_indices(&(0..dec.len()).collect::<Vec<_>>())
}

/// Repeats rank-`r` reconstruction, each time restoring the observed
/// samples, until successive reconstructions differ by less than `tol` at
/// every gap. Gaps start at the mean of the present samples.
pub fn gapfill_iterative(series: &Series, window: usize, r: usize, tol: f64, max_iter: usize) -> Result<GapFillResult> {
    WindowConfig::new(series.len(), window)?;
    if r == 0 {
        return Err(SsaError::InvalidParameter("rank must be positive".into()));
    }
    if series.present_count() < r + 1 {
        return Err(SsaError::Insufficient(format!(
            "{} present samples, at least {} required",
            series.present_count(),
            r + 1
        )));
    }
    let gaps = missing_positions(series);
    let mut x = series.values().to_vec();
    if gaps.is_empty() {
        return Ok(GapFillResult { completed: x, iterations: 0, fills: Vec::new(), converged: true, one_sided: Vec::new() });
    }
    let mean = series.present_mean();
    gaps.iter().for_each(|&g| x[g] = mean);
    let mut previous: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let rec = low_rank_signal(&x, window, r)?;
        let current: Vec<f64> = gaps.iter().map(|&g| rec[g]).collect();
        gaps.iter().zip(&current).for_each(|(&g, &v)| x[g] = v);
        if let Some(prev) = &previous {
            let change = prev.iter().zip(&current).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if change < tol {
                converged = true;
                break;
            }
        }
        previous = Some(current);
    }
    if !converged {
        log::warn!("iterative gap filling stopped after {iterations} iterations without converging");
    }
    let fills = gaps.iter().map(|&g| GapFill { index: g, value: x[g] }).collect();
    Ok(GapFillResult { completed: x, iterations, fills, converged, one_sided: Vec::new() })
}

/// Trajectory matrix restricted to the lagged windows that contain no gap.
struct CompleteWindows<'a> {
    values: &'a [f64],
    window: usize,
    starts: Vec<usize>,
}

impl LinearOperator for CompleteWindows<'_> {
    fn nrows(&self) -> usize {
        self.window
    }

    fn ncols(&self) -> usize {
        self.starts.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.window];
        for (&s, &c) in self.starts.iter().zip(x) {
            out.iter_mut().zip(&self.values[s..s + self.window]).for_each(|(o, v)| *o += c * v);
        }
        out
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.starts.iter().map(|&s| dot(&self.values[s..s + self.window], y)).collect()
    }
}

/// Fills each run of missing samples from the signal subspace of the
/// gap-free windows: forward prediction from the left, backward prediction
/// from the right, averaged when both exist. A side is usable when at least
/// `L` present samples adjoin the gap.
pub fn gapfill_subspace(series: &Series, window: usize, r: usize) -> Result<GapFillResult> {
    let n = series.len();
    WindowConfig::new(n, window)?;
    if r == 0 || r >= window {
        return Err(SsaError::InvalidParameter(format!("rank must lie in 1..{window}, got {r}")));
    }
    let present: Vec<bool> = (0..n).map(|i| series.is_present(i)).collect();
    let values: Vec<f64> = series.values().iter().map(|v| if v.is_nan() { 0.0 } else { *v }).collect();
    // run[i] = number of consecutive present samples ending at i
    let mut run = vec![0usize; n];
    for i in 0..n {
        if present[i] {
            run[i] = if i == 0 { 1 } else { run[i - 1] + 1 };
        }
    }
    let starts: Vec<usize> = (0..=n - window).filter(|&s| run[s + window - 1] >= window).collect();
    if starts.len() <= r {
        return Err(SsaError::Insufficient(format!(
            "{} gap-free windows of length {window}, more than {r} required",
            starts.len()
        )));
    }
    let op = CompleteWindows { values: &values, window, starts };
    let triples = truncated_svd(&op, r, &SvdOptions::default())?;
    if triples.len() < r {
        return Err(SsaError::RankDeficient { rank: triples.len(), expected: r });
    }
    let basis: Vec<Vec<f64>> = triples.into_iter().map(|t| t.u).collect();
    let reversed: Vec<Vec<f64>> = basis.iter().map(|u| u.iter().rev().copied().collect()).collect();
    let forward = minnorm_lrr(&SubspaceModel::new(basis)?)?;
    let backward = minnorm_lrr(&SubspaceModel::new(reversed)?)?;

    let mut completed = values.clone();
    let mut fills = Vec::new();
    let mut one_sided = Vec::new();
    let mut i = 0;
    while i < n {
        if present[i] {
            i += 1;
            continue;
        }
        let a = i;
        while i < n && !present[i] {
            i += 1;
        }
        let b = i; // gap is a..b
        let len = b - a;
        let left_ok = a >= window && run[a - 1] >= window;
        let right_ok = b + window <= n && (b..b + window).all(|j| present[j]);
        let from_left = if left_ok { Some(forward.extend(&values[..a], len)?) } else { None };
        let from_right = if right_ok {
            let tail: Vec<f64> = values[b..b + window].iter().rev().copied().collect();
            let mut back = backward.extend(&tail, len)?;
            back.reverse();
            Some(back)
        } else {
            None
        };
        let filled: Vec<f64> = match (from_left, from_right) {
            (Some(f), Some(g)) => f.iter().zip(&g).map(|(x, y)| 0.5 * (x + y)).collect(),
            (Some(f), None) | (None, Some(f)) => {
                one_sided.extend(a..b);
                f
            }
            (None, None) => {
                return Err(SsaError::Insufficient(format!(
                    "gap at positions {}..{} has fewer than {window} present samples on both sides",
                    a + 1,
                    b
                )))
            }
        };
        for (j, v) in (a..b).zip(filled) {
            completed[j] = v;
            fills.push(GapFill { index: j, value: v });
        }
    }
    Ok(GapFillResult { completed, iterations: 1, fills, converged: true, one_sided })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub replications: usize,
    pub level: f64,
    pub seed: u64,
    pub kind: IntervalKind,
    pub noise: NoiseModel,
    pub method: ForecastMethod,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            replications: 200,
            level: 0.95,
            seed: 0,
            kind: IntervalKind::Prediction,
            noise: NoiseModel::Gaussian,
            method: ForecastMethod::Recurrent,
        }
    }
}

fn draw_noise(rng: &mut ChaCha8Rng, model: NoiseModel, residuals: &[f64], sd: f64, len: usize) -> Vec<f64> {
    match model {
        NoiseModel::Gaussian => {
            let normal = Normal::new(0.0, sd).expect("standard deviation is positive and finite");
            (0..len).map(|_| normal.sample(rng)).collect()
        }
        NoiseModel::Resample => (0..len).map(|_| residuals[rng.random_range(0..residuals.len())]).collect(),
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Forecast of the rank-`r` SSA signal with bootstrap intervals from
/// simulated series `signal + noise`. Replication `b` draws from its own
/// random stream, so results do not depend on scheduling.
pub fn bootstrap_intervals(series: &Series, window: usize, r: usize, h: usize, opts: &BootstrapOptions) -> Result<ForecastResult> {
    let cfg = WindowConfig::new(series.len(), window)?;
    if r == 0 || r >= cfg.min_dim() {
        return Err(SsaError::TooManyComponents { requested: r, max: cfg.min_dim() - 1 });
    }
    let group: Vec<usize> = (1..=r).collect();
    bootstrap_group_intervals(series, window, &group, h, opts)
}

/// [`bootstrap_intervals`] for an arbitrary group of 1-based components. The
/// signal is the reconstruction of the group and everything else counts as
/// noise.
pub fn bootstrap_group_intervals(
    series: &Series,
    window: usize,
    group: &[usize],
    h: usize,
    opts: &BootstrapOptions,
) -> Result<ForecastResult> {
    if opts.replications < 100 {
        return Err(SsaError::InvalidParameter(format!(
            "at least 100 bootstrap replications required, got {}",
            opts.replications
        )));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(SsaError::InvalidParameter(format!("level must lie in (0, 1), got {}", opts.level)));
    }
    let cfg = WindowConfig::new(series.len(), window)?;
    let k = group.iter().copied().max().unwrap_or(0);
    if group.is_empty() || group.contains(&0) {
        return Err(SsaError::InvalidParameter("group must hold 1-based component indices".into()));
    }
    if k >= cfg.min_dim() {
        return Err(SsaError::TooManyComponents { requested: k, max: cfg.min_dim() - 1 });
    }
    let dec = decompose_basic(series, window, k)?;
    let present = |d: &Decomposition| -> Vec<usize> { group.iter().copied().filter(|&i| i <= d.len()).collect() };
    let mut point = forecast(&dec, &present(&dec), h, opts.method)?;
    let x = series.values();
    let residuals: Vec<f64> = x.iter().zip(&point.fitted).map(|(a, b)| a - b).collect();
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    let scale = x.iter().map(|v| v * v).sum::<f64>() / n;
    if var <= 1e-24 * scale.max(f64::MIN_POSITIVE) {
        point.intervals = Some(Intervals {
            lower: point.forecast.clone(),
            upper: point.forecast.clone(),
            level: opts.level,
            kind: opts.kind,
            degenerate: true,
        });
        return Ok(point);
    }
    let sd = var.sqrt();
    let signal = point.fitted.clone();
    let sims: Vec<Vec<f64>> = (0..opts.replications)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(b as u64);
            let noise = draw_noise(&mut rng, opts.noise, &residuals, sd, signal.len());
            let surrogate: Vec<f64> = signal.iter().zip(&noise).map(|(s, e)| s + e).collect();
            let d = decompose_basic(&Series::new(surrogate)?, window, k)?;
            let mut f = forecast(&d, &present(&d), h, opts.method)?.forecast;
            if opts.kind == IntervalKind::Prediction {
                let future = draw_noise(&mut rng, opts.noise, &residuals, sd, h);
                f.iter_mut().zip(future).for_each(|(v, e)| *v += e);
            }
            Ok(f)
        })
        .collect::<Result<_>>()?;
    let alpha = (1.0 - opts.level) / 2.0;
    let mut lower = Vec::with_capacity(h);
    let mut upper = Vec::with_capacity(h);
    for step in 0..h {
        let mut column: Vec<f64> = sims.iter().map(|s| s[step]).collect();
        column.sort_by(f64::total_cmp);
        let p = point.forecast[step];
        lower.push(quantile(&column, alpha).min(p));
        upper.push(quantile(&column, 1.0 - alpha).max(p));
    }
    point.intervals = Some(Intervals { lower, upper, level: opts.level, kind: opts.kind, degenerate: false });
    Ok(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dec(x: Vec<f64>, l: usize, k: usize) -> Decomposition {
        decompose_basic(&Series::new(x).unwrap(), l, k).unwrap()
    }

    #[test]
    fn powers_of_two() {
        let d = dec(vec![1.0, 2.0, 4.0, 8.0], 2, 1);
        for f in [forecast_recurrent(&d, &[1], 2).unwrap(), forecast_vector(&d, &[1], 2).unwrap()] {
            assert!((f.forecast[0] - 16.0).abs() < 1e-9);
            assert!((f.forecast[1] - 32.0).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_continuation() {
        let d = dec((1..=10).map(f64::from).collect(), 3, 2);
        let f = forecast_recurrent(&d, &[1, 2], 3).unwrap();
        for (v, e) in f.forecast.iter().zip([11.0, 12.0, 13.0]) {
            assert!((v - e).abs() < 1e-8);
        }
        let g = forecast_vector(&d, &[1, 2], 3).unwrap();
        for (v, e) in g.forecast.iter().zip([11.0, 12.0, 13.0]) {
            assert!((v - e).abs() < 1e-8);
        }
    }

    #[test]
    fn sine_continuation_agrees() {
        let s = |n: usize| (2.0 * PI * n as f64 / 12.0).sin();
        let d = dec((0..60).map(s).collect(), 24, 2);
        let a = forecast_recurrent(&d, &[1, 2], 12).unwrap();
        let b = forecast_vector(&d, &[1, 2], 12).unwrap();
        for i in 0..12 {
            assert!((a.forecast[i] - s(60 + i)).abs() < 1e-6);
            assert!((b.forecast[i] - a.forecast[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn vertical_group_errors() {
        let d = dec(vec![0.0, 0.0, 0.0, 5.0], 2, 1);
        assert!(matches!(forecast_recurrent(&d, &[1], 1), Err(SsaError::NotForecastable { .. })));
    }

    #[test]
    fn iterative_fill_constant_and_linear() {
        let mut v: Vec<Option<f64>> = vec![Some(2.5); 12];
        v[4] = None;
        let g = gapfill_iterative(&Series::from_options(&v).unwrap(), 4, 1, 1e-10, 50).unwrap();
        assert_eq!(g.iterations, 2);
        assert!(g.converged);
        assert!((g.fills[0].value - 2.5).abs() < 1e-12);

        let mut v: Vec<Option<f64>> = (1..=12).map(|i| Some(i as f64)).collect();
        v[4] = None;
        let g = gapfill_iterative(&Series::from_options(&v).unwrap(), 3, 2, 1e-12, 500).unwrap();
        assert!(g.converged);
        assert!((g.completed[4] - 5.0).abs() < 1e-6);
        for i in [0usize, 3, 5, 11] {
            assert_eq!(g.completed[i], v[i].unwrap());
        }
    }

    #[test]
    fn iterative_fill_without_gaps_is_identity() {
        let x: Vec<f64> = (0..20).map(|i| (i * i % 7) as f64).collect();
        let g = gapfill_iterative(&Series::new(x.clone()).unwrap(), 5, 2, 1e-8, 10).unwrap();
        assert_eq!(g.completed, x);
        assert_eq!(g.iterations, 0);
    }

    #[test]
    fn subspace_fill_exponential() {
        let mut v: Vec<Option<f64>> = (0..40).map(|i| Some(1.05f64.powi(i))).collect();
        for i in 18..21 {
            v[i] = None;
        }
        let g = gapfill_subspace(&Series::from_options(&v).unwrap(), 6, 1).unwrap();
        for f in &g.fills {
            assert!((f.value - 1.05f64.powi(f.index as i32)).abs() < 1e-6);
        }
        assert!(g.one_sided.is_empty());
    }

    #[test]
    fn subspace_fill_boundary_and_dense() {
        let mut v: Vec<Option<f64>> = (0..30).map(|i| Some((2.0 * PI * i as f64 / 10.0).cos())).collect();
        v[0] = None;
        let g = gapfill_subspace(&Series::from_options(&v).unwrap(), 8, 2).unwrap();
        assert_eq!(g.one_sided, vec![0]);
        assert!((g.completed[0] - 1.0).abs() < 1e-8);

        let dense: Vec<Option<f64>> = (0..30).map(|i| (i % 3 != 0).then_some(1.0)).collect();
        assert!(matches!(
            gapfill_subspace(&Series::from_options(&dense).unwrap(), 8, 1),
            Err(SsaError::Insufficient(_))
        ));
    }

    #[test]
    fn bootstrap_degenerate_and_small_b() {
        let x: Vec<f64> = (0..40).map(|i| (2.0 * PI * i as f64 / 8.0).sin()).collect();
        let s = Series::new(x).unwrap();
        let f = bootstrap_intervals(&s, 16, 2, 4, &BootstrapOptions::default()).unwrap();
        let iv = f.intervals.unwrap();
        assert!(iv.degenerate);
        assert_eq!(iv.lower, iv.upper);
        let bad = BootstrapOptions { replications: 1, ..Default::default() };
        assert!(bootstrap_intervals(&s, 16, 2, 4, &bad).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic_and_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..80)
            .map(|i| (2.0 * PI * i as f64 / 10.0).sin() + 0.2 * rng.random_range(-1.0..1.0))
            .collect();
        let s = Series::new(x).unwrap();
        let opts = BootstrapOptions { replications: 100, seed: 11, ..Default::default() };
        let a = bootstrap_intervals(&s, 20, 2, 5, &opts).unwrap();
        let b = bootstrap_intervals(&s, 20, 2, 5, &opts).unwrap();
        assert_eq!(a, b);
        let iv = a.intervals.unwrap();
        for i in 0..5 {
            assert!(iv.lower[i] <= a.forecast[i] && a.forecast[i] <= iv.upper[i]);
            assert!(iv.upper[i] > iv.lower[i]);
        }
        let conf = BootstrapOptions { kind: IntervalKind::Confidence, noise: NoiseModel::Resample, ..opts };
        let c = bootstrap_intervals(&s, 20, 2, 5, &conf).unwrap().intervals.unwrap();
        assert!(c.upper[0] - c.lower[0] < iv.upper[0] - iv.lower[0]);
    }

    #[test]
    fn group_bootstrap_of_leading_components_matches_rank_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..60)
            .map(|i| 3.0 * (2.0 * PI * i as f64 / 12.0).sin() + (2.0 * PI * i as f64 / 5.0).cos() + 0.1 * rng.random_range(-1.0..1.0))
            .collect();
        let s = Series::new(x).unwrap();
        let opts = BootstrapOptions { replications: 100, seed: 3, ..Default::default() };
        let a = bootstrap_intervals(&s, 24, 2, 4, &opts).unwrap();
        let b = bootstrap_group_intervals(&s, 24, &[1, 2], 4, &opts).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_group_intervals(&s, 24, &[3, 4], 4, &opts).unwrap();
        let iv = c.intervals.unwrap();
        assert!(iv.lower.iter().zip(&c.forecast).all(|(l, p)| l <= p));
        assert!(bootstrap_group_intervals(&s, 24, &[], 4, &opts).is_err());
    }
}
