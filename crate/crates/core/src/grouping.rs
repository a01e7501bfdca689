//! Grouping of eigentriples, reconstruction, w-correlations and the automatic
//! identification helpers.
//!
//! Component indices in a [`Grouping`] are 1-based, matching the usual
//! numbering of eigentriples by decreasing singular value.

use std::io::Write;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::Decomposition;
use crate::error::{Result, SsaError};
use crate::periodogram::periodogram;
use crate::series::format_g17;
use crate::trajectory::WindowConfig;

/// Names that reconstruction output reserves for itself.
pub const RESERVED_NAMES: [&str; 2] = ["residual", "centering"];

pub const DEFAULT_TREND_FREQUENCY: f64 = 1.0 / 24.0;
pub const DEFAULT_TREND_THRESHOLD: f64 = 0.9;

/// Named disjoint sets of 1-based component indices.
///
/// Serializes as a JSON object `{ "name": [indices] }` in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grouping {
    groups: IndexMap<String, Vec<usize>>,
}

impl Grouping {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a group. Indices are sorted and deduplicated.
    pub fn insert(&mut self, name: impl Into<String>, indices: impl IntoIterator<Item = usize>) -> Result<()> {
        let name = name.into();
        if name.trim().is_empty() || RESERVED_NAMES.contains(&name.as_str()) {
            return Err(SsaError::InvalidGroupName(name));
        }
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        if let Some(&0) = indices.first() {
            return Err(SsaError::IndexOutOfRange { index: 0, max: usize::MAX });
        }
        for &i in &indices {
            if let Some((other, _)) = self.groups.iter().find(|(_, g)| g.binary_search(&i).is_ok()) {
                return Err(SsaError::OverlappingGroups {
                    index: i,
                    first: other.clone(),
                    second: name,
                });
            }
        }
        self.groups.insert(name, indices);
        Ok(())
    }

    pub fn with_group(mut self, name: impl Into<String>, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        self.insert(name, indices)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&[usize]> {
        self.groups.get(name).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[usize])> {
        self.groups.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Checks names, ranges and disjointness against `count` components.
    ///
    /// Needed after deserialization, which bypasses [`Grouping::insert`].
    pub fn validate(&self, count: usize) -> Result<()> {
        let mut owner: Vec<Option<&str>> = vec![None; count];
        for (name, indices) in &self.groups {
            if name.trim().is_empty() || RESERVED_NAMES.contains(&name.as_str()) {
                return Err(SsaError::InvalidGroupName(name.clone()));
            }
            for &i in indices {
                if i == 0 || i > count {
                    return Err(SsaError::IndexOutOfRange { index: i, max: count });
                }
                match owner[i - 1] {
                    Some(first) if first != name => {
                        return Err(SsaError::OverlappingGroups {
                            index: i,
                            first: first.to_string(),
                            second: name.clone(),
                        })
                    }
                    _ => owner[i - 1] = Some(name),
                }
            }
        }
        Ok(())
    }

    /// 1-based indices among `1..=count` not assigned to any group.
    pub fn ungrouped(&self, count: usize) -> Vec<usize> {
        let mut used = vec![false; count];
        for i in self.groups.values().flatten() {
            if (1..=count).contains(i) {
                used[i - 1] = true;
            }
        }
        (1..=count).filter(|&i| !used[i - 1]).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: IndexMap<String, Vec<usize>> = serde_json::from_str(text)?;
        let mut out = Self::new();
        for (name, indices) in raw {
            out.insert(name, indices)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grouping serializes")
    }
}

/// Reconstructed series per group plus the centering part and the residual.
#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction {
    pub groups: IndexMap<String, Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centering: Option<Vec<f64>>,
    /// Series minus every group and the centering part.
    pub residual: Vec<f64>,
}

/// Hankelized sum of each group's triples.
pub fn reconstruct(dec: &Decomposition, grouping: &Grouping) -> Result<Reconstruction> {
    grouping.validate(dec.len())?;
    let pieces: Vec<(String, Vec<f64>)> = grouping
        .groups
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(name, indices)| {
            let zero_based: Vec<usize> = indices.iter().map(|i| i - 1).collect();
            dec.reconstruct_indices(&zero_based).map(|s| (name.clone(), s))
        })
        .collect::<Result<_>>()?;
    let mut residual = dec.series().values().to_vec();
    for (_, s) in &pieces {
        residual.iter_mut().zip(s).for_each(|(r, x)| *r -= x);
    }
    let centering = dec.centering_component().map(<[f64]>::to_vec);
    if let Some(c) = &centering {
        residual.iter_mut().zip(c).for_each(|(r, x)| *r -= x);
    }
    Ok(Reconstruction {
        groups: pieces.into_iter().collect(),
        centering,
        residual,
    })
}

/// Symmetric matrix of weighted correlations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WCorMatrix {
    size: usize,
    values: Vec<f64>,
    /// 1-based indices of series with zero weighted norm; their rows are 0.
    zero_norm: Vec<usize>,
}

impl WCorMatrix {
    /// Builds a matrix from row-major entries. Used for externally computed
    /// matrices and tests.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        let mut values = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(SsaError::DimensionMismatch { expected: size, got: row.len() });
            }
            values.extend(row);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SsaError::NonFinite(i));
        }
        Ok(Self { size, values, zero_norm: Vec::new() })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Entry at 0-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.size.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn zero_norm(&self) -> &[usize] {
        &self.zero_norm
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        for row in self.values.chunks(self.size.max(1)) {
            let line: Vec<String> = row.iter().map(|&x| format_g17(x)).collect();
            writeln!(writer, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// W-correlations of the first `up_to` elementary reconstructed series.
pub fn wcor(dec: &Decomposition, up_to: usize) -> Result<WCorMatrix> {
    if up_to > dec.len() {
        return Err(SsaError::TooManyComponents { requested: up_to, max: dec.len() });
    }
    let series: Vec<Vec<f64>> = (0..up_to)
        .into_par_iter()
        .map(|i| dec.elementary(i))
        .collect::<Result<_>>()?;
    wcor_of_series(&series, dec.window())
}

/// W-correlations of arbitrary series of length `N` under the window's weights.
pub fn wcor_of_series(series: &[Vec<f64>], window: WindowConfig) -> Result<WCorMatrix> {
    let weights = window.weights();
    for s in series {
        if s.len() != weights.len() {
            return Err(SsaError::DimensionMismatch { expected: weights.len(), got: s.len() });
        }
    }
    let inner = |a: &[f64], b: &[f64]| -> f64 {
        weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    };
    let norms: Vec<f64> = series.iter().map(|s| inner(s, s).sqrt()).collect();
    let scale = norms.iter().copied().fold(0.0, f64::max);
    let zero: Vec<bool> = norms.iter().map(|&n| n == 0.0 || n <= 1e-14 * scale).collect();
    let size = series.len();
    let mut values = vec![0.0; size * size];
    for i in 0..size {
        if zero[i] {
            continue;
        }
        values[i * size + i] = 1.0;
        for j in i + 1..size {
            if zero[j] {
                continue;
            }
            let w = (inner(&series[i], &series[j]) / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            values[i * size + j] = w;
            values[j * size + i] = w;
        }
    }
    Ok(WCorMatrix {
        size,
        values,
        zero_norm: (1..=size).filter(|&i| zero[i - 1]).collect(),
    })
}

/// 1-based indices whose left-vector periodogram puts more than `threshold`
/// of its mass on frequencies in `[0, omega0]`.
pub fn auto_trend(dec: &Decomposition, omega0: f64, threshold: f64) -> Result<Vec<usize>> {
    if !(omega0 > 0.0 && omega0 < 0.5) {
        return Err(SsaError::InvalidParameter(format!("omega0 must lie in (0, 0.5), got {omega0}")));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(SsaError::InvalidParameter(format!("threshold must lie in [0, 1], got {threshold}")));
    }
    let l = dec.window().window_len() as f64;
    Ok(dec
        .triples()
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let p = periodogram(&t.u);
            let total: f64 = p.iter().sum();
            let low: f64 = p
                .iter()
                .enumerate()
                .filter(|(k, _)| *k as f64 / l <= omega0 + 1e-12)
                .map(|(_, v)| v)
                .sum();
            total > 0.0 && low / total > threshold
        })
        .map(|(i, _)| i + 1)
        .collect())
}

/// Adjacent pair of components identified as one harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodicPair {
    pub first: usize,
    pub second: usize,
    pub frequency: f64,
}

struct Peak {
    bin: usize,
    frequency: f64,
    share: f64,
}

/// Dominant periodogram bin of `u`, its neighbour-weighted frequency and the
/// share of mass carried by the peak and its two neighbours.
fn dominant_peak(u: &[f64]) -> Option<Peak> {
    let p = periodogram(u);
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let bin = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)?;
    let lo = bin.saturating_sub(1);
    let hi = (bin + 1).min(p.len() - 1);
    let mass: f64 = p[lo..=hi].iter().sum();
    let centroid: f64 = (lo..=hi).map(|k| k as f64 * p[k]).sum::<f64>() / mass;
    Some(Peak {
        bin,
        frequency: centroid / u.len() as f64,
        share: mass / total,
    })
}

/// Adjacent pairs `(i, i+1)` whose eigenvector periodograms peak at the same
/// interior frequency within `freq_tol`, each with a peak share of at least
/// `share_threshold`. Pairs do not overlap.
pub fn auto_periodic_pairs(dec: &Decomposition, freq_tol: f64, share_threshold: f64) -> Result<Vec<PeriodicPair>> {
    if dec.len() < 2 {
        return Ok(Vec::new());
    }
    if freq_tol < 0.0 || !(0.0..=1.0).contains(&share_threshold) {
        return Err(SsaError::InvalidParameter(
            "freq_tol must be nonnegative and share_threshold in [0, 1]".into(),
        ));
    }
    let l = dec.window().window_len();
    let peaks: Vec<Option<Peak>> = dec.triples().par_iter().map(|t| dominant_peak(&t.u)).collect();
    let interior = |p: &Peak| p.bin != 0 && 2 * p.bin != l;
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < peaks.len() {
        if let (Some(a), Some(b)) = (&peaks[i], &peaks[i + 1]) {
            if interior(a)
                && interior(b)
                && (a.frequency - b.frequency).abs() <= freq_tol
                && a.share >= share_threshold
                && b.share >= share_threshold
            {
                out.push(PeriodicPair {
                    first: i + 1,
                    second: i + 2,
                    frequency: 0.5 * (a.frequency + b.frequency),
                });
                i += 2;
                continue;
            }
        }
        i += 1;
    }
    Ok(out)
}

/// Average-linkage agglomerative clustering on `1 - |w_ij|` into `n_groups`
/// groups named `G1, G2, ...` in order of their smallest member.
pub fn cluster_groups(w: &WCorMatrix, n_groups: usize) -> Result<Grouping> {
    let n = w.size();
    if n_groups == 0 || n_groups > n {
        return Err(SsaError::InvalidParameter(format!(
            "number of groups must lie in 1..={n}, got {n_groups}"
        )));
    }
    if w.values.iter().all(|&x| x == 0.0) {
        return Err(SsaError::Degenerate("w-correlation matrix is all zero".into()));
    }
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 1.0 - w.get(i, j).abs()).collect())
        .collect();
    while clusters.len() > n_groups {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                if dist[i][j] < best.2 {
                    best = (i, j, dist[i][j]);
                }
            }
        }
        let (a, b, _) = best;
        let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
        for k in 0..clusters.len() {
            let d = (na * dist[a][k] + nb * dist[b][k]) / (na + nb);
            dist[a][k] = d;
            dist[k][a] = d;
        }
        dist[a][a] = 0.0;
        let merged = clusters.remove(b);
        clusters[a].extend(merged);
        dist.remove(b);
        for row in &mut dist {
            row.remove(b);
        }
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    let mut out = Grouping::new();
    for (g, members) in clusters.into_iter().enumerate() {
        out.insert(format!("G{}", g + 1), members.into_iter().map(|i| i + 1))?;
    }
    Ok(out)
}
