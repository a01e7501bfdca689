//! Linear recurrences, signal subspaces and the parametric form of
//! finite-rank series.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decompose::Decomposition;
use crate::error::{Result, SsaError};
use crate::linalg::dot;

/// Relative distance under which two roots count as one multiple root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-6;
/// Vandermonde condition number above which estimation logs a warning.
pub const CONDITION_WARNING: f64 = 1e12;
const NU2_TOL: f64 = 1e-10;
const ORTHONORMAL_TOL: f64 = 1e-8;

/// `s_n = a_1 s_{n-1} + ... + a_t s_{n-t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRecurrence {
    coefficients: Vec<f64>,
}

impl LinearRecurrence {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(SsaError::InvalidParameter("recurrence needs at least one coefficient".into()));
        }
        if let Some(i) = coefficients.iter().position(|a| !a.is_finite()) {
            return Err(SsaError::NonFinite(i));
        }
        Ok(Self { coefficients })
    }

    /// `a_1, ..., a_t`; `a_k` multiplies `s_{n-k}`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// Next value after `history`, which must hold at least `order` values.
    pub fn next_value(&self, history: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(history.iter().rev())
            .map(|(a, s)| a * s)
            .sum()
    }

    /// Continues `history` by `h` values.
    pub fn extend(&self, history: &[f64], h: usize) -> Result<Vec<f64>> {
        if history.len() < self.order() {
            return Err(SsaError::SeriesTooShort { len: history.len(), min: self.order() });
        }
        let mut buf = history[history.len() - self.order()..].to_vec();
        let mut out = Vec::with_capacity(h);
        for _ in 0..h {
            let next = self.next_value(&buf);
            buf.remove(0);
            buf.push(next);
            out.push(next);
        }
        Ok(out)
    }

    /// Largest `|s_n - sum a_k s_{n-k}|` over all `n >= order`.
    pub fn max_residual(&self, s: &[f64]) -> f64 {
        let t = self.order();
        (t..s.len())
            .map(|n| (s[n] - self.next_value(&s[..n])).abs())
            .fold(0.0, f64::max)
    }

    /// Same recurrence with trailing zero coefficients removed.
    pub fn trimmed(&self) -> Self {
        let keep = self
            .coefficients
            .iter()
            .rposition(|&a| a != 0.0)
            .map_or(1, |p| p + 1);
        Self { coefficients: self.coefficients[..keep].to_vec() }
    }
}

/// Orthonormal basis of a signal subspace in `R^L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceModel {
    basis: Vec<Vec<f64>>,
    window: usize,
}

impl SubspaceModel {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let window = basis.first().map_or(0, Vec::len);
        if basis.is_empty() || window < 2 {
            return Err(SsaError::InvalidParameter("subspace needs at least one vector of length >= 2".into()));
        }
        if let Some(b) = basis.iter().find(|b| b.len() != window) {
            return Err(SsaError::DimensionMismatch { expected: window, got: b.len() });
        }
        let mut worst: f64 = 0.0;
        for i in 0..basis.len() {
            for j in i..basis.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(&basis[i], &basis[j]) - target).abs());
            }
        }
        if worst > ORTHONORMAL_TOL {
            return Err(SsaError::NotOrthonormal(worst));
        }
        Ok(Self { basis, window })
    }

    /// Left singular vectors of the given 1-based components.
    pub fn from_decomposition(dec: &Decomposition, indices: &[usize]) -> Result<Self> {
        let mut basis = Vec::with_capacity(indices.len());
        for &i in indices {
            if i == 0 || i > dec.len() {
                return Err(SsaError::IndexOutOfRange { index: i, max: dec.len() });
            }
            basis.push(dec.triples()[i - 1].u.clone());
        }
        Self::new(basis)
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn window_len(&self) -> usize {
        self.window
    }

    /// Squared norm of the last coordinates of the basis vectors.
    pub fn verticality(&self) -> f64 {
        self.basis.iter().map(|u| u[self.window - 1].powi(2)).sum()
    }

    /// Orthogonal projection of `x` onto the subspace.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.window];
        for u in &self.basis {
            let c = dot(u, x);
            out.iter_mut().zip(u).for_each(|(o, v)| *o += c * v);
        }
        out
    }
}

/// Min-norm recurrence of order `L-1` governing every vector of the subspace.
pub fn minnorm_lrr(subspace: &SubspaceModel) -> Result<LinearRecurrence> {
    let l = subspace.window_len();
    let nu2 = subspace.verticality();
    if 1.0 - nu2 <= NU2_TOL {
        return Err(SsaError::NotForecastable { nu2 });
    }
    let mut r = vec![0.0; l - 1];
    for u in subspace.basis() {
        let pi = u[l - 1];
        r.iter_mut().zip(&u[..l - 1]).for_each(|(ri, x)| *ri += pi * x);
    }
    let scale = 1.0 / (1.0 - nu2);
    // r_i multiplies the i-th entry of the lagged vector, so a_k = r_{L-k}
    LinearRecurrence::new(r.iter().rev().map(|x| x * scale).collect())
}

/// Shift-invariance roots of the subspace, in no particular order.
pub fn esprit(subspace: &SubspaceModel) -> Result<Vec<Complex64>> {
    let l = subspace.window_len();
    let r = subspace.rank();
    if l < r + 1 {
        return Err(SsaError::InvalidParameter(format!("window {l} too short for rank {r}")));
    }
    let lower = DMatrix::from_fn(l - 1, r, |i, j| subspace.basis()[j][i]);
    let upper = DMatrix::from_fn(l - 1, r, |i, j| subspace.basis()[j][i + 1]);
    let svd = lower.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = 1e-12 * smax;
    let rank = svd.rank(eps);
    if rank < r {
        return Err(SsaError::RankDeficient { rank, expected: r });
    }
    let shift = svd
        .solve(&upper, eps)
        .map_err(|e| SsaError::Degenerate(e.to_string()))?;
    Ok(shift.complex_eigenvalues().iter().copied().collect())
}

/// A characteristic root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

impl Root {
    pub fn simple(value: Complex64) -> Self {
        Self { value, multiplicity: 1 }
    }
}

/// Groups roots closer than `tol` relative to `max(1, |mu|)`, replacing each
/// cluster by its mean. Imaginary parts below that tolerance are zeroed.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<Root> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![roots[i]];
        used[i] = true;
        for j in i + 1..roots.len() {
            let scale = roots[i].norm().max(1.0);
            if !used[j] && (roots[j] - roots[i]).norm() <= tol * scale {
                used[j] = true;
                members.push(roots[j]);
            }
        }
        let mut mean = members.iter().sum::<Complex64>() / members.len() as f64;
        if mean.im.abs() <= tol * mean.norm().max(1.0) {
            mean.im = 0.0;
        }
        out.push(Root { value: mean, multiplicity: members.len() });
    }
    out.sort_by(|a, b| {
        b.value
            .norm()
            .total_cmp(&a.value.norm())
            .then(b.value.im.total_cmp(&a.value.im))
    });
    out
}

/// Roots of `mu^t - a_1 mu^(t-1) - ... - a_t` with detected multiplicities.
pub fn char_roots(lrr: &LinearRecurrence) -> Vec<Root> {
    let a = lrr.trimmed();
    let a = a.coefficients();
    let t = a.len();
    let companion = DMatrix::from_fn(t, t, |i, j| {
        if i == 0 {
            a[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
    cluster_roots(&eig, ROOT_CLUSTER_TOL)
}

/// One real term `A n^degree rho^n cos(2 pi omega n + phi)`, `n = 0, 1, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealTerm {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub rho: f64,
    pub omega: f64,
    pub phi: f64,
    #[serde(default)]
    pub degree: usize,
}

impl RealTerm {
    pub fn value(&self, n: usize) -> f64 {
        let n_f = n as f64;
        let poly = if self.degree == 0 { 1.0 } else { n_f.powi(self.degree as i32) };
        self.amplitude * poly * self.rho.powf(n_f) * (2.0 * std::f64::consts::PI * self.omega * n_f + self.phi).cos()
    }
}

/// Roots, complex amplitudes and their real form for a series
/// `s_n = sum_m sum_l c_ml n^l mu_m^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalModel {
    pub roots: Vec<Root>,
    /// `amplitudes[m][l]` multiplies `n^l mu_m^n`.
    pub amplitudes: Vec<Vec<Complex64>>,
    pub terms: Vec<RealTerm>,
    /// Condition number of the column-normalized Vandermonde matrix.
    pub condition: f64,
}

impl SignalModel {
    /// Model values at `n = 0..len`.
    pub fn evaluate(&self, len: usize) -> Vec<f64> {
        (0..len)
            .map(|n| {
                self.roots
                    .iter()
                    .zip(&self.amplitudes)
                    .map(|(root, c)| {
                        let base = root.value.powu(n as u32);
                        c.iter()
                            .enumerate()
                            .map(|(l, c)| c * base * (n as f64).powi(l as i32))
                            .sum::<Complex64>()
                            .re
                    })
                    .sum()
            })
            .collect()
    }

    pub fn to_json(&self) -> SignalModelDoc {
        SignalModelDoc {
            roots: self
                .roots
                .iter()
                .map(|r| RootDoc { re: r.value.re, im: r.value.im, mult: r.multiplicity })
                .collect(),
            terms: self.terms.clone(),
            condition: self.condition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootDoc {
    pub re: f64,
    pub im: f64,
    pub mult: usize,
}

/// JSON form of a [`SignalModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalModelDoc {
    pub roots: Vec<RootDoc>,
    pub terms: Vec<RealTerm>,
    pub condition: f64,
}

/// Least-squares amplitudes for the given roots.
pub fn estimate_amplitudes(signal: &[f64], roots: &[Root]) -> Result<SignalModel> {
    let n = signal.len();
    let unknowns: usize = roots.iter().map(|r| r.multiplicity).sum();
    if roots.is_empty() || roots.iter().any(|r| r.multiplicity == 0) {
        return Err(SsaError::InvalidParameter("at least one root with positive multiplicity is required".into()));
    }
    if n < unknowns {
        return Err(SsaError::Insufficient(format!("{n} samples for {unknowns} unknowns")));
    }
    let mut columns: Vec<(usize, usize)> = Vec::with_capacity(unknowns);
    for (m, r) in roots.iter().enumerate() {
        columns.extend((0..r.multiplicity).map(|l| (m, l)));
    }
    let mut vander = DMatrix::<Complex64>::zeros(n, unknowns);
    for (col, &(m, l)) in columns.iter().enumerate() {
        let mu = roots[m].value;
        let mut p = Complex64::new(1.0, 0.0);
        for t in 0..n {
            vander[(t, col)] = p * (t as f64).powi(l as i32);
            p *= mu;
        }
    }
    let col_norms: Vec<f64> = (0..unknowns).map(|c| vander.column(c).norm()).collect();
    if let Some(c) = col_norms.iter().position(|v| !v.is_finite() || *v == 0.0) {
        return Err(SsaError::Degenerate(format!("Vandermonde column {} is zero or overflows", c + 1)));
    }
    for (c, s) in col_norms.iter().enumerate() {
        vander.column_mut(c).unscale_mut(*s);
    }
    let svd = vander.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > CONDITION_WARNING {
        log::warn!("Vandermonde matrix is ill-conditioned (condition number {condition:e})");
    }
    let rhs = DVector::from_iterator(n, signal.iter().map(|&x| Complex64::new(x, 0.0)));
    let coef = svd
        .solve(&rhs, 1e-14 * smax)
        .map_err(|e| SsaError::Degenerate(e.to_string()))?;
    let mut amplitudes: Vec<Vec<Complex64>> = roots.iter().map(|r| vec![Complex64::default(); r.multiplicity]).collect();
    for (col, &(m, l)) in columns.iter().enumerate() {
        amplitudes[m][l] = coef[col] / col_norms[col];
    }
    let terms = roots_to_realform(roots, &amplitudes)?;
    Ok(SignalModel { roots: roots.to_vec(), amplitudes, terms, condition })
}

/// Pairs conjugate roots into damped sinusoids; real roots become
/// exponentials with `omega` 0 (positive root) or 0.5 (negative root).
pub fn roots_to_realform(roots: &[Root], amplitudes: &[Vec<Complex64>]) -> Result<Vec<RealTerm>> {
    if roots.len() != amplitudes.len() {
        return Err(SsaError::DimensionMismatch { expected: roots.len(), got: amplitudes.len() });
    }
    let is_real = |z: Complex64| z.im.abs() <= 1e-9 * z.norm().max(1.0);
    let mut consumed = vec![false; roots.len()];
    let mut terms = Vec::new();
    for m in 0..roots.len() {
        if consumed[m] {
            continue;
        }
        let mu = roots[m].value;
        consumed[m] = true;
        if is_real(mu) {
            let omega = if mu.re < 0.0 { 0.5 } else { 0.0 };
            for (l, c) in amplitudes[m].iter().enumerate() {
                let (amplitude, phi) = if c.re < 0.0 { (-c.re, std::f64::consts::PI) } else { (c.re, 0.0) };
                terms.push(RealTerm { amplitude, rho: mu.re.abs(), omega, phi, degree: l });
            }
            continue;
        }
        let partner = (0..roots.len()).find(|&j| {
            !consumed[j]
                && roots[j].multiplicity == roots[m].multiplicity
                && (roots[j].value - mu.conj()).norm() <= ROOT_CLUSTER_TOL * mu.norm().max(1.0)
        });
        let Some(j) = partner else {
            return Err(SsaError::UnpairedRoot { re: mu.re, im: mu.im });
        };
        consumed[j] = true;
        // use the root in the upper half-plane so that omega > 0
        let (top, coeffs) = if mu.im > 0.0 { (mu, &amplitudes[m]) } else { (roots[j].value, &amplitudes[j]) };
        let omega = top.arg() / (2.0 * std::f64::consts::PI);
        for (l, c) in coeffs.iter().enumerate() {
            let mut phi = c.arg();
            if phi <= -std::f64::consts::PI {
                phi += 2.0 * std::f64::consts::PI;
            }
            terms.push(RealTerm { amplitude: 2.0 * c.norm(), rho: top.norm(), omega, phi, degree: l });
        }
    }
    Ok(terms)
}
