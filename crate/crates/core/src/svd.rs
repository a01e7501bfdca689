//! Leading singular triples of a matrix-free operator.
//!
//! Large operators go through a thick-restarted Golub-Kahan-Lanczos
//! bidiagonalization with full reorthogonalization; small ones are
//! materialized and handed to a dense SVD.
//!
//! Singular vectors belonging to equal singular values are only defined up to
//! a rotation of their common subspace. Every returned triple has the first
//! significant component of `u` positive so runs are reproducible, but within
//! a degenerate subspace the particular basis depends on the algorithm path.

use nalgebra::{DMatrix, DVector, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SsaError};
use crate::linalg::{self, LinearOperator};

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_CUTOFF: f64 = 1e-11;

/// A singular value with its left (`u`, length `L`) and right (`v`, length
/// `K`) singular vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenTriple {
    pub sigma: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl EigenTriple {
    /// Eigenvalue of `X X^T`, i.e. `sigma^2`.
    pub fn lambda(&self) -> f64 {
        self.sigma * self.sigma
    }
}

#[derive(Debug, Clone)]
pub struct SvdOptions {
    /// Residual tolerance relative to the largest singular value.
    pub tol: f64,
    /// Restart budget; `None` means `10 * k`.
    pub max_restarts: Option<usize>,
    /// Operators whose smaller dimension is at most this go to the dense path.
    pub dense_min_dim: usize,
    /// The dense path is only taken when the matrix has at most this many entries.
    pub dense_max_entries: usize,
    /// Seed for the Lanczos start vector.
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_restarts: None,
            dense_min_dim: 64,
            dense_max_entries: 4_000_000,
            seed: 0x5_5a,
        }
    }
}

/// Leading `k` singular triples of `op` in nonincreasing order of `sigma`.
///
/// Triples whose singular value is numerically zero (below
/// [`RANK_CUTOFF`] times the largest) are dropped, so fewer than `k` triples
/// come back for rank-deficient operators and none for the zero operator.
pub fn truncated_svd<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    opts: &SvdOptions,
) -> Result<Vec<EigenTriple>> {
    let (m, n) = (op.nrows(), op.ncols());
    let min_dim = m.min(n);
    if k > min_dim {
        return Err(SsaError::TooManyComponents {
            requested: k,
            max: min_dim,
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let small = min_dim <= opts.dense_min_dim
        // asking for most of the spectrum of a modest matrix: Krylov buys nothing
        || (2 * k >= min_dim && m * n <= 250_000);
    let triples = if small && m * n <= opts.dense_max_entries {
        dense_svd(&op.to_dense(), k)
    } else {
        if m < n {
            // iterate on the tall orientation: on a wide operator, rounding
            // errors in the null space of A are amplified by alpha/beta each step
            lanczos_svd(&Transposed(op), k, opts)?
                .into_iter()
                .map(|t| EigenTriple {
                    sigma: t.sigma,
                    u: t.v,
                    v: t.u,
                })
                .collect()
        } else {
            lanczos_svd(op, k, opts)?
        }
    };
    Ok(finalize(triples))
}

struct Transposed<'a, A: ?Sized>(&'a A);

impl<A: LinearOperator + ?Sized> LinearOperator for Transposed<'_, A> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }

    fn ncols(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.apply_adjoint(x)
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.0.apply(y)
    }
}

/// Dense SVD whose factors reproduce `a` to working precision.
///
/// nalgebra's default stopping rule can leave one factor visibly
/// inaccurate, so every result is checked against `a`. Both orientations
/// are tried, then both again with a tighter tolerance.
fn accurate_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let dim = a.nrows().max(a.ncols());
    let limit = 1e-12 * a.amax().max(f64::MIN_POSITIVE) * (dim as f64).sqrt();
    let tall_first = a.nrows() >= a.ncols();
    let mut best: Option<(f64, (DMatrix<f64>, DVector<f64>, DMatrix<f64>))> = None;
    for (eps, max_iter) in [(f64::EPSILON, 0), (f64::EPSILON * 1e-2, 30 * dim)] {
        for transposed in [!tall_first, tall_first] {
            let m = if transposed { a.transpose() } else { a.clone() };
            let Some(svd) = SVD::try_new(m.clone(), true, true, eps, max_iter) else { continue };
            let (Some(u), Some(vt)) = (svd.u, svd.v_t) else { continue };
            let s = svd.singular_values;
            let err = (&u * DMatrix::from_diagonal(&s) * &vt - &m).amax();
            let factors = if transposed { (vt.transpose(), s, u.transpose()) } else { (u, s, vt) };
            if err <= limit {
                return factors;
            }
            if best.as_ref().is_none_or(|(e, _)| err < *e) {
                best = Some((err, factors));
            }
        }
    }
    best.map(|(_, f)| f).expect("nalgebra SVD without iteration limit converges")
}

/// Full SVD of a dense matrix, leading `k` triples.
pub fn dense_svd(a: &DMatrix<f64>, k: usize) -> Vec<EigenTriple> {
    let (u, s, vt) = accurate_svd(a);
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    order
        .into_iter()
        .take(k)
        .map(|i| EigenTriple {
            sigma: s[i],
            u: u.column(i).iter().copied().collect(),
            v: vt.row(i).iter().copied().collect(),
        })
        .collect()
}

/// All singular values of a dense matrix in decreasing order.
pub fn dense_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let tall = if a.nrows() < a.ncols() { a.transpose() } else { a.clone() };
    let mut s: Vec<f64> = tall.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Sorts, fixes signs and drops numerically zero triples.
fn finalize(mut triples: Vec<EigenTriple>) -> Vec<EigenTriple> {
    triples.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
    let top = triples.first().map_or(0.0, |t| t.sigma);
    if top <= 0.0 || !top.is_finite() {
        return Vec::new();
    }
    triples.retain(|t| t.sigma > RANK_CUTOFF * top);
    for t in &mut triples {
        normalize_sign(t);
    }
    triples
}

/// Makes the first significant component of `u` positive.
pub(crate) fn normalize_sign(t: &mut EigenTriple) {
    let peak = t.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = t.u.iter().find(|x| x.abs() > 1e-8 * peak) {
        if *first < 0.0 {
            t.u.iter_mut().for_each(|x| *x = -*x);
            t.v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, len: usize, against: &[Vec<f64>]) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        linalg::orthogonalize(&mut x, against);
        let nrm = linalg::norm(&x);
        if nrm > 1e-8 {
            linalg::scale(1.0 / nrm, &mut x);
            return x;
        }
    }
}

/// Thick-restarted Lanczos bidiagonalization.
///
/// Maintains `A V = P B` and `A^T P = V B^T + r e^T` with orthonormal `V`,
/// `P`. After each sweep the leading Ritz pairs of `B` are kept, the residual
/// direction becomes the next right vector, and `B` gets an arrow-shaped
/// leading block.
fn lanczos_svd<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    opts: &SvdOptions,
) -> Result<Vec<EigenTriple>> {
    let (m, n) = (op.nrows(), op.ncols());
    let min_dim = m.min(n);
    let work = min_dim.min((3 * k).max(k + 12));
    let keep = (k + (work - k) / 2).min(work - 1).max(k.min(work - 1));
    let max_restarts = opts.max_restarts.unwrap_or(10 * k).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // start inside the row space of A so that a full-dimension basis is exact
    let mut start = op.apply_adjoint(&random_unit(&mut rng, m, &[]));
    let nrm = linalg::norm(&start);
    if nrm == 0.0 || !nrm.is_finite() {
        start = random_unit(&mut rng, n, &[]);
    } else {
        linalg::scale(1.0 / nrm, &mut start);
    }

    let mut vs: Vec<Vec<f64>> = vec![start];
    let mut ps: Vec<Vec<f64>> = Vec::with_capacity(work);
    let mut b = DMatrix::<f64>::zeros(work, work);
    let mut kept = 0usize;
    let mut scale_est = 0.0f64;

    for restart in 0..=max_restarts {
        let mut residual = Vec::new();
        let mut beta_last = 0.0;
        for j in kept..work {
            let mut p = op.apply(&vs[j]);
            if j > 0 {
                if j == kept {
                    for i in 0..kept {
                        linalg::axpy(-b[(i, j)], &ps[i], &mut p);
                    }
                } else {
                    linalg::axpy(-b[(j - 1, j)], &ps[j - 1], &mut p);
                }
            }
            linalg::orthogonalize(&mut p, &ps[..j]);
            let mut alpha = linalg::norm(&p);
            scale_est = scale_est.max(alpha);
            if alpha <= 1e-13 * scale_est || alpha == 0.0 {
                p = random_unit(&mut rng, m, &ps[..j]);
                alpha = 0.0;
            } else {
                linalg::scale(1.0 / alpha, &mut p);
            }
            b[(j, j)] = alpha;
            ps.push(p);

            let mut r = op.apply_adjoint(&ps[j]);
            linalg::axpy(-alpha, &vs[j], &mut r);
            linalg::orthogonalize(&mut r, &vs[..=j]);
            let beta = linalg::norm(&r);
            scale_est = scale_est.max(beta);
            if j + 1 < work {
                let v_next = if beta <= 1e-13 * scale_est || beta == 0.0 {
                    b[(j, j + 1)] = 0.0;
                    random_unit(&mut rng, n, &vs[..=j])
                } else {
                    b[(j, j + 1)] = beta;
                    linalg::scale(1.0 / beta, &mut r);
                    r
                };
                vs.push(v_next);
            } else {
                beta_last = beta;
                residual = r;
            }
        }

        let svd = b.clone().svd(true, true);
        let ub = svd.u.expect("requested U");
        let vbt = svd.v_t.expect("requested V^T");
        let mut order: Vec<usize> = (0..work).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let sigma1 = svd.singular_values[order[0]];
        let res = |i: usize| (beta_last * ub[(work - 1, i)]).abs();
        let converged = order[..k]
            .iter()
            .take_while(|&&i| res(i) <= opts.tol * sigma1)
            .count();

        let ritz = |count: usize| -> Vec<EigenTriple> {
            order[..count]
                .iter()
                .map(|&i| EigenTriple {
                    sigma: svd.singular_values[i],
                    u: linalg::combine(&ps, ub.column(i).iter().copied(), m),
                    v: linalg::combine(&vs, vbt.row(i).iter().copied(), n),
                })
                .collect()
        };

        if sigma1 == 0.0 || converged == k || beta_last == 0.0 {
            return Ok(ritz(k));
        }
        if restart == max_restarts {
            return Err(SsaError::NotConverged {
                restarts: max_restarts,
                converged,
                requested: k,
                partial: Box::new(finalize(ritz(converged))),
            });
        }

        let new_ps: Vec<Vec<f64>> = order[..keep]
            .iter()
            .map(|&i| linalg::combine(&ps, ub.column(i).iter().copied(), m))
            .collect();
        let mut new_vs: Vec<Vec<f64>> = order[..keep]
            .iter()
            .map(|&i| linalg::combine(&vs, vbt.row(i).iter().copied(), n))
            .collect();
        b.fill(0.0);
        for (slot, &i) in order[..keep].iter().enumerate() {
            b[(slot, slot)] = svd.singular_values[i];
            b[(slot, keep)] = beta_last * ub[(work - 1, i)];
        }
        linalg::scale(1.0 / beta_last, &mut residual);
        linalg::orthogonalize(&mut residual, &new_vs);
        let nrm = linalg::norm(&residual);
        linalg::scale(1.0 / nrm, &mut residual);
        new_vs.push(residual);
        ps = new_ps;
        vs = new_vs;
        kept = keep;
    }
    unreachable!("loop returns on the last restart")
}

#[cfg(test)]
mod tests {
    #[test]
    fn wide_near_constant_hankel() {
        let mut x = vec![2.5; 12];
        x[4] = 2.500000000000001;
        let a = crate::trajectory::embed(&crate::Series::new(x).unwrap(), 4).unwrap().to_dense();
        let t = &dense_svd(&a, 1)[0];
        assert!((t.sigma - 15.0).abs() < 1e-12);
        assert!(t.v.iter().all(|v| (v.abs() - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn dense_factors_satisfy_both_relations() {
        let x: Vec<f64> = (1..61).map(|i| (2.0 * std::f64::consts::PI * 0.2986202131473157 * i as f64 + 2.048007854572348).cos()).collect();
        let op = crate::trajectory::embed(&crate::Series::new(x).unwrap(), 24).unwrap();
        for t in dense_svd(&op.to_dense(), 2) {
            let xv = op.apply(&t.v);
            let xtu = op.apply_adjoint(&t.u);
            assert!(xv.iter().zip(&t.u).all(|(a, b)| (a - t.sigma * b).abs() < 1e-12));
            assert!(xtu.iter().zip(&t.v).all(|(a, b)| (a - t.sigma * b).abs() < 1e-12));
        }
    }

    use super::*;
    use crate::series::Series;
    use crate::trajectory::embed;

    fn sine(n: usize, a: f64, omega: f64) -> Series {
        Series::new(
            (0..n)
                .map(|i| a * (2.0 * std::f64::consts::PI * omega * i as f64).sin())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn exponential_has_one_triple() {
        let s = Series::new(vec![1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        let op = embed(&s, 2).unwrap();
        let t = truncated_svd(&op, 2, &SvdOptions::default()).unwrap();
        assert_eq!(t.len(), 1);
        assert!((t[0].lambda() - 425.0).abs() < 1e-10);
    }

    #[test]
    fn zero_operator_has_empty_spectrum() {
        let s = Series::new(vec![0.0; 30]).unwrap();
        let op = embed(&s, 10).unwrap();
        assert!(truncated_svd(&op, 3, &SvdOptions::default()).unwrap().is_empty());
        let big = Series::new(vec![0.0; 3000]).unwrap();
        let op = embed(&big, 1000).unwrap();
        assert!(truncated_svd(&op, 3, &SvdOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn separable_sine_eigenvalues() {
        let op = embed(&sine(27, 1.0, 0.25), 12).unwrap();
        let t = truncated_svd(&op, 2, &SvdOptions::default()).unwrap();
        assert_eq!(t.len(), 2);
        for tr in &t {
            assert!((tr.lambda() - 48.0).abs() < 1e-8);
        }
    }

    #[test]
    fn too_many_components() {
        let op = embed(&sine(10, 1.0, 0.1), 3).unwrap();
        assert!(matches!(
            truncated_svd(&op, 4, &SvdOptions::default()),
            Err(SsaError::TooManyComponents { .. })
        ));
    }

    #[test]
    fn lanczos_matches_dense_on_random_hankel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vals: Vec<f64> = (0..400)
            .map(|i| (i as f64 * 0.07).sin() * 3.0 + rng.random_range(-1.0..1.0))
            .collect();
        let op = embed(&Series::new(vals).unwrap(), 150).unwrap();
        let opts = SvdOptions {
            dense_min_dim: 0,
            ..Default::default()
        };
        let fast = truncated_svd(&op, 6, &opts).unwrap();
        let slow = dense_svd(&op.to_dense(), 6);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f.sigma - s.sigma).abs() < 1e-8 * slow[0].sigma);
            // check the residual contract directly
            let av = op.apply(&f.v);
            let r: f64 = av
                .iter()
                .zip(&f.u)
                .map(|(a, u)| (a - f.sigma * u).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-9 * fast[0].sigma);
            let atu = op.apply_adjoint(&f.u);
            let r: f64 = atu
                .iter()
                .zip(&f.v)
                .map(|(a, v)| (a - f.sigma * v).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-8 * fast[0].sigma, "{r}");
        }
    }

    #[test]
    fn lanczos_full_dimension_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let vals: Vec<f64> = (0..160).map(|_| rng.random_range(-1.0..1.0)).collect();
        let op = embed(&Series::new(vals).unwrap(), 70).unwrap();
        let opts = SvdOptions {
            dense_min_dim: 0,
            dense_max_entries: 0,
            ..Default::default()
        };
        let fast = truncated_svd(&op, 70, &opts).unwrap();
        let slow = dense_svd(&op.to_dense(), 70);
        assert_eq!(fast.len(), 70);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f.sigma - s.sigma).abs() < 1e-9 * slow[0].sigma);
        }
    }

    #[test]
    fn rank_deficient_large_operator() {
        let op = embed(&sine(2000, 2.0, 0.1), 700).unwrap();
        let t = truncated_svd(&op, 5, &SvdOptions::default()).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn transposition_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<f64> = (0..90).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = Series::new(vals).unwrap();
        let a = truncated_svd(&embed(&s, 30).unwrap(), 10, &SvdOptions::default()).unwrap();
        let b = truncated_svd(&embed(&s, 61).unwrap(), 10, &SvdOptions::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.sigma - y.sigma).abs() < 1e-10 * a[0].sigma);
        }
    }

    #[test]
    fn signs_are_normalized() {
        let op = embed(&sine(60, 1.0, 0.13), 20).unwrap();
        for t in truncated_svd(&op, 2, &SvdOptions::default()).unwrap() {
            let first = t.u.iter().find(|x| x.abs() > 1e-8).unwrap();
            assert!(*first > 0.0);
        }
    }
}
