//! Matrix-free operator abstraction and small vector kernels.

use nalgebra::DMatrix;

/// A real linear map `A: R^ncols -> R^nrows` known only through products.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `A x` for `x` of length `ncols`.
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    /// `A^T y` for `y` of length `nrows`.
    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64>;

    /// Materializes the operator. Only sensible for small shapes.
    fn to_dense(&self) -> DMatrix<f64> {
        let (m, n) = (self.nrows(), self.ncols());
        let mut out = DMatrix::zeros(m, n);
        if m <= n {
            let mut e = vec![0.0; m];
            for i in 0..m {
                e[i] = 1.0;
                let row = self.apply_adjoint(&e);
                for (j, x) in row.into_iter().enumerate() {
                    out[(i, j)] = x;
                }
                e[i] = 0.0;
            }
        } else {
            let mut e = vec![0.0; n];
            for j in 0..n {
                e[j] = 1.0;
                let col = self.apply(&e);
                for (i, x) in col.into_iter().enumerate() {
                    out[(i, j)] = x;
                }
                e[j] = 0.0;
            }
        }
        out
    }
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nrows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (o, a) in out.iter_mut().zip(self.column(j).iter()) {
                    *o += a * xj;
                }
            }
        }
        out
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        (0..self.ncols())
            .map(|j| dot(self.column(j).as_slice(), y))
            .collect()
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

/// Classical Gram-Schmidt against an orthonormal set, repeated once when
/// the first pass cancels most of `x`.
pub(crate) fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    if basis.is_empty() {
        return;
    }
    let before = norm(x);
    gram_schmidt_pass(x, basis);
    if norm(x) < 0.7 * before {
        gram_schmidt_pass(x, basis);
    }
}

fn gram_schmidt_pass(x: &mut [f64], basis: &[Vec<f64>]) {
    const CHUNK: usize = 2048;
    let mut coeffs = vec![0.0; basis.len()];
    for (start, xs) in x.chunks(CHUNK).enumerate().map(|(i, c)| (i * CHUNK, c)) {
        for (c, b) in coeffs.iter_mut().zip(basis) {
            *c += dot(&b[start..start + xs.len()], xs);
        }
    }
    for (start, xs) in x.chunks_mut(CHUNK).enumerate().map(|(i, c)| (i * CHUNK, c)) {
        for (c, b) in coeffs.iter().zip(basis) {
            axpy(-c, &b[start..start + xs.len()], xs);
        }
    }
}

/// Combination `sum_i coeffs[i] * basis[i]`.
pub(crate) fn combine(basis: &[Vec<f64>], coeffs: impl Iterator<Item = f64>, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (b, c) in basis.iter().zip(coeffs) {
        if c != 0.0 {
            axpy(c, b, &mut out);
        }
    }
    out
}
