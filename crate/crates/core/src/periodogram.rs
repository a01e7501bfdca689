//! One-sided periodogram on the Fourier grid `k / n`, `k = 0..=n/2`.

use crate::fft;

/// Periodogram of `x` normalized so the values sum to `sum(x_i^2)`.
///
/// Entry `k` belongs to frequency `k / n`. Interior frequencies carry the
/// mass of both `k` and `n - k`.
pub fn periodogram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let plan = fft::plan(n);
    let spec = plan.forward_padded(x.iter().copied());
    spec.iter()
        .enumerate()
        .map(|(k, c)| {
            let fold = if k == 0 || 2 * k == n { 1.0 } else { 2.0 };
            fold * c.norm_sqr() / n as f64
        })
        .collect()
}

/// Frequencies `k / n` matching [`periodogram`].
pub fn frequencies(n: usize) -> Vec<f64> {
    (0..=n / 2).map(|k| k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parseval() {
        for n in [5usize, 8, 13, 24] {
            let x: Vec<f64> = (0..n).map(|i| ((i * 31) % 7) as f64 - 3.0).collect();
            let total: f64 = periodogram(&x).iter().sum();
            let energy: f64 = x.iter().map(|v| v * v).sum();
            assert!((total - energy).abs() < 1e-10 * energy);
            assert_eq!(frequencies(n).len(), periodogram(&x).len());
        }
    }

    #[test]
    fn constant_has_all_mass_at_zero() {
        let p = periodogram(&[0.5; 10]);
        assert!((p[0] - 2.5).abs() < 1e-12);
        assert!(p[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn grid_sine_concentrates_on_its_bin() {
        let x: Vec<f64> = (0..24).map(|i| (2.0 * PI * i as f64 / 6.0).cos()).collect();
        let p = periodogram(&x);
        let total: f64 = p.iter().sum();
        assert!((p[4] / total - 1.0).abs() < 1e-12);
    }
}
