//! Real FFT plans cached by transform length, plus the convolution helpers
//! built on them.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

pub(crate) struct FftPlan {
    len: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

static PLANS: LazyLock<Mutex<HashMap<usize, Arc<FftPlan>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Smallest 5-smooth integer `>= n`.
pub(crate) fn fast_len(n: usize) -> usize {
    let n = n.max(1);
    let mut best = usize::MAX;
    let mut p5 = 1usize;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut m = p35;
            while m < n {
                m *= 2;
            }
            best = best.min(m);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// Plan for a transform of exactly `len` points, shared across callers.
pub(crate) fn plan(len: usize) -> Arc<FftPlan> {
    let mut plans = PLANS.lock().unwrap_or_else(|e| e.into_inner());
    plans
        .entry(len)
        .or_insert_with(|| {
            let mut planner = RealFftPlanner::<f64>::new();
            Arc::new(FftPlan {
                len,
                forward: planner.plan_fft_forward(len),
                inverse: planner.plan_fft_inverse(len),
            })
        })
        .clone()
}

impl FftPlan {
    pub(crate) fn spectrum_len(&self) -> usize {
        self.len / 2 + 1
    }

    /// Spectrum of `data` zero-padded to the plan length.
    pub(crate) fn forward_padded(&self, data: impl IntoIterator<Item = f64>) -> Vec<Complex64> {
        let mut buf = vec![0.0; self.len];
        for (slot, x) in buf.iter_mut().zip(data) {
            *slot = x;
        }
        let mut out = self.forward.make_output_vec();
        self.forward
            .process(&mut buf, &mut out)
            .expect("buffer sizes match the plan");
        out
    }

    /// Inverse transform, normalized so that `inverse(forward(x)) == x`.
    pub(crate) fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        spectrum[0].im = 0.0;
        if self.len.is_multiple_of(2) {
            let last = spectrum.len() - 1;
            spectrum[last].im = 0.0;
        }
        let mut out = self.inverse.make_output_vec();
        self.inverse
            .process(&mut spectrum, &mut out)
            .expect("buffer sizes match the plan");
        let scale = 1.0 / self.len as f64;
        out.iter_mut().for_each(|x| *x *= scale);
        out
    }
}

/// Full linear convolution of `a` and `b` (length `a.len() + b.len() - 1`).
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    if a.len().min(b.len()) <= 32 {
        let mut out = vec![0.0; out_len];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let plan = plan(fast_len(out_len));
    let fa = plan.forward_padded(a.iter().copied());
    let fb = plan.forward_padded(b.iter().copied());
    let prod = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let mut out = plan.inverse(prod);
    out.truncate(out_len);
    out
}
