//! Square two-dimensional FFTs on row-major buffers, built from cached `rustfft` plans.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

fn plans() -> &'static Mutex<HashMap<usize, Arc<Fft2>>> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
    PLANS.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Fft2 {
    /// Shared plan for `n x n` transforms.
    pub fn shared(n: usize) -> Arc<Fft2> {
        let mut cache = plans().lock().expect("fft plan cache poisoned");
        cache
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft2 { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) })
            })
            .clone()
    }

    fn scratch(&self, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()]
    }

    /// Forward 1-D transforms of every consecutive length-`n` chunk.
    pub fn rows_forward(&self, rows: &mut [Complex64]) {
        if rows.is_empty() {
            return;
        }
        let mut scratch = self.scratch(&self.fwd);
        self.fwd.process_with_scratch(rows, &mut scratch);
    }

    pub fn rows_inverse(&self, rows: &mut [Complex64]) {
        if rows.is_empty() {
            return;
        }
        let mut scratch = self.scratch(&self.inv);
        self.inv.process_with_scratch(rows, &mut scratch);
    }

    /// Unnormalized forward 2-D transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.rows_forward(data);
        transpose(data, self.n);
        self.rows_forward(data);
        transpose(data, self.n);
    }

    /// Unnormalized inverse 2-D transform (the caller divides by `n^2`).
    pub fn inverse(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.rows_inverse(data);
        transpose(data, self.n);
        self.rows_inverse(data);
        transpose(data, self.n);
    }
}

/// In-place transpose of a square row-major matrix.
pub(crate) fn transpose(data: &mut [Complex64], n: usize) {
    const BLOCK: usize = 32;
    for bi in (0..n).step_by(BLOCK) {
        for bj in (bi..n).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + BLOCK).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Signed integer frequency index of FFT bin `a` for length `n`.
#[inline]
pub(crate) fn signed_index(a: usize, n: usize) -> i64 {
    if a < n / 2 {
        a as i64
    } else {
        a as i64 - n as i64
    }
}
