//! Solid Cauchy transforms by aperiodic FFT convolution.
//!
//! `dbar^{-1} G = (1/(pi z)) * G` is evaluated as the discrete convolution
//! `h^2 sum_w K(z - w) G(w)` over the grid nodes. Both the field and the kernel
//! are placed on the doubled grid `[-2L, 2L)^2`, which holds every displacement
//! between two nodes without wrap-around, so the FFT product is the exact
//! aperiodic sum.
//!
//! The kernel sample at the origin is 0. Left at that, the punctured rule
//! leaves a first-moment error of `-(h^2/pi) dG/dz`. The samples at the
//! four nearest axis neighbours are scaled by 4/3 and those two cells out by
//! 11/12, which subtracts a fourth-order difference approximation of that
//! term. The remaining error is `O(h^4)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::fft::{signed_index, transpose, Fft2};
use crate::field::{apply_multiplier, character, ComplexField, Grid2D};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Ratio of boundary-ring to interior maximum above which a convolution input
/// is reported as truncated.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

/// Corrections to the kernel samples at axis offsets 1 and 2.
const NEAR_WEIGHTS: [(i64, f64); 2] = [(1, 4.0 / 3.0), (2, 11.0 / 12.0)];

/// Sampled `1/(pi z)` on the doubled grid and its cached transform.
pub struct CauchyKernel {
    grid: Grid2D,
    samples: Vec<Complex64>,
    // transform of the samples, transposed, with h^2 and the inverse-FFT scale folded in
    spectrum_t: Vec<Complex64>,
}

/// Kernels keyed by `(N, L bits)`.
type KernelCache = Mutex<HashMap<(usize, u64), Arc<CauchyKernel>>>;

fn kernel_cache() -> &'static KernelCache {
    static CACHE: OnceLock<KernelCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl CauchyKernel {
    pub fn new(grid: Grid2D) -> Self {
        let n = grid.n();
        let p = 2 * n;
        let h = grid.spacing();
        let mut samples = vec![ZERO; p * p];
        for b in 0..p {
            let sb = signed_index(b, p);
            for a in 0..p {
                let sa = signed_index(a, p);
                if sa == 0 && sb == 0 {
                    continue;
                }
                let w = Complex64::new(sa as f64 * h, sb as f64 * h);
                let mut value = (w * PI).inv();
                for (offset, weight) in NEAR_WEIGHTS {
                    let on_axis = (sa.abs() == offset && sb == 0) || (sb.abs() == offset && sa == 0);
                    if on_axis {
                        value *= weight;
                    }
                }
                samples[b * p + a] = value;
            }
        }
        let fft = Fft2::shared(p);
        let mut spectrum_t = samples.clone();
        fft.forward(&mut spectrum_t);
        transpose(&mut spectrum_t, p);
        let scale = grid.cell_area() / (p * p) as f64;
        for v in &mut spectrum_t {
            *v *= scale;
        }
        Self { grid, samples, spectrum_t }
    }

    /// Process-wide kernel for `grid`, built on first use.
    pub fn shared(grid: &Grid2D) -> Arc<CauchyKernel> {
        let key = (grid.n(), grid.half_width().to_bits());
        if let Some(k) = kernel_cache().lock().expect("kernel cache poisoned").get(&key) {
            return k.clone();
        }
        // built outside the lock so concurrent first uses of other grids don't serialize
        let kernel = Arc::new(CauchyKernel::new(*grid));
        kernel_cache().lock().expect("kernel cache poisoned").entry(key).or_insert(kernel).clone()
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Kernel samples on the `2N x 2N` padded grid in FFT (wrapped) order.
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Aperiodic convolution of the field whose node values are `source(i)`.
    pub(crate) fn convolve(&self, source: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
        let n = self.grid.n();
        let p = 2 * n;
        let fft = Fft2::shared(p);
        let mut buf = vec![ZERO; p * p];
        for row in 0..n {
            for col in 0..n {
                buf[row * p + col] = source(row * n + col);
            }
        }
        // rows n..p are zero and stay zero under the row transform
        fft.rows_forward(&mut buf[..n * p]);
        transpose(&mut buf, p);
        fft.rows_forward(&mut buf);
        for (v, k) in buf.iter_mut().zip(&self.spectrum_t) {
            *v *= k;
        }
        fft.rows_inverse(&mut buf);
        transpose(&mut buf, p);
        fft.rows_inverse(&mut buf[..n * p]);
        let mut out = Vec::with_capacity(n * n);
        for row in 0..n {
            out.extend_from_slice(&buf[row * p..row * p + n]);
        }
        out
    }

    pub fn dbar_inverse(&self, g: &ComplexField) -> ComplexField {
        debug_assert_eq!(g.grid(), &self.grid);
        warn_if_truncated(g, "dbar_inverse");
        if g.is_zero() {
            return ComplexField::zeros(self.grid);
        }
        let values = g.values();
        ComplexField::from_parts(self.grid, self.convolve(|i| values[i]))
    }

    pub fn d_inverse(&self, g: &ComplexField) -> ComplexField {
        self.dbar_inverse(&g.conj()).conj()
    }

    /// `dbar^{-1}[e_{-k} G]` without materializing the modulated field.
    pub fn modulated_dbar_inverse(&self, g: &ComplexField, k: Complex64) -> ComplexField {
        if k == ZERO {
            return self.dbar_inverse(g);
        }
        debug_assert_eq!(g.grid(), &self.grid);
        warn_if_truncated(g, "modulated_dbar_inverse");
        if g.is_zero() {
            return ComplexField::zeros(self.grid);
        }
        let values = g.values();
        let grid = self.grid;
        let minus_k = -k;
        ComplexField::from_parts(self.grid, self.convolve(|i| values[i] * character(minus_k, grid.node_at(i))))
    }
}

/// Largest `|G|` on the outermost node ring relative to `max |G|` (0 for `G = 0`).
pub fn boundary_ratio(g: &ComplexField) -> f64 {
    let max = g.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let edge = g.grid().boundary_indices().fold(0.0f64, |m, i| m.max(g.values()[i].norm()));
    edge / max
}

fn warn_if_truncated(g: &ComplexField, op: &str) {
    let ratio = boundary_ratio(g);
    if ratio > BOUNDARY_TOLERANCE {
        log::warn!("{op}: input is {ratio:.3e} of its maximum on the grid boundary; truncation error likely");
    }
}

/// Solid Cauchy transform `dbar^{-1} G`, kernel `1/(pi z)`.
pub fn dbar_inverse(g: &ComplexField) -> ComplexField {
    CauchyKernel::shared(g.grid()).dbar_inverse(g)
}

/// `d^{-1} G`, kernel `1/(pi conj(z))`; exactly `conj(dbar^{-1} conj(G))`.
pub fn d_inverse(g: &ComplexField) -> ComplexField {
    CauchyKernel::shared(g.grid()).d_inverse(g)
}

pub fn modulated_dbar_inverse(g: &ComplexField, k: Complex64) -> ComplexField {
    CauchyKernel::shared(g.grid()).modulated_dbar_inverse(g, k)
}

/// Beurling transform, the multiplier `conj(zeta)/zeta` (0 at `zeta = 0`).
pub fn beurling(g: &ComplexField) -> ComplexField {
    apply_multiplier(g, |zeta| if zeta == ZERO { ZERO } else { zeta.conj() / zeta })
}
