//! Restarted GMRES for matrix-free operators over `f64` or `Complex64`.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Mul<f64, Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn abs_sqr(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x.conj() * y)
}

fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresOptions {
    /// Target for `||b - A x|| / ||b||`.
    pub tol: f64,
    /// Cap on operator applications inside the Arnoldi cycles.
    pub max_iter: usize,
    pub restart: usize,
}

#[derive(Clone, Debug)]
pub struct GmresOutcome<T> {
    pub x: Vec<T>,
    /// True relative residual of `x`, recomputed from the operator.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `A x = b` from the starting guess `x0`.
pub fn gmres<T, A>(mut apply: A, b: &[T], x0: Vec<T>, opts: GmresOptions) -> GmresOutcome<T>
where
    T: Scalar,
    A: FnMut(&[T]) -> Vec<T>,
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return GmresOutcome { x: vec![T::zero(); n], residual: 0.0, iterations: 0, converged: true };
    }
    let m = opts.restart.max(1);
    let mut x = x0;
    let mut iterations = 0;

    loop {
        let ax = apply(&x);
        let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let beta = norm(&r);
        let residual = beta / bnorm;
        if residual <= opts.tol || iterations >= opts.max_iter || !residual.is_finite() {
            return GmresOutcome { x, residual, iterations, converged: residual <= opts.tol };
        }

        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|&v| v * (1.0 / beta)).collect());
        // Hessenberg columns, already rotated
        let mut h: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut rotations: Vec<(f64, T)> = Vec::with_capacity(m);
        let mut g = vec![T::zero(); m + 1];
        g[0] = T::from_real(beta);
        let mut steps = 0;

        for j in 0..m {
            let mut w = apply(&basis[j]);
            iterations += 1;
            let mut col = vec![T::zero(); j + 2];
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(v, &w);
                    col[i] += c;
                    for (wk, &vk) in w.iter_mut().zip(v) {
                        *wk -= vk * c;
                    }
                }
            }
            let wnorm = norm(&w);
            col[j + 1] = T::from_real(wnorm);

            for (i, &(c, s)) in rotations.iter().enumerate() {
                let (a, b) = (col[i], col[i + 1]);
                col[i] = a * c + s * b;
                col[i + 1] = b * c - s.conj() * a;
            }
            let (a, b) = (col[j], col[j + 1]);
            let rho = (a.abs_sqr() + b.abs_sqr()).sqrt();
            let (c, s) = if rho == 0.0 {
                (1.0, T::zero())
            } else if a.abs() == 0.0 {
                (0.0, b.conj() * (1.0 / rho))
            } else {
                let phase = a * (1.0 / a.abs());
                (a.abs() / rho, phase * b.conj() * (1.0 / rho))
            };
            col[j] = a * c + s * b;
            col[j + 1] = T::zero();
            let gj = g[j];
            g[j] = gj * c;
            g[j + 1] = -(s.conj() * gj);
            rotations.push((c, s));
            h.push(col);
            steps = j + 1;

            let estimate = g[j + 1].abs() / bnorm;
            if estimate <= opts.tol || iterations >= opts.max_iter || wnorm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|&v| v * (1.0 / wnorm)).collect());
        }

        // back substitution on the rotated Hessenberg
        let mut y = vec![T::zero(); steps];
        for i in (0..steps).rev() {
            let mut acc = g[i];
            for (k, yk) in y.iter().enumerate().take(steps).skip(i + 1) {
                acc -= h[k][i] * *yk;
            }
            let diag = h[i][i];
            y[i] = if diag.abs() == 0.0 { T::zero() } else { acc / diag };
        }
        for (yi, v) in y.iter().zip(&basis) {
            for (xk, &vk) in x.iter_mut().zip(v) {
                *xk += vk * *yi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> GmresOptions {
        GmresOptions { tol: 1e-12, max_iter: 500, restart: 10 }
    }

    #[test]
    fn solves_real_nonsymmetric_system() {
        let n = 40;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 4.0 } else { ((i * 7 + j * 3) % 5) as f64 * 0.05 - 0.1 }).collect())
            .collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let out = gmres(
            |x: &[f64]| a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect(),
            &b,
            vec![0.0; n],
            opts(),
        );
        assert!(out.converged);
        let ax: Vec<f64> = a.iter().map(|row| row.iter().zip(&out.x).map(|(r, v)| r * v).sum()).collect();
        let err: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-10);
    }

    #[test]
    fn solves_complex_system_with_restarts() {
        let n = 30;
        let diag: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(1.0 + i as f64 * 0.1, 0.3 * (i as f64).cos())).collect();
        let apply = |x: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|i| {
                    let mut v = diag[i] * x[i];
                    if i + 1 < n {
                        v += Complex64::new(0.2, -0.1) * x[i + 1];
                    }
                    if i > 0 {
                        v += Complex64::new(0.0, 0.25) * x[i - 1];
                    }
                    v
                })
                .collect()
        };
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, i as f64 * 0.01)).collect();
        let out = gmres(apply, &b, vec![Complex64::new(0.0, 0.0); n], GmresOptions { restart: 4, ..opts() });
        assert!(out.converged, "{}", out.residual);
        assert!(out.residual <= 1e-12);
        let r: Vec<Complex64> = apply(&out.x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm(&r) / norm(&b) <= 1e-12);
    }

    #[test]
    fn exact_guess_takes_no_iterations() {
        let b = vec![1.0, 2.0];
        let out = gmres(|x: &[f64]| x.to_vec(), &b, b.clone(), opts());
        assert_eq!(out.iterations, 0);
        assert!(out.converged);
    }

    #[test]
    fn reports_non_convergence() {
        // rotation by 90 degrees: GMRES(1) stagnates
        let b = vec![1.0, 0.0];
        let out = gmres(
            |x: &[f64]| vec![-x[1], x[0]],
            &b,
            vec![0.0, 0.0],
            GmresOptions { tol: 1e-12, max_iter: 5, restart: 1 },
        );
        assert!(!out.converged);
        assert_eq!(out.iterations, 5);
    }
}
