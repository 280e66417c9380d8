//! Complex geometrical optics solutions of the d-bar Dirac system.
//!
//! For a potential `q` and spectral parameter `k` the normalized solutions
//! `(u1, u2)` satisfy
//!
//! ```text
//! u1 = 1 + dbar^{-1}[e_{-k} q conj(u2)],    u2 = dbar^{-1}[e_{-k} q conj(u1)],
//! ```
//!
//! so `u1` solves `(I - S) u1 = 1` with the complex-linear operator
//! `S F = dbar^{-1}[e_{-k} q d^{-1}[e_k conj(q) F]]`, and `u2` follows from `u1`
//! by one more transform. The combinations `v = u1 +- u2` decouple into the
//! real-linear equations `v = 1 +- dbar^{-1}[e_{-k} q conj(v)]`.

use std::sync::Arc;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::cauchy::{d_inverse, dbar_inverse, CauchyKernel};
use crate::error::{Error, Result};
use crate::field::{character, l2_norm, ComplexField, Grid2D, Sign};
use crate::krylov::{gmres, GmresOptions};

#[cfg(test)]
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Number of consecutive growing Neumann terms treated as divergence.
const DIVERGENCE_RUN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Krylov,
    Neumann,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Krylov => "krylov",
            Method::Neumann => "neumann",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "krylov" => Ok(Method::Krylov),
            "neumann" => Ok(Method::Neumann),
            other => Err(Error::InvalidArgument(format!("unknown solver method '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
    /// Krylov restart length.
    pub restart: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, method: Method::Krylov, restart: 30 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("solver tolerance must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("solver max_iter must be >= 1".into()));
        }
        if self.restart == 0 {
            return Err(Error::InvalidArgument("solver restart must be >= 1".into()));
        }
        Ok(())
    }

    /// Short stable hash of the settings, recorded alongside results.
    pub fn digest(&self) -> String {
        let text = format!(
            "tol={:e};max_iter={};method={};restart={}",
            self.tol,
            self.max_iter,
            self.method.name(),
            self.restart
        );
        let hash = Sha256::digest(text.as_bytes());
        hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// Neumann terms grew for several consecutive steps.
    Diverged,
}

/// `(u1, u2)` at one spectral parameter, with solver diagnostics.
#[derive(Clone, Debug)]
pub struct CGOSolution {
    pub k: Complex64,
    pub u1: ComplexField,
    pub u2: ComplexField,
    /// `||(I - S) u1 - 1||_2 / ||1||_2`.
    pub residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl CGOSolution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// `psi = e^{i conj(k) z / 2} (u1, u2)`.
    pub fn psi(&self) -> (ComplexField, ComplexField) {
        let k = self.k;
        let factor = |z: Complex64| (Complex64::i() * k.conj() * z * 0.5).exp();
        (self.u1.map_with_node(|z, v| v * factor(z)), self.u2.map_with_node(|z, v| v * factor(z)))
    }
}

/// Solution of one of the decoupled equations for `v = u1 +- u2`.
#[derive(Clone, Debug)]
pub struct VSolution {
    pub v: ComplexField,
    /// `||v -+ dbar^{-1}[e_{-k} q conj(v)] - 1||_2 / ||1||_2`.
    pub residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl VSolution {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// `S` for a fixed `(q, k)` with `e_{-k} q` precomputed.
pub(crate) struct ScatteringOperator {
    grid: Grid2D,
    kernel: Arc<CauchyKernel>,
    modulated_q: Vec<Complex64>,
}

impl ScatteringOperator {
    pub(crate) fn new(q: &ComplexField, k: Complex64) -> Self {
        let grid = *q.grid();
        let modulated_q = q.values().iter().enumerate().map(|(i, &v)| v * character(-k, grid.node_at(i))).collect();
        Self { grid, kernel: CauchyKernel::shared(&grid), modulated_q }
    }

    /// Node values of `e_{-k} q`.
    pub(crate) fn modulated_potential(&self) -> &[Complex64] {
        &self.modulated_q
    }

    /// `dbar^{-1}[e_{-k} q conj(F)]`.
    pub(crate) fn half_step(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mq = &self.modulated_q;
        self.kernel.convolve(|i| mq[i] * f[i].conj())
    }

    /// `S F`, written as two half steps: `d^{-1}[e_k conj(q) F]` is the conjugate of
    /// `dbar^{-1}[e_{-k} q conj(F)]`.
    pub(crate) fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let inner = self.half_step(f);
        self.half_step(&inner)
    }

    fn field(&self, values: Vec<Complex64>) -> ComplexField {
        ComplexField::from_parts(self.grid, values)
    }
}

fn check_inputs(q: &ComplexField, cfg: &SolverConfig) -> Result<()> {
    q.validate()?;
    cfg.validate()
}

/// `S^k_q F = dbar^{-1}[e_{-k} q d^{-1}[e_k conj(q) F]]`, composed literally.
pub fn apply_scattering_operator(q: &ComplexField, k: Complex64, f: &ComplexField) -> Result<ComplexField> {
    q.grid().check_same(f.grid())?;
    q.validate()?;
    f.validate()?;
    let inner = d_inverse(&q.map_with_node(|z, v| v.conj() * character(k, z)).mul(f)?);
    let outer = q.map_with_node(|z, v| v * character(-k, z)).mul(&inner)?;
    Ok(dbar_inverse(&outer))
}

/// Solves `(I - S) u1 = 1` only.
pub(crate) fn solve_u1(op: &ScatteringOperator, cfg: &SolverConfig) -> (Vec<Complex64>, f64, usize, SolveStatus) {
    let len = op.grid.len();
    let ones = vec![ONE; len];
    match cfg.method {
        Method::Krylov => {
            let out = gmres(
                |x: &[Complex64]| {
                    let s = op.apply(x);
                    x.iter().zip(s).map(|(&a, b)| a - b).collect()
                },
                &ones,
                ones.clone(),
                GmresOptions { tol: cfg.tol, max_iter: cfg.max_iter, restart: cfg.restart },
            );
            let status = if out.converged { SolveStatus::Converged } else { SolveStatus::MaxIterations };
            (out.x, out.residual, out.iterations, status)
        }
        Method::Neumann => neumann(|t| op.apply(t), len, cfg),
    }
}

/// Partial sums of `sum_n T^n 1`. The residual of the partial sum through
/// `T^n 1` is exactly `||T^{n+1} 1|| / ||1||`.
fn neumann(
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    len: usize,
    cfg: &SolverConfig,
) -> (Vec<Complex64>, f64, usize, SolveStatus) {
    let one_norm = (len as f64).sqrt();
    let mut sum = vec![ONE; len];
    let mut term = sum.clone();
    let mut last_norm = one_norm;
    let mut growth = 0;
    for iteration in 1..=cfg.max_iter {
        term = apply(&term);
        let norm = term.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let residual = norm / one_norm;
        if residual <= cfg.tol {
            return (sum, residual, iteration, SolveStatus::Converged);
        }
        growth = if norm > last_norm { growth + 1 } else { 0 };
        if growth >= DIVERGENCE_RUN || !norm.is_finite() {
            return (sum, residual, iteration, SolveStatus::Diverged);
        }
        last_norm = norm;
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
    }
    let residual = apply(&term).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / one_norm;
    (sum, residual, cfg.max_iter, SolveStatus::MaxIterations)
}

/// CGO solution at `k`. Non-convergence is reported through
/// [`CGOSolution::status`] with the last iterate attached.
pub fn solve_cgo(q: &ComplexField, k: Complex64, cfg: &SolverConfig) -> Result<CGOSolution> {
    check_inputs(q, cfg)?;
    let grid = *q.grid();
    if q.is_zero() {
        return Ok(CGOSolution {
            k,
            u1: ComplexField::constant(grid, ONE),
            u2: ComplexField::zeros(grid),
            residual: 0.0,
            iterations: 0,
            status: SolveStatus::Converged,
        });
    }
    let op = ScatteringOperator::new(q, k);
    let (u1, residual, iterations, status) = solve_u1(&op, cfg);
    let u2 = op.half_step(&u1);
    Ok(CGOSolution { k, u1: op.field(u1), u2: op.field(u2), residual, iterations, status })
}

/// Solves `v = 1 + sign dbar^{-1}[e_{-k} q conj(v)]` as a real-linear system.
pub fn solve_v(q: &ComplexField, k: Complex64, sign: Sign, cfg: &SolverConfig) -> Result<VSolution> {
    check_inputs(q, cfg)?;
    let grid = *q.grid();
    if q.is_zero() {
        return Ok(VSolution {
            v: ComplexField::constant(grid, ONE),
            residual: 0.0,
            iterations: 0,
            status: SolveStatus::Converged,
        });
    }
    let op = ScatteringOperator::new(q, k);
    let len = grid.len();
    let sigma = sign.as_f64();
    let coupling = |v: &[Complex64]| -> Vec<Complex64> { op.half_step(v).into_iter().map(|w| w * sigma).collect() };

    let (values, residual, iterations, status) = match cfg.method {
        Method::Neumann => neumann(coupling, len, cfg),
        Method::Krylov => {
            let split =
                |v: &[Complex64]| -> Vec<f64> { v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)).collect() };
            let join = |x: &[f64]| -> Vec<Complex64> { (0..len).map(|i| Complex64::new(x[i], x[len + i])).collect() };
            let rhs = split(&vec![ONE; len]);
            let out = gmres(
                |x: &[f64]| {
                    let v = join(x);
                    let t = coupling(&v);
                    let lhs: Vec<Complex64> = v.iter().zip(t).map(|(&a, b)| a - b).collect();
                    split(&lhs)
                },
                &rhs,
                rhs.clone(),
                GmresOptions { tol: cfg.tol, max_iter: cfg.max_iter, restart: cfg.restart },
            );
            let status = if out.converged { SolveStatus::Converged } else { SolveStatus::MaxIterations };
            (join(&out.x), out.residual, out.iterations, status)
        }
    };
    Ok(VSolution { v: op.field(values), residual, iterations, status })
}

/// `(S^k_q)^n 1`; `n = 0` gives the constant 1.
pub fn born_iterate(q: &ComplexField, k: Complex64, n: usize) -> Result<ComplexField> {
    q.validate()?;
    let grid = *q.grid();
    let mut term = vec![ONE; grid.len()];
    if n == 0 {
        return Ok(ComplexField::from_parts(grid, term));
    }
    if q.is_zero() {
        return Ok(ComplexField::zeros(grid));
    }
    let op = ScatteringOperator::new(q, k);
    for _ in 0..n {
        term = op.apply(&term);
    }
    Ok(op.field(term))
}

/// `||(I - S) u - 1||_2 / ||1||_2` recomputed from scratch.
pub fn cgo_residual(q: &ComplexField, k: Complex64, u1: &ComplexField) -> Result<f64> {
    let s = apply_scattering_operator(q, k, u1)?;
    let r = u1.sub(&s)?.map(|v| v - ONE);
    let one = ComplexField::constant(*q.grid(), ONE);
    Ok(l2_norm(&r) / l2_norm(&one))
}
