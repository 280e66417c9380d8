//! The scattering transform `F[q](k) = (i/2pi) \int e_{-k} q conj(u1(., k)) dz`,
//! its inverse, and the Born-series terms.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cauchy::{boundary_ratio, BOUNDARY_TOLERANCE};
use crate::cgo::{solve_u1, ScatteringOperator, SolveStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid2D};
use crate::par::{map_indexed, Schedule};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square grid of spectral parameters `k`, laid out like [`Grid2D`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KGrid(Grid2D);

impl KGrid {
    pub fn new(m: usize, half_width: f64) -> Result<Self> {
        Grid2D::new(m, half_width).map(KGrid)
    }

    /// `M = N`, `K = pi N / (2L)`: the dual lattice of `grid`.
    pub fn dual_of(grid: &Grid2D) -> Self {
        KGrid(grid.dual())
    }

    pub fn m(&self) -> usize {
        self.0.n()
    }

    pub fn half_width(&self) -> f64 {
        self.0.half_width()
    }

    /// Quadrature weight `(2K/M)^2`.
    pub fn weight(&self) -> f64 {
        self.0.cell_area()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node_at(&self, index: usize) -> Complex64 {
        self.0.node_at(index)
    }

    pub fn as_grid(&self) -> &Grid2D {
        &self.0
    }
}

impl From<Grid2D> for KGrid {
    fn from(grid: Grid2D) -> Self {
        KGrid(grid)
    }
}

/// Provenance of a [`ScatteringData`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringMeta {
    /// Spatial grid the potential was sampled on.
    pub source_grid: Grid2D,
    pub solver_digest: String,
    /// Largest relative CGO residual over the sweep, if known.
    pub max_residual: Option<f64>,
}

/// Values of a transform on a [`KGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringData {
    pub kgrid: KGrid,
    pub values: Vec<Complex64>,
    pub meta: ScatteringMeta,
}

impl ScatteringData {
    pub fn new(kgrid: KGrid, values: Vec<Complex64>, meta: ScatteringMeta) -> Result<Self> {
        if values.len() != kgrid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} scattering values, got {}",
                kgrid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidField(format!("non-finite scattering value at index {i}")));
        }
        Ok(Self { kgrid, values, meta })
    }

    /// The values viewed as a field on the k-grid.
    pub fn as_field(&self) -> ComplexField {
        ComplexField::from_parts(*self.kgrid.as_grid(), self.values.clone())
    }

    /// Midpoint-rule `L^2(dk)` norm.
    pub fn l2_norm(&self) -> f64 {
        (self.kgrid.weight() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn distance(&self, other: &ScatteringData) -> Result<f64> {
        if self.kgrid != other.kgrid {
            return Err(Error::GridMismatch("scattering data on different k-grids".into()));
        }
        let sum: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((self.kgrid.weight() * sum).sqrt())
    }
}

/// `(i/2pi) h^2 sum e_{-k} q conj(u)`.
fn pairing(op: &ScatteringOperator, u: &[Complex64], cell_area: f64) -> Complex64 {
    let sum: Complex64 = op.modulated_potential().iter().zip(u).map(|(&a, b)| a * b.conj()).sum();
    sum * Complex64::new(0.0, cell_area / (2.0 * PI))
}

/// Forward transform on the default schedule.
pub fn forward_transform(q: &ComplexField, kgrid: &KGrid, cfg: &SolverConfig) -> Result<ScatteringData> {
    forward_transform_with(q, kgrid, cfg, Schedule::default())
}

/// Forward transform: one CGO solve and one quadrature per k-node. Any
/// non-converged node aborts the sweep.
pub fn forward_transform_with(
    q: &ComplexField,
    kgrid: &KGrid,
    cfg: &SolverConfig,
    schedule: Schedule,
) -> Result<ScatteringData> {
    q.validate()?;
    cfg.validate()?;
    let grid = *q.grid();
    let meta = |max_residual| ScatteringMeta {
        source_grid: grid,
        solver_digest: cfg.digest(),
        max_residual: Some(max_residual),
    };
    if q.is_zero() {
        return ScatteringData::new(*kgrid, vec![ZERO; kgrid.len()], meta(0.0));
    }
    let area = grid.cell_area();
    let results = map_indexed(kgrid.len(), schedule, |i| {
        let op = ScatteringOperator::new(q, kgrid.node_at(i));
        let (u1, residual, _, status) = solve_u1(&op, cfg);
        (pairing(&op, &u1, area), residual, status)
    });

    let failed: Vec<usize> =
        results.iter().enumerate().filter(|(_, r)| r.2 != SolveStatus::Converged).map(|(i, _)| i).collect();
    if !failed.is_empty() {
        return Err(Error::NotConverged { nodes: failed });
    }
    let max_residual = results.iter().fold(0.0f64, |m, r| m.max(r.1));
    ScatteringData::new(*kgrid, results.into_iter().map(|r| r.0).collect(), meta(max_residual))
}

pub fn inverse_transform(f: &ScatteringData, grid: &Grid2D, cfg: &SolverConfig) -> Result<ComplexField> {
    inverse_transform_with(f, grid, cfg, Schedule::default())
}

/// `q = conj(F[conj f])`, where the forward transform runs with the k-grid as
/// the spatial grid and `grid` as the spectral grid.
pub fn inverse_transform_with(
    f: &ScatteringData,
    grid: &Grid2D,
    cfg: &SolverConfig,
    schedule: Schedule,
) -> Result<ComplexField> {
    let potential = ComplexField::new(*f.kgrid.as_grid(), f.values.iter().map(|v| v.conj()).collect())?;
    let ratio = boundary_ratio(&potential);
    if ratio > BOUNDARY_TOLERANCE {
        log::warn!("inverse_transform: scattering data is {ratio:.3e} of its maximum on the k-grid boundary");
    }
    let out_grid = KGrid::from(*grid);
    let g = forward_transform_with(&potential, &out_grid, cfg, schedule)?;
    Ok(ComplexField::from_parts(*grid, g.values.into_iter().map(|v| v.conj()).collect()))
}

pub fn born_transform(q: &ComplexField, n: usize, kgrid: &KGrid) -> Result<ScatteringData> {
    born_transform_with(q, n, kgrid, Schedule::default())
}

/// `F_n[q](k) = (i/2pi) \int e_{-k} q conj((S^k_q)^n 1) dz`, carrying the same
/// prefactor as the full transform so that `sum_n F_n = F`.
pub fn born_transform_with(q: &ComplexField, n: usize, kgrid: &KGrid, schedule: Schedule) -> Result<ScatteringData> {
    q.validate()?;
    let grid = *q.grid();
    let area = grid.cell_area();
    let values = if q.is_zero() {
        vec![ZERO; kgrid.len()]
    } else {
        map_indexed(kgrid.len(), schedule, |i| {
            let op = ScatteringOperator::new(q, kgrid.node_at(i));
            let mut term = vec![ONE; grid.len()];
            for _ in 0..n {
                term = op.apply(&term);
            }
            pairing(&op, &term, area)
        })
    };
    ScatteringData::new(
        *kgrid,
        values,
        ScatteringMeta { source_grid: grid, solver_digest: format!("born-{n}"), max_residual: None },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::fourier_transform;

    fn gaussian(grid: Grid2D, amp: f64) -> ComplexField {
        ComplexField::from_fn(grid, |z| Complex64::new(amp * (-z.norm_sqr() / 2.0).exp(), 0.0))
    }

    #[test]
    fn kgrid_defaults_to_dual_lattice() {
        let g = Grid2D::new(32, 7.0).unwrap();
        let kg = KGrid::dual_of(&g);
        assert_eq!(kg.m(), 32);
        assert!((kg.half_width() - PI * 32.0 / 14.0).abs() < 1e-14);
        assert!((kg.weight() - (PI / 7.0).powi(2)).abs() < 1e-14);
        assert!(KGrid::new(24, 1.0).is_err());
    }

    #[test]
    fn zero_potential_gives_zero_transform() {
        let g = Grid2D::new(16, 4.0).unwrap();
        let kg = KGrid::dual_of(&g);
        let f = forward_transform(&ComplexField::zeros(g), &kg, &SolverConfig::default()).unwrap();
        assert!(f.values.iter().all(|&v| v == ZERO));
        let back = inverse_transform(&f, &g, &SolverConfig::default()).unwrap();
        assert!(back.is_zero());
        for n in 1..3 {
            let b = born_transform(&ComplexField::zeros(g), n, &kg).unwrap();
            assert!(b.values.iter().all(|&v| v == ZERO));
        }
    }

    #[test]
    fn zeroth_born_term_is_linear_transform() {
        let g = Grid2D::new(32, 6.0).unwrap();
        let q = ComplexField::from_fn(g, |z| Complex64::new(1.0, z.re) * (-z.norm_sqr() / 2.0).exp());
        let kg = KGrid::dual_of(&g);
        let f0 = born_transform(&q, 0, &kg).unwrap();
        let qhat = fourier_transform(&q);
        for (a, b) in f0.values.iter().zip(qhat.values()) {
            assert!((a - Complex64::i() * b).norm() < 1e-12);
        }
    }

    #[test]
    fn born_partial_sums_converge_to_transform() {
        let g = Grid2D::new(32, 6.0).unwrap();
        let q = gaussian(g, 0.1);
        let kg = KGrid::new(8, 3.0).unwrap();
        let full = forward_transform(&q, &kg, &SolverConfig::default()).unwrap();
        let mut sum = vec![ZERO; kg.len()];
        for n in 0..=4 {
            let b = born_transform(&q, n, &kg).unwrap();
            for (s, v) in sum.iter_mut().zip(&b.values) {
                *s += v;
            }
        }
        let partial = ScatteringData::new(kg, sum, full.meta.clone()).unwrap();
        assert!(partial.distance(&full).unwrap() <= 1e-6);
    }

    #[test]
    fn schedules_agree_bitwise() {
        let g = Grid2D::new(16, 4.0).unwrap();
        let q = gaussian(g, 0.8);
        let kg = KGrid::new(8, 2.0).unwrap();
        let cfg = SolverConfig::default();
        let a = forward_transform_with(&q, &kg, &cfg, Schedule::Sequential).unwrap();
        let b = forward_transform_with(&q, &kg, &cfg, Schedule::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_convergence_lists_nodes() {
        let g = Grid2D::new(16, 4.0).unwrap();
        let q = gaussian(g, 1.0);
        let kg = KGrid::new(2, 1.0).unwrap();
        let cfg = SolverConfig { max_iter: 1, tol: 1e-14, ..Default::default() };
        match forward_transform(&q, &kg, &cfg) {
            Err(Error::NotConverged { nodes }) => assert_eq!(nodes, vec![0, 1, 2, 3]),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn scattering_data_validates_length_and_values() {
        let kg = KGrid::new(4, 1.0).unwrap();
        let meta = ScatteringMeta {
            source_grid: Grid2D::new(4, 1.0).unwrap(),
            solver_digest: String::new(),
            max_residual: None,
        };
        assert!(ScatteringData::new(kg, vec![ZERO; 15], meta.clone()).is_err());
        let mut v = vec![ZERO; 16];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(ScatteringData::new(kg, v, meta).is_err());
    }
}
