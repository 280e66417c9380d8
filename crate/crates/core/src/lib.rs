//! Numerical two-dimensional nonlinear Fourier transform for the d-bar Dirac
//! system `dbar psi = Q conj(psi)`, `Q = [[0, q], [q, 0]]`.
//!
//! The crate is organized bottom-up:
//!
//! - [`field`]: grids, complex fields, `L^p` and `H^{s,s}` norms, Fourier multipliers.
//! - [`cauchy`]: solid Cauchy transforms by zero-padded FFT convolution.
//! - [`cgo`]: the operator `S^k_q`, CGO solutions and Born iterates.
//! - [`nft`]: forward, inverse and Born-series transforms over a k-grid.
//! - [`harness`]: potential generators and reproducible verification experiments.
//! - [`io`]: the `CF2D` and `SD2D` binary formats.
//!
//! k-sweeps run on rayon when the `parallel` feature is enabled (the default);
//! results do not depend on the worker count.

pub mod cauchy;
pub mod cgo;
mod error;
mod fft;
pub mod field;
pub mod harness;
pub mod io;
pub mod krylov;
pub mod nft;
pub mod par;

pub use num_complex::Complex64;

pub use cgo::{CGOSolution, Method, SolverConfig};
pub use error::{Error, Result};
pub use field::{ComplexField, Grid2D, Sign, SobolevIndex, SpectralGrid};
pub use nft::{KGrid, ScatteringData};
pub use par::Schedule;
