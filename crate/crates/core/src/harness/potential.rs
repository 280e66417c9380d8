use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{hss_norm, ComplexField, Grid2D, SobolevIndex};

/// Plane waves summed in a band-limited potential.
const BAND_MODES: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialKind {
    /// `A exp(-|z - c|^2 / (2 w^2))`
    Gaussian,
    /// `A ((z - c)/w) exp(-|z - c|^2 / (2 w^2))`, complex valued.
    PolyGaussian,
    /// Gaussian envelope times a random sum of plane waves with `|xi| <= band`.
    RandomBandlimited,
}

impl PotentialKind {
    pub fn name(self) -> &'static str {
        match self {
            PotentialKind::Gaussian => "gaussian",
            PotentialKind::PolyGaussian => "poly_gaussian",
            PotentialKind::RandomBandlimited => "random_bandlimited",
        }
    }
}

impl std::str::FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(PotentialKind::Gaussian),
            "poly_gaussian" => Ok(PotentialKind::PolyGaussian),
            "random_bandlimited" => Ok(PotentialKind::RandomBandlimited),
            other => Err(Error::InvalidArgument(format!("unknown potential kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub amplitude: f64,
    pub width: f64,
    pub center: Complex64,
    /// Frequency radius of the random kind.
    pub band: f64,
    /// If set, the field is rescaled so its `H^{s,s}` norm (with `hss_index`) equals this.
    pub target_hss: Option<f64>,
    pub hss_index: SobolevIndex,
    pub seed: u64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self {
            kind: PotentialKind::Gaussian,
            amplitude: 1.0,
            width: 1.0,
            center: Complex64::new(0.0, 0.0),
            band: 1.0,
            target_hss: None,
            hss_index: SobolevIndex::new(0.5).expect("0.5 is a valid index"),
            seed: 0,
        }
    }
}

impl PotentialSpec {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self { amplitude, width, ..Default::default() }
    }

    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidArgument(format!("potential width must be positive, got {}", self.width)));
        }
        if !self.amplitude.is_finite() || !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(Error::InvalidArgument("potential amplitude and center must be finite".into()));
        }
        if self.kind == PotentialKind::RandomBandlimited {
            let nyquist = grid.spectral().nyquist();
            if !(self.band >= 0.0 && self.band <= nyquist) {
                return Err(Error::InvalidArgument(format!(
                    "band {} exceeds the grid Nyquist frequency {nyquist}",
                    self.band
                )));
            }
        }
        if let Some(t) = self.target_hss {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("target H^{{s,s}} norm must be >= 0, got {t}")));
            }
        }
        Ok(())
    }
}

/// Deterministic potential for `(spec, grid)`.
pub fn gen_potential(spec: &PotentialSpec, grid: &Grid2D) -> Result<ComplexField> {
    spec.validate(grid)?;
    let c = spec.center;
    let w = spec.width;
    let envelope = move |z: Complex64| (-(z - c).norm_sqr() / (2.0 * w * w)).exp();
    let field = match spec.kind {
        PotentialKind::Gaussian => ComplexField::from_fn(*grid, |z| Complex64::new(spec.amplitude * envelope(z), 0.0)),
        PotentialKind::PolyGaussian => ComplexField::from_fn(*grid, |z| (z - c) / w * (spec.amplitude * envelope(z))),
        PotentialKind::RandomBandlimited => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let modes: Vec<(Complex64, Complex64)> = (0..BAND_MODES)
                .map(|_| {
                    // uniform in the disk of radius `band`
                    let r = spec.band * rng.random::<f64>().sqrt();
                    let theta = 2.0 * PI * rng.random::<f64>();
                    let amp = rng.random::<f64>();
                    let phase = 2.0 * PI * rng.random::<f64>();
                    (Complex64::from_polar(r, theta), Complex64::from_polar(amp, phase))
                })
                .collect();
            let norm = (BAND_MODES as f64).sqrt();
            ComplexField::from_fn(*grid, |z| {
                let wave: Complex64 = modes
                    .iter()
                    .map(|&(xi, coef)| coef * Complex64::from_polar(1.0, xi.re * (z - c).re + xi.im * (z - c).im))
                    .sum();
                wave * (spec.amplitude * envelope(z) / norm)
            })
        }
    };
    match spec.target_hss {
        None => Ok(field),
        Some(target) => {
            let current = hss_norm(&field, spec.hss_index)?;
            if current == 0.0 {
                if target == 0.0 {
                    return Ok(field);
                }
                return Err(Error::InvalidArgument("cannot rescale a zero potential to a nonzero norm".into()));
            }
            Ok(field.scale(Complex64::new(target / current, 0.0)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::new(64, 6.0).unwrap()
    }

    #[test]
    fn gaussian_is_direct_evaluation() {
        let g = grid();
        let q = gen_potential(&PotentialSpec::default(), &g).unwrap();
        for (i, v) in q.values().iter().enumerate() {
            let z = g.node_at(i);
            assert_eq!(*v, Complex64::new((-z.norm_sqr() / 2.0).exp(), 0.0));
        }
    }

    #[test]
    fn target_norm_is_met() {
        let g = grid();
        for kind in [PotentialKind::Gaussian, PotentialKind::PolyGaussian, PotentialKind::RandomBandlimited] {
            for s in [0.25, 0.5, 1.0] {
                let spec = PotentialSpec {
                    kind,
                    band: 2.0,
                    target_hss: Some(1.0),
                    hss_index: SobolevIndex::new(s).unwrap(),
                    seed: 7,
                    ..Default::default()
                };
                let q = gen_potential(&spec, &g).unwrap();
                let n = hss_norm(&q, spec.hss_index).unwrap();
                assert!((n - 1.0).abs() < 1e-12, "{kind:?} s={s}: {n}");
            }
        }
    }

    #[test]
    fn random_kind_is_seed_deterministic() {
        let g = grid();
        let spec = PotentialSpec { kind: PotentialKind::RandomBandlimited, band: 3.0, seed: 42, ..Default::default() };
        let a = gen_potential(&spec, &g).unwrap();
        let b = gen_potential(&spec, &g).unwrap();
        assert_eq!(a, b);
        let c = gen_potential(&PotentialSpec { seed: 43, ..spec }, &g).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn band_above_nyquist_is_rejected() {
        let g = grid();
        let nyq = g.spectral().nyquist();
        let spec = PotentialSpec { kind: PotentialKind::RandomBandlimited, band: nyq * 1.01, ..Default::default() };
        assert!(gen_potential(&spec, &g).is_err());
        assert!(gen_potential(&PotentialSpec { width: 0.0, ..Default::default() }, &g).is_err());
    }

    #[test]
    fn zero_amplitude_cannot_be_rescaled() {
        let g = grid();
        let spec = PotentialSpec { amplitude: 0.0, target_hss: Some(1.0), ..Default::default() };
        assert!(gen_potential(&spec, &g).is_err());
        let spec = PotentialSpec { amplitude: 0.0, ..Default::default() };
        assert!(gen_potential(&spec, &g).unwrap().is_zero());
    }
}
