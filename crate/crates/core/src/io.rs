//! Binary formats for fields (`CF2D`) and scattering data (`SD2D`).
//!
//! All integers and floats are little-endian; sample pairs `(re, im)` follow
//! the grid's storage order (first coordinate fastest).
//!
//! ```text
//! CF2D: "CF2D" u32 version=1  u32 N  f64 L                     N^2 x (f64, f64)
//! SD2D: "SD2D" u32 version=1  u32 M  f64 K  u32 N  f64 L       M^2 x (f64, f64)
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid2D};
use crate::nft::{KGrid, ScatteringData, ScatteringMeta};

pub const FIELD_MAGIC: &[u8; 4] = b"CF2D";
pub const SCATTERING_MAGIC: &[u8; 4] = b"SD2D";
pub const FORMAT_VERSION: u32 = 1;

fn put_samples(out: &mut Vec<u8>, values: &[Complex64]) {
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Format(format!("truncated input at byte {}", self.pos))),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        let found = self.take(4)?;
        if found != magic {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(found),
                String::from_utf8_lossy(magic)
            )));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        Ok(())
    }

    fn samples(&mut self, count: usize) -> Result<Vec<Complex64>> {
        (0..count).map(|_| Ok(Complex64::new(self.f64()?, self.f64()?))).collect()
    }

    fn finish(&self) -> Result<()> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(Error::Format(format!("{} trailing bytes", self.bytes.len() - self.pos)))
        }
    }
}

fn grid_from(n: u32, half_width: f64) -> Result<Grid2D> {
    Grid2D::new(n as usize, half_width).map_err(|e| Error::Format(format!("bad grid header: {e}")))
}

pub fn encode_field(field: &ComplexField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(20 + 16 * grid.len());
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    put_samples(&mut out, field.values());
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<ComplexField> {
    let mut cur = Cursor { bytes, pos: 0 };
    cur.header(FIELD_MAGIC)?;
    let n = cur.u32()?;
    let l = cur.f64()?;
    let grid = grid_from(n, l)?;
    let values = cur.samples(grid.len())?;
    cur.finish()?;
    ComplexField::new(grid, values)
}

pub fn encode_scattering(data: &ScatteringData) -> Vec<u8> {
    let kg = &data.kgrid;
    let src = &data.meta.source_grid;
    let mut out = Vec::with_capacity(32 + 16 * kg.len());
    out.extend_from_slice(SCATTERING_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(kg.m() as u32).to_le_bytes());
    out.extend_from_slice(&kg.half_width().to_le_bytes());
    out.extend_from_slice(&(src.n() as u32).to_le_bytes());
    out.extend_from_slice(&src.half_width().to_le_bytes());
    put_samples(&mut out, &data.values);
    out
}

/// Decodes `SD2D`; the solver digest and residual are not part of the format.
pub fn decode_scattering(bytes: &[u8]) -> Result<ScatteringData> {
    let mut cur = Cursor { bytes, pos: 0 };
    cur.header(SCATTERING_MAGIC)?;
    let m = cur.u32()?;
    let k = cur.f64()?;
    let n = cur.u32()?;
    let l = cur.f64()?;
    let kgrid = KGrid::from(grid_from(m, k)?);
    let source_grid = grid_from(n, l)?;
    let values = cur.samples(kgrid.len())?;
    cur.finish()?;
    ScatteringData::new(kgrid, values, ScatteringMeta { source_grid, solver_digest: String::new(), max_residual: None })
}

pub fn write_field(path: impl AsRef<Path>, field: &ComplexField) -> Result<()> {
    fs::File::create(path)?.write_all(&encode_field(field))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<ComplexField> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_field(&bytes)
}

pub fn write_scattering(path: impl AsRef<Path>, data: &ScatteringData) -> Result<()> {
    fs::File::create(path)?.write_all(&encode_scattering(data))?;
    Ok(())
}

pub fn read_scattering(path: impl AsRef<Path>) -> Result<ScatteringData> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_scattering(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_field(n: usize, l: f64) -> ComplexField {
        let g = Grid2D::new(n, l).unwrap();
        ComplexField::from_fn(g, |z| Complex64::new(z.re * 0.5, -z.im).exp())
    }

    #[test]
    fn field_layout_is_fixed() {
        let f = sample_field(2, 1.5);
        let bytes = encode_field(&f);
        assert_eq!(&bytes[..4], b"CF2D");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), 1.5);
        assert_eq!(bytes.len(), 20 + 4 * 16);
        // second sample is node (1, 0)
        let re1 = f64::from_le_bytes(bytes[36..44].try_into().unwrap());
        assert_eq!(re1, f.values()[1].re);
    }

    #[test]
    fn readers_reject_bad_headers() {
        let f = sample_field(4, 1.0);
        let mut bytes = encode_field(&f);
        bytes[0] = b'X';
        assert!(matches!(decode_field(&bytes), Err(Error::Format(_))));
        let mut bytes = encode_field(&f);
        bytes[4] = 2;
        assert!(matches!(decode_field(&bytes), Err(Error::Format(_))));
        let bytes = encode_field(&f);
        assert!(decode_field(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_scattering(&bytes).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_field(&extra).is_err());
    }

    #[test]
    fn scattering_round_trip() {
        let kg = KGrid::new(4, 2.5).unwrap();
        let values: Vec<Complex64> = (0..16).map(|i| Complex64::new(i as f64, -0.5 * i as f64)).collect();
        let meta = ScatteringMeta {
            source_grid: Grid2D::new(8, 3.0).unwrap(),
            solver_digest: String::new(),
            max_residual: None,
        };
        let data = ScatteringData::new(kg, values, meta).unwrap();
        let bytes = encode_scattering(&data);
        assert_eq!(&bytes[..4], b"SD2D");
        assert_eq!(bytes.len(), 32 + 16 * 16);
        assert_eq!(decode_scattering(&bytes).unwrap(), data);
    }

    proptest! {
        #[test]
        fn field_encoding_round_trips_bitwise(
            log_n in 1u32..5,
            l in 0.1f64..100.0,
            seed in any::<u64>(),
        ) {
            let n = 1usize << log_n;
            let g = Grid2D::new(n, l).unwrap();
            let mut state = seed;
            let values: Vec<Complex64> = (0..n * n).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = f64::from_bits((state >> 12) | 0x3ff0_0000_0000_0000) - 1.5;
                Complex64::new(a, -a * 3.0)
            }).collect();
            let f = ComplexField::new(g, values).unwrap();
            let bytes = encode_field(&f);
            let back = decode_field(&bytes).unwrap();
            prop_assert_eq!(encode_field(&back), bytes);
            prop_assert_eq!(back, f);
        }
    }
}
