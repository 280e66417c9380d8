use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Named scalars and series produced by one experiment.
///
/// CSV layout: a `key,value` header, the rows `name`, `digest`, `seed`, one
/// row per scalar, then for each series a `series:<key>` line followed by its
/// `x,y` rows. Numbers use Rust's shortest round-trip formatting.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub scalars: Vec<(String, f64)>,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
    pub digest: String,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, digest: impl Into<String>, seed: u64) -> Self {
        Self { name: name.into(), scalars: Vec::new(), series: Vec::new(), digest: digest.into(), seed }
    }

    /// Sets a scalar, replacing any earlier value under the same key.
    pub fn set(&mut self, key: &str, value: f64) {
        match self.scalars.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.scalars.push((key.to_string(), value)),
        }
    }

    pub fn push_point(&mut self, key: &str, x: f64, y: f64) {
        match self.series.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1.push((x, y)),
            None => self.series.push((key.to_string(), vec![(x, y)])),
        }
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.scalars.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn series(&self, key: &str) -> Option<&[(f64, f64)]> {
        self.series.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_slice())
    }

    /// True when the experiment flagged its input as degenerate.
    pub fn is_degenerate(&self) -> bool {
        self.scalar("degenerate") == Some(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.scalars {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("report {}: scalar {k} is not finite", self.name)));
            }
        }
        for (k, pts) in &self.series {
            if pts.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
                return Err(Error::InvalidArgument(format!("report {}: series {k} is not finite", self.name)));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        let _ = writeln!(out, "name,{}", self.name);
        let _ = writeln!(out, "digest,{}", self.digest);
        let _ = writeln!(out, "seed,{}", self.seed);
        for (k, v) in &self.scalars {
            let _ = writeln!(out, "{k},{v}");
        }
        for (k, pts) in &self.series {
            let _ = writeln!(out, "series:{k}");
            for (x, y) in pts {
                let _ = writeln!(out, "{x},{y}");
            }
        }
        out
    }

    /// `<name>-<seed>.csv`
    pub fn file_name(&self) -> String {
        format!("{}-{}.csv", self.name, self.seed)
    }

    pub fn write_csv(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let path = dir.as_ref().join(self.file_name());
        fs::write(&path, self.to_csv())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = ExperimentReport::new("plancherel", "abc", 7);
        r.set("ratio", 1.0);
        r.set("defect", 0.25);
        r.set("ratio", 0.5);
        r.push_point("defect", 64.0, 1e-3);
        r.push_point("defect", 128.0, 2.5e-4);
        assert_eq!(
            r.to_csv(),
            "key,value\nname,plancherel\ndigest,abc\nseed,7\nratio,0.5\ndefect,0.25\nseries:defect\n64,0.001\n128,0.00025\n"
        );
        assert_eq!(r.file_name(), "plancherel-7.csv");
        assert_eq!(r.scalar("ratio"), Some(0.5));
        assert!(!r.is_degenerate());
    }

    #[test]
    fn non_finite_values_fail_validation() {
        let mut r = ExperimentReport::new("x", "", 0);
        r.set("a", 1.0);
        assert!(r.validate().is_ok());
        r.push_point("s", 1.0, f64::NAN);
        assert!(r.validate().is_err());
    }
}
