//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, no sections. Every key has a
//! default, so an empty file is a valid configuration. Duplicate and unknown
//! keys are errors. [`RunConfig::serialize`] writes every key in a fixed order
//! and parses back to an identical value.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use dbar_nft::harness::{PotentialKind, PotentialSpec, Resolution};
use dbar_nft::{Complex64, Grid2D, KGrid, Method, SobolevIndex, SolverConfig};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid_n: usize,
    pub grid_l: f64,
    /// k-grid size; the dual lattice of the spatial grid when unset.
    pub kgrid_m: Option<usize>,
    pub kgrid_k: Option<f64>,
    pub solver: SolverConfig,
    pub potential: PotentialSpec,
    pub s: f64,
    pub p: f64,
    pub ball_radius: f64,
    pub pairs: usize,
    pub perturbation_steps: usize,
    pub k_list: Vec<f64>,
    pub deltas: Vec<f64>,
    pub k: Complex64,
    pub probes: usize,
    /// Grid sizes for refinement studies; `[grid.N]` when empty.
    pub refine: Vec<usize>,
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_n: 64,
            grid_l: 7.0,
            kgrid_m: None,
            kgrid_k: None,
            solver: SolverConfig::default(),
            potential: PotentialSpec::default(),
            s: 0.5,
            p: 4.0,
            ball_radius: 1.0,
            pairs: 32,
            perturbation_steps: 4,
            k_list: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            deltas: vec![0.1, 0.05, 0.025],
            k: Complex64::new(1.0, 0.0),
            probes: 8,
            refine: Vec::new(),
            input: None,
            out_dir: PathBuf::from("."),
            threads: None,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse '{value}'"))
}

fn parse_f64(value: &str) -> Result<f64, String> {
    let v: f64 = parse(value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{value}' is not a finite number"))
    }
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|item| parse(item.trim())).collect()
}

fn parse_f64_list(value: &str) -> Result<Vec<f64>, String> {
    let list: Vec<f64> = parse_list(value)?;
    match list.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(format!("'{v}' is not a finite number")),
        None => Ok(list),
    }
}

/// `re,im`
fn parse_complex(value: &str) -> Result<Complex64, String> {
    match parse_f64_list(value)?.as_slice() {
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(format!("expected 're,im', got '{value}'")),
    }
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub const KEYS: [&'static str; 29] = [
        "grid.N",
        "grid.L",
        "kgrid.M",
        "kgrid.K",
        "solver.tol",
        "solver.max_iter",
        "solver.method",
        "solver.restart",
        "potential.kind",
        "potential.amplitude",
        "potential.width",
        "potential.center",
        "potential.band",
        "potential.target_hss",
        "potential.s",
        "s",
        "p",
        "ball_radius",
        "pairs",
        "perturbation_steps",
        "k_list",
        "deltas",
        "k",
        "probes",
        "refine",
        "input",
        "out_dir",
        "threads",
        "seed",
    ];

    /// Assigns one key. Values are checked for syntax only; see [`Self::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "grid.N" => self.grid_n = parse(value)?,
            "grid.L" => self.grid_l = parse_f64(value)?,
            "kgrid.M" => self.kgrid_m = Some(parse(value)?),
            "kgrid.K" => self.kgrid_k = Some(parse_f64(value)?),
            "solver.tol" => self.solver.tol = parse_f64(value)?,
            "solver.max_iter" => self.solver.max_iter = parse(value)?,
            "solver.method" => self.solver.method = value.parse::<Method>().map_err(|e| e.to_string())?,
            "solver.restart" => self.solver.restart = parse(value)?,
            "potential.kind" => self.potential.kind = value.parse::<PotentialKind>().map_err(|e| e.to_string())?,
            "potential.amplitude" => self.potential.amplitude = parse_f64(value)?,
            "potential.width" => self.potential.width = parse_f64(value)?,
            "potential.center" => self.potential.center = parse_complex(value)?,
            "potential.band" => self.potential.band = parse_f64(value)?,
            "potential.target_hss" => self.potential.target_hss = Some(parse_f64(value)?),
            "potential.s" => {
                self.potential.hss_index = SobolevIndex::new(parse_f64(value)?).map_err(|e| e.to_string())?
            }
            "s" => self.s = parse_f64(value)?,
            "p" => self.p = parse_f64(value)?,
            "ball_radius" => self.ball_radius = parse_f64(value)?,
            "pairs" => self.pairs = parse(value)?,
            "perturbation_steps" => self.perturbation_steps = parse(value)?,
            "k_list" => self.k_list = parse_f64_list(value)?,
            "deltas" => self.deltas = parse_f64_list(value)?,
            "k" => self.k = parse_complex(value)?,
            "probes" => self.probes = parse(value)?,
            "refine" => self.refine = parse_list(value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "threads" => self.threads = Some(parse(value)?),
            "seed" => self.seed = parse(value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut config = Self::default();
        let mut seen = HashSet::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::Config { line, detail: format!("expected 'key = value', got '{content}'") })?;
            let (key, value) = (key.trim(), value.trim());
            if !Self::KEYS.contains(&key) {
                return Err(CliError::UnknownKey { line, key: key.to_string() });
            }
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config { line, detail: format!("duplicate key '{key}'") });
            }
            config.set(key, value).map_err(|detail| CliError::Config { line, detail: format!("{key}: {detail}") })?;
        }
        Ok(config)
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), CliError> {
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("override '{item}' is not key=value")))?;
            let key = key.trim();
            if !Self::KEYS.contains(&key) {
                return Err(CliError::Validation(format!("unknown key '{key}' in --set")));
            }
            self.set(key, value.trim()).map_err(|e| CliError::Validation(format!("--set {key}: {e}")))?;
        }
        Ok(())
    }

    /// Every key with its current value; optional keys are written only when set.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("grid.N", self.grid_n.to_string());
        put("grid.L", self.grid_l.to_string());
        if let Some(m) = self.kgrid_m {
            put("kgrid.M", m.to_string());
        }
        if let Some(k) = self.kgrid_k {
            put("kgrid.K", k.to_string());
        }
        put("solver.tol", self.solver.tol.to_string());
        put("solver.max_iter", self.solver.max_iter.to_string());
        put("solver.method", self.solver.method.name().to_string());
        put("solver.restart", self.solver.restart.to_string());
        let pot = &self.potential;
        put("potential.kind", pot.kind.name().to_string());
        put("potential.amplitude", pot.amplitude.to_string());
        put("potential.width", pot.width.to_string());
        put("potential.center", format!("{},{}", pot.center.re, pot.center.im));
        put("potential.band", pot.band.to_string());
        if let Some(t) = pot.target_hss {
            put("potential.target_hss", t.to_string());
        }
        put("potential.s", pot.hss_index.value().to_string());
        put("s", self.s.to_string());
        put("p", self.p.to_string());
        put("ball_radius", self.ball_radius.to_string());
        put("pairs", self.pairs.to_string());
        put("perturbation_steps", self.perturbation_steps.to_string());
        put("k_list", join(&self.k_list));
        put("deltas", join(&self.deltas));
        put("k", format!("{},{}", self.k.re, self.k.im));
        put("probes", self.probes.to_string());
        put("refine", join(&self.refine));
        if let Some(input) = &self.input {
            put("input", input.display().to_string());
        }
        put("out_dir", self.out_dir.display().to_string());
        if let Some(t) = self.threads {
            put("threads", t.to_string());
        }
        put("seed", self.seed.to_string());
        out
    }

    pub fn grid(&self) -> Result<Grid2D, CliError> {
        Ok(Grid2D::new(self.grid_n, self.grid_l)?)
    }

    fn kgrid_for(&self, grid: &Grid2D) -> Result<KGrid, CliError> {
        match (self.kgrid_m, self.kgrid_k) {
            (None, None) => Ok(KGrid::dual_of(grid)),
            (m, k) => {
                let dual = KGrid::dual_of(grid);
                Ok(KGrid::new(m.unwrap_or(dual.m()), k.unwrap_or(dual.half_width()))?)
            }
        }
    }

    pub fn kgrid(&self) -> Result<KGrid, CliError> {
        self.kgrid_for(&self.grid()?)
    }

    /// The refinement ladder, each grid with its k-grid.
    pub fn resolutions(&self) -> Result<Vec<Resolution>, CliError> {
        let sizes = if self.refine.is_empty() { vec![self.grid_n] } else { self.refine.clone() };
        sizes
            .into_iter()
            .map(|n| {
                let grid = Grid2D::new(n, self.grid_l)?;
                Ok(Resolution { grid, kgrid: self.kgrid_for(&grid)? })
            })
            .collect()
    }

    /// The potential with the run seed.
    pub fn potential_spec(&self) -> PotentialSpec {
        PotentialSpec { seed: self.seed, ..self.potential }
    }

    pub fn sobolev(&self) -> Result<SobolevIndex, CliError> {
        Ok(SobolevIndex::new(self.s)?)
    }

    /// Checks every value before anything is computed.
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |msg: String| Err(CliError::Validation(msg));
        for level in self.resolutions()? {
            self.potential_spec().validate(&level.grid)?;
        }
        self.grid()?;
        self.kgrid()?;
        self.solver.validate()?;
        self.sobolev()?;
        if !(self.p > 2.0) {
            return invalid(format!("p must exceed 2, got {}", self.p));
        }
        if !(self.ball_radius > 0.0) {
            return invalid(format!("ball_radius must be positive, got {}", self.ball_radius));
        }
        if self.pairs == 0 {
            return invalid("pairs must be >= 1".into());
        }
        if self.probes == 0 {
            return invalid("probes must be >= 1".into());
        }
        if self.k_list.is_empty() || self.k_list[0] < 1.0 || self.k_list.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("k_list must be non-empty, increasing, with values >= 1".into());
        }
        if self.deltas.is_empty()
            || self.deltas.iter().any(|&d| d <= 0.0)
            || self.deltas.windows(2).any(|w| w[1] >= w[0])
        {
            return invalid("deltas must be non-empty, positive and decreasing".into());
        }
        if self.threads == Some(0) {
            return invalid("threads must be >= 1".into());
        }
        Ok(())
    }
}
