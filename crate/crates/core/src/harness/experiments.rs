use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fit::loglog_fit;
use super::potential::{gen_potential, PotentialKind, PotentialSpec};
use super::report::ExperimentReport;
use crate::cgo::{solve_cgo, CGOSolution, ScatteringOperator, SolverConfig};
use crate::error::{Error, Result};
use crate::field::{hss_norm, l2_norm, lp_norm, ComplexField, Grid2D, SobolevIndex};
use crate::nft::{forward_transform, inverse_transform, KGrid, ScatteringData};
use crate::par::{map_indexed, Schedule};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Smallest admissible `||q2 - q1||_{H^{s,s}}` for a Lipschitz pair.
const MIN_PAIR_DISTANCE: f64 = 1e-6;

/// A spatial grid paired with the k-grid its transforms are sampled on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    pub grid: Grid2D,
    pub kgrid: KGrid,
}

impl Resolution {
    /// `kgrid` is the dual lattice of `grid`.
    pub fn matched(grid: Grid2D) -> Self {
        Self { grid, kgrid: KGrid::dual_of(&grid) }
    }
}

fn check_levels(grids: &[Resolution]) -> Result<()> {
    if grids.is_empty() {
        Err(Error::InvalidArgument("at least one resolution is required".into()))
    } else {
        Ok(())
    }
}

fn finish(report: ExperimentReport) -> Result<ExperimentReport> {
    report.validate()?;
    Ok(report)
}

struct PlancherelLevel {
    q: ComplexField,
    transform: ScatteringData,
    norm_q: f64,
    norm_f: f64,
}

fn plancherel_level(spec: &PotentialSpec, level: &Resolution, cfg: &SolverConfig) -> Result<PlancherelLevel> {
    let q = gen_potential(spec, &level.grid)?;
    let transform = forward_transform(&q, &level.kgrid, cfg)?;
    let norm_q = l2_norm(&q);
    let norm_f = transform.l2_norm();
    Ok(PlancherelLevel { q, transform, norm_q, norm_f })
}

fn record_plancherel(report: &mut ExperimentReport, lvl: &PlancherelLevel, n: usize) {
    let defect = (lvl.norm_f - lvl.norm_q).abs();
    report.push_point("defect", n as f64, defect);
    report.set("norm_q", lvl.norm_q);
    report.set("norm_Fq", lvl.norm_f);
    report.set("defect", defect);
    if lvl.norm_q > 0.0 {
        let ratio = lvl.norm_f / lvl.norm_q;
        report.push_point("relative_defect", n as f64, (ratio - 1.0).abs());
        report.set("ratio", ratio);
        report.set("relative_defect", (ratio - 1.0).abs());
    }
    if let Some(r) = lvl.transform.meta.max_residual {
        report.set("max_residual", r);
    }
}

/// Compares `||F[q]||_2` with `||q||_2` at each resolution. Scalars describe
/// the last (finest) level; the `defect` series runs over all of them.
pub fn plancherel_check(spec: &PotentialSpec, grids: &[Resolution], cfg: &SolverConfig) -> Result<ExperimentReport> {
    check_levels(grids)?;
    let mut report = ExperimentReport::new("plancherel", cfg.digest(), spec.seed);
    for level in grids {
        let lvl = plancherel_level(spec, level, cfg)?;
        if lvl.norm_q == 0.0 {
            report.set("degenerate", 1.0);
        }
        record_plancherel(&mut report, &lvl, level.grid.n());
    }
    finish(report)
}

fn record_error(
    report: &mut ExperimentReport,
    q: &ComplexField,
    norm_q: f64,
    back: Option<&ComplexField>,
) -> Result<()> {
    let n = q.grid().n();
    let error = match back {
        Some(back) if norm_q > 0.0 => l2_norm(&back.sub(q)?) / norm_q,
        _ => {
            report.set("degenerate", 1.0);
            0.0
        }
    };
    report.push_point("error", n as f64, error);
    report.set("error", error);
    Ok(())
}

/// Forward transform, inverse transform, and the relative `L^2` error of the
/// reconstruction. Also records the Plancherel quantities of the forward step.
pub fn roundtrip_check(spec: &PotentialSpec, grids: &[Resolution], cfg: &SolverConfig) -> Result<ExperimentReport> {
    check_levels(grids)?;
    let mut report = ExperimentReport::new("roundtrip", cfg.digest(), spec.seed);
    for level in grids {
        let lvl = plancherel_level(spec, level, cfg)?;
        record_plancherel(&mut report, &lvl, level.grid.n());
        let back = if lvl.norm_q == 0.0 { None } else { Some(inverse_transform(&lvl.transform, &level.grid, cfg)?) };
        record_error(&mut report, &lvl.q, lvl.norm_q, back.as_ref())?;
    }
    finish(report)
}

/// The single-level [`roundtrip_check`] report for a transform and
/// reconstruction computed elsewhere, e.g. read back from files.
pub fn roundtrip_report(
    q: &ComplexField,
    transform: &ScatteringData,
    reconstruction: &ComplexField,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<ExperimentReport> {
    q.grid().check_same(reconstruction.grid())?;
    let mut report = ExperimentReport::new("roundtrip", cfg.digest(), seed);
    let norm_q = l2_norm(q);
    let lvl = PlancherelLevel { q: q.clone(), transform: transform.clone(), norm_q, norm_f: transform.l2_norm() };
    record_plancherel(&mut report, &lvl, q.grid().n());
    record_error(&mut report, q, norm_q, (norm_q > 0.0).then_some(reconstruction))?;
    finish(report)
}

/// Parameters of [`lipschitz_experiment`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzSettings {
    pub s: SobolevIndex,
    pub ball_radius: f64,
    pub pairs: usize,
    pub seed: u64,
    /// Shape of the sampled potentials (kind, width, band); norms are set per draw.
    pub template: PotentialSpec,
    /// Number of halvings in the perturbation family `q1 + eps g`; 0 disables it.
    pub perturbation_steps: usize,
}

impl LipschitzSettings {
    fn validate(&self) -> Result<()> {
        let s = self.s.value();
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidArgument(format!("Lipschitz experiment needs 0 < s < 1, got {s}")));
        }
        if !(self.ball_radius > 0.0 && self.ball_radius.is_finite()) {
            return Err(Error::InvalidArgument("ball radius must be positive".into()));
        }
        if self.pairs == 0 {
            return Err(Error::InvalidArgument("at least one pair is required".into()));
        }
        Ok(())
    }
}

fn mix_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Samples pairs in the `H^{s,s}` ball and measures
/// `||F[q2] - F[q1]||_2 / ||q2 - q1||_{H^{s,s}}` at each resolution.
pub fn lipschitz_experiment(
    settings: &LipschitzSettings,
    grids: &[Resolution],
    cfg: &SolverConfig,
) -> Result<ExperimentReport> {
    settings.validate()?;
    check_levels(grids)?;
    let s = settings.s;
    let mut report = ExperimentReport::new("lipschitz", cfg.digest(), settings.seed);
    report.set("s", s.value());
    report.set("ball_radius", settings.ball_radius);
    report.set("pairs", settings.pairs as f64);

    // norms drawn once so that every level sees the same family
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let radii: Vec<(f64, f64)> = (0..settings.pairs)
        .map(|_| {
            let a = settings.ball_radius * rng.random_range(0.25..=1.0);
            let b = settings.ball_radius * rng.random_range(0.25..=1.0);
            (a, b)
        })
        .collect();
    let draw = |stream: u64, norm: f64| PotentialSpec {
        target_hss: Some(norm),
        hss_index: s,
        seed: mix_seed(settings.seed, stream),
        ..settings.template
    };

    let mut max_by_level = Vec::new();
    for level in grids {
        let n = level.grid.n();
        let mut ratios = Vec::with_capacity(settings.pairs);
        let mut first_q1: Option<(ComplexField, ScatteringData)> = None;
        for (j, &(r1, r2)) in radii.iter().enumerate() {
            let q1 = gen_potential(&draw(2 * j as u64, r1), &level.grid)?;
            let mut attempt = 0u64;
            let (q2, distance) = loop {
                let stream = 2 * j as u64 + 1 + 2 * settings.pairs as u64 * attempt;
                let q2 = gen_potential(&draw(stream, r2), &level.grid)?;
                let distance = hss_norm(&q2.sub(&q1)?, s)?;
                if distance >= MIN_PAIR_DISTANCE {
                    break (q2, distance);
                }
                attempt += 1;
            };
            let f1 = forward_transform(&q1, &level.kgrid, cfg)?;
            let f2 = forward_transform(&q2, &level.kgrid, cfg)?;
            let ratio = f2.distance(&f1)? / distance;
            report.push_point(&format!("ratio_N{n}"), distance, ratio);
            ratios.push(ratio);
            if first_q1.is_none() {
                first_q1 = Some((q1, f1));
            }
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        report.set(&format!("max_ratio_N{n}"), max);
        report.set(&format!("median_ratio_N{n}"), median(&ratios));
        report.set("max_ratio", max);
        report.set("median_ratio", median(&ratios));
        report.set("empirical_constant", max);
        max_by_level.push(max);

        if settings.perturbation_steps > 0 {
            let (q1, f1) = first_q1.expect("at least one pair");
            let direction_spec = PotentialSpec {
                kind: PotentialKind::Gaussian,
                amplitude: 1.0,
                target_hss: Some(1.0),
                hss_index: s,
                ..settings.template
            };
            let direction = gen_potential(&direction_spec, &level.grid)?;
            let mut eps = 0.1 * settings.ball_radius;
            let mut last = 0.0;
            for _ in 0..settings.perturbation_steps {
                let q2 = q1.add(&direction.scale(Complex64::new(eps, 0.0)))?;
                let distance = hss_norm(&q2.sub(&q1)?, s)?;
                let f2 = forward_transform(&q2, &level.kgrid, cfg)?;
                last = f2.distance(&f1)? / distance;
                report.push_point(&format!("perturbation_N{n}"), eps, last);
                eps *= 0.5;
            }
            report.set(&format!("perturbation_limit_N{n}"), last);
        }
    }
    if max_by_level.len() >= 2 {
        let a = max_by_level[max_by_level.len() - 2];
        let b = max_by_level[max_by_level.len() - 1];
        report.set("max_ratio_change", (b / a - 1.0).abs());
    }
    finish(report)
}

/// Parameters of [`decay_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct DecaySettings {
    pub s: SobolevIndex,
    /// `L^p` exponent of the probes and outputs, `p > 2`.
    pub p: f64,
    /// Increasing `|k|` values, all `>= 1`; `k` runs along the positive real axis.
    pub k_list: Vec<f64>,
    pub probes: usize,
    pub seed: u64,
}

impl DecaySettings {
    fn validate(&self) -> Result<()> {
        if !(self.p > 2.0) {
            return Err(Error::InvalidArgument(format!("decay experiment needs p > 2, got {}", self.p)));
        }
        if self.k_list.is_empty() || self.k_list[0] < 1.0 || self.k_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("k_list must be increasing with min >= 1".into()));
        }
        if self.probes == 0 {
            return Err(Error::InvalidArgument("at least one probe is required".into()));
        }
        Ok(())
    }
}

fn probe(grid: &Grid2D, p: f64, seed: u64) -> Result<ComplexField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = ComplexField::new(
        *grid,
        (0..grid.len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
    )?;
    let norm = lp_norm(&raw, p)?;
    Ok(raw.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Empirical operator norms of `S^k_q` on `L^p` (sup over seeded unit probes)
/// and of `|k| ||S^k_q 1||_inf`, with a log-log fit of the former against `1 + |k|`.
pub fn decay_experiment(
    spec: &PotentialSpec,
    settings: &DecaySettings,
    grid: &Grid2D,
    cfg: &SolverConfig,
) -> Result<ExperimentReport> {
    settings.validate()?;
    let q = gen_potential(spec, grid)?;
    let mut report = ExperimentReport::new("decay", cfg.digest(), settings.seed);
    report.set("s", settings.s.value());
    report.set("p", settings.p);
    report.set("hss_norm_q", hss_norm(&q, settings.s)?);

    let probes: Vec<ComplexField> = (0..settings.probes)
        .map(|j| probe(grid, settings.p, mix_seed(settings.seed, j as u64)))
        .collect::<Result<_>>()?;
    let ones = vec![ONE; grid.len()];
    let rows = map_indexed(settings.k_list.len(), Schedule::default(), |i| -> Result<(f64, f64)> {
        let k = Complex64::new(settings.k_list[i], 0.0);
        let op = ScatteringOperator::new(&q, k);
        let mut sup = 0.0f64;
        for f in &probes {
            let out = ComplexField::from_parts(*grid, op.apply(f.values()));
            sup = sup.max(lp_norm(&out, settings.p)?);
        }
        let linf = op.apply(&ones).iter().fold(0.0f64, |m, v| m.max(v.norm()));
        Ok((sup, linf))
    });

    let mut lp_points = Vec::new();
    let mut lp_scaled_max = 0.0f64;
    let mut linf_scaled_max = 0.0f64;
    for (&k, row) in settings.k_list.iter().zip(rows) {
        let (sup, linf) = row?;
        lp_points.push((1.0 + k, sup));
        report.push_point("lp_norm", k, sup);
        report.push_point("lp_scaled", k, sup * (1.0 + k).powf(settings.s.value()));
        report.push_point("linf", k, linf);
        report.push_point("linf_scaled", k, linf * k);
        lp_scaled_max = lp_scaled_max.max(sup * (1.0 + k).powf(settings.s.value()));
        linf_scaled_max = linf_scaled_max.max(linf * k);
    }
    report.set("lp_scaled_max", lp_scaled_max);
    report.set("linf_scaled_max", linf_scaled_max);
    match loglog_fit(&lp_points) {
        Some(fit) => {
            report.set("fitted_exponent", fit.slope);
            report.set("r_squared", fit.r_squared);
        }
        None => report.set("degenerate", 1.0),
    }
    finish(report)
}

fn converged(sol: CGOSolution, index: usize) -> Result<CGOSolution> {
    if sol.converged() {
        Ok(sol)
    } else {
        Err(Error::NotConverged { nodes: vec![index] })
    }
}

/// Checks `d_k psi1 = conj(F) psi2` and `d_kbar psi2 = F psi1` with central
/// differences in `k`.
///
/// The differences are taken on `u1, u2`; the factor `e^{i conj(k) z / 2}` is
/// differentiated exactly (`d_k` of it vanishes and `d_kbar` of it is
/// `iz/2` times itself), which keeps the large `z`-derivatives of the
/// exponential out of the truncation error.
pub fn dk_system_check(
    spec: &PotentialSpec,
    k: Complex64,
    deltas: &[f64],
    grid: &Grid2D,
    cfg: &SolverConfig,
) -> Result<ExperimentReport> {
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("deltas must be positive and decreasing".into()));
    }
    let q = gen_potential(spec, grid)?;
    let mut report = ExperimentReport::new("dksys", cfg.digest(), spec.seed);
    report.set("k_re", k.re);
    report.set("k_im", k.im);

    let center = converged(solve_cgo(&q, k, cfg)?, 0)?;
    let transform = q
        .values()
        .iter()
        .zip(center.u1.values())
        .enumerate()
        .map(|(i, (&qv, u))| qv * crate::field::character(-k, grid.node_at(i)) * u.conj())
        .sum::<Complex64>()
        * Complex64::new(0.0, grid.cell_area() / (2.0 * PI));
    report.set("transform_re", transform.re);
    report.set("transform_im", transform.im);

    let weight: Vec<Complex64> = grid.nodes().map(|z| (Complex64::i() * k.conj() * z * 0.5).exp()).collect();
    let weighted_norm = |f: &[Complex64]| -> f64 {
        (grid.cell_area() * f.iter().zip(&weight).map(|(v, w)| (v * w).norm_sqr()).sum::<f64>()).sqrt()
    };
    let norm_psi2 = weighted_norm(center.u2.values());
    report.set("norm_psi2", norm_psi2);

    let mut dk_points = Vec::new();
    let mut dkbar_points = Vec::new();
    for (j, &delta) in deltas.iter().enumerate() {
        let offsets = [
            Complex64::new(delta, 0.0),
            Complex64::new(-delta, 0.0),
            Complex64::new(0.0, delta),
            Complex64::new(0.0, -delta),
        ];
        let sols = offsets
            .iter()
            .enumerate()
            .map(|(m, &o)| converged(solve_cgo(&q, k + o, cfg)?, 1 + 4 * j + m))
            .collect::<Result<Vec<_>>>()?;
        let d1 = |pick: fn(&CGOSolution) -> &ComplexField, i: usize| {
            (pick(&sols[0]).values()[i] - pick(&sols[1]).values()[i]) / (2.0 * delta)
        };
        let d2 = |pick: fn(&CGOSolution) -> &ComplexField, i: usize| {
            (pick(&sols[2]).values()[i] - pick(&sols[3]).values()[i]) / (2.0 * delta)
        };
        fn u1(s: &CGOSolution) -> &ComplexField {
            &s.u1
        }
        fn u2(s: &CGOSolution) -> &ComplexField {
            &s.u2
        }
        let mut res_dk = Vec::with_capacity(grid.len());
        let mut res_dkbar = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let z = grid.node_at(i);
            let dk_u1 = (d1(u1, i) - Complex64::i() * d2(u1, i)) * 0.5;
            let dkbar_u2 = (d1(u2, i) + Complex64::i() * d2(u2, i)) * 0.5;
            let c1 = center.u1.values()[i];
            let c2 = center.u2.values()[i];
            res_dk.push(dk_u1 - transform.conj() * c2);
            res_dkbar.push(Complex64::i() * z * 0.5 * c2 + dkbar_u2 - transform * c1);
        }
        let r1 = weighted_norm(&res_dk);
        let r2 = weighted_norm(&res_dkbar);
        report.push_point("residual_dk", delta, r1);
        report.push_point("residual_dkbar", delta, r2);
        dk_points.push((delta, r1));
        dkbar_points.push((delta, r2));
    }
    match (loglog_fit(&dk_points), loglog_fit(&dkbar_points)) {
        (Some(a), Some(b)) => {
            report.set("slope_dk", a.slope);
            report.set("slope_dkbar", b.slope);
        }
        _ => report.set("degenerate", 1.0),
    }
    finish(report)
}
