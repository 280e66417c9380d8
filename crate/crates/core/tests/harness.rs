//! Experiment edge cases and determinism.

use dbar_nft::harness::{
    decay_experiment, dk_system_check, gen_potential, lipschitz_experiment, plancherel_check, roundtrip_check,
    DecaySettings, LipschitzSettings, PotentialKind, PotentialSpec, Resolution,
};
use dbar_nft::{Complex64, Grid2D, KGrid, SobolevIndex, SolverConfig};

fn half() -> SobolevIndex {
    SobolevIndex::new(0.5).unwrap()
}

fn zero() -> PotentialSpec {
    PotentialSpec { amplitude: 0.0, ..Default::default() }
}

fn small() -> Resolution {
    Resolution::matched(Grid2D::new(32, 6.0).unwrap())
}

#[test]
fn zero_potential_reports_are_degenerate() {
    let cfg = SolverConfig::default();
    let grid = small().grid;

    let p = plancherel_check(&zero(), &[small()], &cfg).unwrap();
    assert_eq!((p.scalar("defect"), p.scalar("ratio")), (Some(0.0), None));
    assert!(p.is_degenerate());

    let r = roundtrip_check(&zero(), &[small()], &cfg).unwrap();
    assert_eq!(r.scalar("error"), Some(0.0));

    let settings = DecaySettings { s: half(), p: 4.0, k_list: vec![1.0, 2.0, 4.0], probes: 2, seed: 1 };
    let d = decay_experiment(&zero(), &settings, &grid, &cfg).unwrap();
    assert!(d.is_degenerate());
    assert_eq!(d.scalar("fitted_exponent"), None);
    assert!(d.series("lp_norm").unwrap().iter().all(|&(_, v)| v == 0.0));

    let k = dk_system_check(&zero(), Complex64::new(1.0, 0.0), &[0.1, 0.05], &grid, &cfg).unwrap();
    for key in ["residual_dk", "residual_dkbar"] {
        assert!(k.series(key).unwrap().iter().all(|&(_, v)| v == 0.0), "{key}");
    }
}

#[test]
fn lipschitz_pairs_and_perturbations_are_well_posed() {
    let settings = LipschitzSettings {
        s: half(),
        ball_radius: 1.0,
        pairs: 3,
        seed: 7,
        template: PotentialSpec { kind: PotentialKind::RandomBandlimited, band: 2.0, ..Default::default() },
        perturbation_steps: 4,
    };
    let level = Resolution { grid: Grid2D::new(32, 6.0).unwrap(), kgrid: KGrid::new(16, 4.0).unwrap() };
    let report = lipschitz_experiment(&settings, &[level], &SolverConfig::default()).unwrap();
    let ratios = report.series("ratio_N32").unwrap();
    assert_eq!(ratios.len(), 3);
    assert!(ratios.iter().all(|&(dist, r)| dist >= 1e-6 && r.is_finite() && r > 0.0));
    let family = report.series("perturbation_N32").unwrap();
    assert_eq!(family.len(), 4);
    assert!(family.iter().all(|&(_, r)| r.is_finite() && r > 0.0));
    // the difference quotient settles as eps shrinks
    let last = &family[family.len() - 2..];
    assert!((last[1].1 / last[0].1 - 1.0).abs() < 0.1, "{family:?}");
}

#[test]
fn potentials_do_not_depend_on_worker_count() {
    let grid = Grid2D::new(64, 6.0).unwrap();
    let spec = PotentialSpec {
        kind: PotentialKind::RandomBandlimited,
        band: 3.0,
        target_hss: Some(1.0),
        seed: 99,
        ..Default::default()
    };
    let fields: Vec<_> = [1, 4]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| gen_potential(&spec, &grid).unwrap())
        })
        .collect();
    assert_eq!(fields[0], fields[1]);
    assert_eq!(fields[0], gen_potential(&spec, &grid).unwrap());
}

/// Takes hours on one core; run with `--ignored`.
#[test]
#[ignore]
fn plancherel_defect_shrinks_under_refinement() {
    let grids: Vec<Resolution> =
        [64, 128, 256].iter().map(|&n| Resolution::matched(Grid2D::new(n, 7.0).unwrap())).collect();
    let report = plancherel_check(&PotentialSpec::default(), &grids, &SolverConfig::default()).unwrap();
    let defects = report.series("defect").unwrap();
    assert!(defects.windows(2).all(|w| w[1].1 <= 1.1 * w[0].1), "{defects:?}");
    assert!(defects[2].1 < defects[0].1, "{defects:?}");
}
