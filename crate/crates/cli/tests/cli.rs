use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dbar_nft::harness::{roundtrip_check, PotentialSpec, Resolution};
use dbar_nft::io::{encode_field, read_field};
use dbar_nft::{Grid2D, SolverConfig};

const SMALL: &str = "grid.N = 32\ngrid.L = 7\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbar-nft")).args(args).arg("--out").arg(dir).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_scalars(text: &str) -> Vec<(String, String)> {
    text.lines()
        .skip(1)
        .take_while(|l| !l.starts_with("series:"))
        .filter_map(|l| l.split_once(',').map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

fn scalar(text: &str, key: &str) -> Option<f64> {
    csv_scalars(text).into_iter().find(|(k, _)| k == key).and_then(|(_, v)| v.parse().ok())
}

#[test]
fn gen_output_reloads_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.N = 128\ngrid.L = 7\n");
    let out = run(dir.path(), &["gen", "--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let path = dir.path().join("potential-0.cf2d");
    let bytes = fs::read(&path).unwrap();
    let field = read_field(&path).unwrap();
    assert_eq!(encode_field(&field), bytes);
    assert_eq!(field.grid().n(), 128);
}

#[test]
fn zero_potential_plancherel_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}potential.amplitude = 0\n"));
    let out = run(dir.path(), &["plancherel", "--config", &cfg, "--seed", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("plancherel-3.csv")).unwrap();
    assert_eq!(scalar(&csv, "ratio"), None);
    assert!(csv.lines().any(|l| l == "defect,0"), "{csv}");
    assert_eq!(scalar(&csv, "degenerate"), Some(1.0));
}

#[test]
fn forward_then_inverse_matches_in_process_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = run(dir.path(), &["forward", "--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = run(dir.path(), &["inverse", "--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("inverse-0.cf2d").exists());
    let csv = fs::read_to_string(dir.path().join("roundtrip-0.csv")).unwrap();

    let grid = Grid2D::new(32, 7.0).unwrap();
    let expected =
        roundtrip_check(&PotentialSpec::default(), &[Resolution::matched(grid)], &SolverConfig::default()).unwrap();
    for key in ["norm_q", "norm_Fq", "ratio", "defect", "relative_defect", "error"] {
        let got = scalar(&csv, key).unwrap_or_else(|| panic!("{key} missing"));
        let want = expected.scalar(key).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "{key}: {got} vs {want}");
    }
}

#[test]
fn artifacts_do_not_depend_on_thread_count() {
    let one = tempfile::tempdir().unwrap();
    let four = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}potential.kind = random_bandlimited\npotential.band = 2\n");
    for (dir, threads) in [(&one, "1"), (&four, "4")] {
        let cfg = write_config(dir.path(), &text);
        for cmd in ["gen", "forward", "roundtrip"] {
            let out = run(dir.path(), &[cmd, "--config", &cfg, "--threads", threads, "--seed", "9"]);
            assert!(out.status.success(), "{cmd}: {}", stderr(&out));
        }
    }
    for name in ["potential-9.cf2d", "scattering-9.sd2d", "roundtrip-9.csv"] {
        assert_eq!(fs::read(one.path().join(name)).unwrap(), fs::read(four.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn set_overrides_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = run(dir.path(), &["gen", "--config", &cfg, "--set", "grid.N=16", "--set", "seed=4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(read_field(dir.path().join("potential-4.cf2d")).unwrap().grid().n(), 16);
}

fn assert_failure(out: &Output, code: i32, category: &str) {
    assert_eq!(out.status.code(), Some(code), "{}", stderr(out));
    let err = stderr(out);
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("error: ")).collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(&format!("error: {category}: ")), "{err}");
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.N = 64\nbogus = 1\n");
    assert_failure(&run(dir.path(), &["gen", "--config", &cfg]), 1, "config");
    let cfg = write_config(dir.path(), "grid.N = 96\n");
    assert_failure(&run(dir.path(), &["gen", "--config", &cfg]), 1, "validation");
    assert_failure(&run(dir.path(), &["gen", "--set", "p=1"]), 1, "validation");
    assert_failure(&run(dir.path(), &["frobnicate"]), 1, "usage");
}

#[test]
fn non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("{SMALL}kgrid.M = 4\nkgrid.K = 1\nsolver.max_iter = 1\nsolver.tol = 1e-14\npotential.amplitude = 3\n"),
    );
    assert_failure(&run(dir.path(), &["forward", "--config", &cfg]), 2, "convergence");
}

#[test]
fn io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.cfg");
    assert_failure(&run(dir.path(), &["gen", "--config", missing.to_str().unwrap()]), 3, "io");
    let bad = dir.path().join("bad.sd2d");
    fs::write(&bad, b"SD2Dxxxx").unwrap();
    assert_failure(&run(dir.path(), &["inverse", "--set", &format!("input={}", bad.display())]), 3, "format");
    // inverse without a prior forward run
    assert_failure(&run(dir.path(), &["inverse"]), 3, "io");
}

#[test]
fn printed_config_reparses_to_the_same_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "grid.N = 32\nsolver.tol = 1e-10\nk_list = 1,2\n");
    let out = run(dir.path(), &["decay", "--config", &cfg, "--seed", "5", "--print-config"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let printed = String::from_utf8(out.stdout).unwrap();
    assert!(printed.contains("seed = 5\n") && printed.contains("solver.tol = 0.0000000001\n"), "{printed}");
    let again = write_config(dir.path(), &printed);
    let out = run(dir.path(), &["decay", "--config", &again, "--print-config"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), printed);
    assert!(!dir.path().join("decay-5.csv").exists());
}
