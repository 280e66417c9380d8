//! Forward-transform k-sweep, sequential versus rayon-parallel.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dbar_nft::harness::{gen_potential, PotentialSpec};
use dbar_nft::nft::forward_transform_with;
use dbar_nft::{Grid2D, KGrid, Schedule, SolverConfig};

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward_sweep");
    group.sample_size(10);
    for n in [16usize, 32] {
        let grid = Grid2D::new(n, 6.0).unwrap();
        let q = gen_potential(&PotentialSpec::default(), &grid).unwrap();
        let kgrid = KGrid::new(8, 3.0).unwrap();
        let cfg = SolverConfig::default();
        for (name, schedule) in [("sequential", Schedule::Sequential), ("parallel", Schedule::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, n), &q, |b, q| {
                b.iter(|| forward_transform_with(q, &kgrid, &cfg, schedule).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
