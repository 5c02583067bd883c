//! Compares the data-parallel pairwise transport solve against the
//! sequential reference on grid graphs of increasing size. Run with
//! `cargo bench -p eigenport`; add `--no-default-features` to measure the
//! build where `distance_matrix` itself degrades to the serial loop.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eigenport::graph::{build_grid, incidence_matrices, BidirectedIncidence};
use eigenport::pmf::{to_pmf_squared, Pmf};
use eigenport::spectral::{eigendecompose, laplacian, LaplacianKind};
use eigenport::transport::{distance_matrix, distance_matrix_serial, LpObjective};

fn grid_case(m: usize, n: usize) -> (BidirectedIncidence, Vec<Pmf>) {
    let g = build_grid(m, n).unwrap();
    let l = laplacian(&g, LaplacianKind::Unnormalized);
    let s = eigendecompose(l.as_view(), LaplacianKind::Unnormalized).unwrap();
    let pmfs = (0..s.len())
        .map(|k| to_pmf_squared(s.eigenvector(k)).unwrap())
        .collect();
    (incidence_matrices(&g), pmfs)
}

fn bench_distance_matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance_matrix");
    group.sample_size(20);
    for (m, n) in [(7, 3), (10, 4)] {
        let (inc, pmfs) = grid_case(m, n);
        let label = format!("grid_{m}x{n}");
        group.bench_with_input(
            BenchmarkId::new("default", &label),
            &(&inc, &pmfs),
            |b, (inc, pmfs)| {
                b.iter(|| distance_matrix(inc, pmfs, 0.5, LpObjective::Unit).unwrap())
            },
        );
        group.bench_with_input(
            BenchmarkId::new("serial", &label),
            &(&inc, &pmfs),
            |b, (inc, pmfs)| {
                b.iter(|| distance_matrix_serial(inc, pmfs, 0.5, LpObjective::Unit).unwrap())
            },
        );
    }
    group.finish();
}

criterion_group!(benches, bench_distance_matrix);
criterion_main!(benches);
