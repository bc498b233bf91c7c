use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pkweir::protocol::{synthetic_manifest, SyntheticConfig};
use pkweir::sampler::{generate_batch, DesignSpace};
use pkweir::solidmesh::{mesh_batch, DEFAULT_X_SEGMENTS};
use pkweir::surrogates::{fit_forest, ForestParams};
use pkweir::{Exec, PkwDesign, PkwFixed};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("serial", Exec::Serial), ("parallel", Exec::Parallel)];

fn designs(n: usize) -> Vec<PkwDesign> {
    let fixed = PkwFixed::laboratory();
    let batch = generate_batch(&DesignSpace::standard(fixed), n, 7, Exec::Parallel).unwrap();
    batch.samples.into_iter().map(|s| PkwDesign::new(fixed, s).unwrap()).collect()
}

fn meshing(c: &mut Criterion) {
    let ds = designs(64);
    let mut g = c.benchmark_group("mesh_batch_64");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| mesh_batch(black_box(&ds), DEFAULT_X_SEGMENTS, exec))
        });
    }
    g.finish();
}

fn labelling(c: &mut Criterion) {
    let cfg = SyntheticConfig::new(PkwFixed::laboratory(), 200, 3, 0.005);
    let mut g = c.benchmark_group("synthetic_manifest_200");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| synthetic_manifest(black_box(&cfg), exec)));
    }
    g.finish();
}

fn forest(c: &mut Criterion) {
    let m = synthetic_manifest(&SyntheticConfig::new(PkwFixed::laboratory(), 100, 5, 0.005), Exec::Parallel).unwrap();
    let (x, y) = m.design_matrix(&(0..m.labels.len()).collect::<Vec<_>>());
    let params = ForestParams { n_trees: 32, seed: 1, ..ForestParams::default() };
    let mut g = c.benchmark_group("forest_fit_32_trees");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| fit_forest(black_box(&x), &y, params, exec)));
    }
    g.finish();
}

criterion_group!(benches, meshing, labelling, forest);
criterion_main!(benches);
