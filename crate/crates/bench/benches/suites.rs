use criterion::{criterion_group, criterion_main, Criterion};
use sharp_hls::flow::{self, FlowState};
use sharp_hls::suites::{self, SuiteConfig};
use sharp_hls::{project_to_manifold, Dim};
use sharp_hls_bench::{grid, perturbed_ustar};

fn flow_step(c: &mut Criterion) {
    let g = grid(3, 2048);
    let u = perturbed_ustar(&g, 0.3, 2);
    let state = FlowState::new(u, flow::critical_exponent(g.n()), 2e-3).unwrap();
    c.bench_function("flow_step_2048", |b| b.iter(|| flow::step(&state, 2e-3).unwrap()));
}

fn projection(c: &mut Criterion) {
    let g = grid(3, 2048);
    let u = perturbed_ustar(&g, 0.2, 3);
    c.bench_function("project_to_manifold_2048", |b| b.iter(|| project_to_manifold(&u).unwrap()));
}

fn verification_suites(c: &mut Criterion) {
    let cfg = SuiteConfig::new(Dim::new(3).unwrap(), 5);
    let mut group = c.benchmark_group("suite");
    group.sample_size(10);
    group.bench_function("ruc_20", |b| b.iter(|| suites::ruc_suite(&cfg, 0.5, 20).unwrap()));
    group.bench_function("star_20", |b| b.iter(|| suites::star_suite(&cfg, 20).unwrap()));
    group.bench_function("gap_20", |b| b.iter(|| suites::gap_suite(&cfg, 20).unwrap()));
    group.finish();
}

criterion_group!(benches, flow_step, projection, verification_suites);
criterion_main!(benches);
