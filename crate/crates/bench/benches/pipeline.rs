use std::hint::black_box;

use coreg_bench::fixture;
use coreg_core::ctlinalg::{solve_filter_are, solve_regulator};
use coreg_core::graphs::{classify_topologies, verify_switching_assumptions};
use coreg_core::scenario::{example_graphs, example_schedule};
use coreg_core::sim::{integrate, rk4_operator};
use coreg_core::SimConfig;
use criterion::{criterion_group, criterion_main, Criterion};

fn linalg(c: &mut Criterion) {
    let f = fixture("example1");
    let r = &f.design.reduced[0];
    let ag = &f.scenario.agents[0];
    c.bench_function("regulator/example1_agent1", |b| {
        b.iter(|| solve_regulator(black_box(&ag.a), &ag.b, &r.a12(), &r.a22(), &ag.d_s, &r.dm_reduced))
    });
    let cm = f.design.observer.agents[0].canonical.as_ref().expect("UNIFIED agents carry a canonical form");
    let weights = f.design.observer.weights;
    c.bench_function("filter_are/example1", |b| {
        b.iter(|| solve_filter_are(black_box(&cm.acal()), &cm.ccal(), &weights))
    });
}

fn graphs(c: &mut Criterion) {
    c.bench_function("graphs/classify_and_switching", |b| {
        b.iter(|| {
            let set = classify_topologies(example_graphs(), Some(0.1)).unwrap();
            verify_switching_assumptions(black_box(&example_schedule()), &set).unwrap()
        })
    });
}

fn synthesis(c: &mut Criterion) {
    for name in ["example1", "example2", "example3"] {
        let s = coreg_core::preset(name).unwrap();
        c.bench_function(&format!("synthesize/{name}"), |b| b.iter(|| black_box(&s).synthesize().unwrap()));
    }
}

fn simulation(c: &mut Criterion) {
    let f = fixture("example1");
    c.bench_function("rk4_operator/example1", |b| {
        b.iter(|| rk4_operator(black_box(&f.closed_loop.drifts[0]), 1e-3))
    });
    let config = SimConfig {
        horizon: 20.0,
        ..SimConfig::default()
    };
    let mut group = c.benchmark_group("integrate");
    group.sample_size(10);
    group.bench_function("example1_20s", |b| {
        b.iter(|| integrate(black_box(&f.closed_loop), &f.scenario.schedule, &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, linalg, graphs, synthesis, simulation);
criterion_main!(benches);
