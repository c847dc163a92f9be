use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hyplevel_core::{parse, trace, LevelProblem, TraceOptions};
use std::hint::black_box;

fn problems() -> Vec<(&'static str, LevelProblem)> {
    let scaled = |s: &str, r: f64| LevelProblem::scaled(parse(s).unwrap(), r).unwrap();
    let level = |s: &str, l: f64| LevelProblem::new(parse(s).unwrap(), l).unwrap();
    vec![
        ("falpha_r07", scaled("falpha(0.9238795325112867)", 0.7)),
        ("kalpha_phi_r07", scaled("compose(kalpha(0.6),phi(0.3,0.1))", 0.7)),
        ("blaschke_l15", level("smul(0.8,0,blaschke([(0.4,0.2,1),(-0.3,0.5,1)];1,0))", 1.5)),
        ("mobius_arc_l12", level("phi(0.5,0)", 1.2)),
    ]
}

fn bench_trace(c: &mut Criterion) {
    let opts = TraceOptions::default();
    let mut group = c.benchmark_group("trace");
    for (name, p) in problems() {
        let seed = p.find_boundary_seed().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| {
            b.iter(|| trace(black_box(p), seed, &opts).unwrap())
        });
    }
    group.finish();
}

fn bench_seed(c: &mut Criterion) {
    let (_, p) = problems().swap_remove(0);
    c.bench_function("find_boundary_seed", |b| b.iter(|| black_box(&p).find_boundary_seed().unwrap()));
}

criterion_group!(benches, bench_trace, bench_seed);
criterion_main!(benches);
