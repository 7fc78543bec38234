use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cx_bench::{case_session, delay_chain, toggling_input, CASE_FORMULA, CASE_MODEL, CASE_TRACE};
use cx_core::api::Session;
use cx_core::sim::extend_trace;
use cx_core::Target;
use std::hint::black_box;

fn chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("delay_chain");
    for n in [10, 50, 200] {
        let (d, out) = delay_chain(n);
        let ext = extend_trace(&d, &toggling_input(n), n).unwrap();
        group.bench_with_input(BenchmarkId::new("explain", n), &n, |b, &n| {
            b.iter(|| cx_core::explain(&d, &ext, &Target::global(out, n)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("simulate", n), &n, |b, &n| {
            b.iter(|| extend_trace(&d, black_box(&toggling_input(n)), n).unwrap())
        });
    }
    group.finish();
}

fn case_study(c: &mut Criterion) {
    c.bench_function("case_study/load", |b| {
        b.iter(|| Session::load(black_box(CASE_MODEL), CASE_TRACE, Some(CASE_FORMULA.trim())).unwrap())
    });
    let s = case_session();
    c.bench_function("case_study/explain_mode_b", |b| {
        b.iter(|| s.explain("mode_b", None, black_box(3), None).unwrap())
    });
    c.bench_function("case_study/explain_formula", |b| {
        b.iter(|| s.explain_formula(black_box(0)).unwrap())
    });
}

criterion_group!(benches, chain, case_study);
criterion_main!(benches);
