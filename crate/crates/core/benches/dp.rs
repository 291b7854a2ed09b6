//! Parallel against sequential execution of the main dynamic programs.
//!
//! With the default `parallel` feature every workload runs twice: on the
//! global rayon pool and inside a one-thread pool. Built with
//! `--no-default-features` the same workloads run on the sequential fallback.

use carathedyn_core::config::system;
use carathedyn_core::cover::critical_value;
use carathedyn_core::cylinder::CylinderSet;
use carathedyn_core::oracle::flow_pressure;
use carathedyn_core::points::point_with_word;
use carathedyn_core::pushforward::{default_step, Plaque};
use carathedyn_core::two_sided::{default_depth_cap, m_values, Split};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn modes() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    if carathedyn_core::par::is_parallel() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        vec![("rayon", None), ("one_thread", Some(one))]
    } else {
        vec![("sequential", None)]
    }
}

fn in_mode<R: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> R + Send) -> R {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn bench(c: &mut Criterion) {
    let gold = system("GOLD");
    let bern = system("BERN13");
    let p_bern = flow_pressure(&bern).unwrap();
    let sets: Vec<CylinderSet> = bern
        .sft
        .admissible_words(5)
        .into_iter()
        .map(|w| CylinderSet::new(-2, w))
        .collect();
    let cap = default_depth_cap(&bern, 10.0);
    let anchor = point_with_word(&bern, -2, &[0, 1, 0], 0.0).unwrap();
    let plaque = Plaque::new(&bern, p_bern, anchor).unwrap();
    let z = CylinderSet::new(0, vec![0, 1]);
    let step = default_step(&bern);

    let mut g = c.benchmark_group("dp");
    g.sample_size(10);
    for (mode, pool) in modes() {
        g.bench_function(BenchmarkId::new("critical_value_gold", mode), |b| {
            b.iter(|| in_mode(&pool, || critical_value(&gold, black_box(&[10.0, 14.0, 18.0]), 40).unwrap()))
        });
        g.bench_function(BenchmarkId::new("two_sided_m_values_bern13", mode), |b| {
            b.iter(|| in_mode(&pool, || m_values(&bern, p_bern, black_box(&sets), 10.0, cap, Split::Free).unwrap()))
        });
        g.bench_function(BenchmarkId::new("nu_t_bern13", mode), |b| {
            b.iter(|| in_mode(&pool, || plaque.nu_t(black_box(&z), 40.0, step).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
