//! Parallel kernels on the default rayon pool against a one-thread pool.
//! Build with `--no-default-features` to time the sequential fallback itself.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use elimkit::families::pn_specialized;
use elimkit::harness::{independence_rank, robustness_probe, Probe, RankField, CERT_PRIME};
use elimkit::ring::{rat, rat_frac};
use elimkit::sequences::{is_identification_sequence, sample_points, ClassEnum};
use num_bigint::BigUint;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn kernels(c: &mut Criterion) {
    let pools = pools();
    let u: Vec<_> = (1..=9).map(|i| rat_frac(i, i + 1)).collect();
    let class = ClassEnum::linear("Y", -6, 6);
    let gamma = sample_points(40, 1, &BigUint::from(1000u32), 3);

    let mut g = c.benchmark_group("rank_mod_p_n8");
    g.sample_size(10);
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| independence_rank(8, RankField::Prime { p: CERT_PRIME }).unwrap()))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("pn_specialized_n9");
    g.sample_size(10);
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| pn_specialized(9, &rat(2), &u).unwrap()))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("fiber_probe_d12");
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| robustness_probe(&Probe::Paradigm1 { d: 12, p: 10_009 }).unwrap()))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("identification_linear_class");
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| is_identification_sequence(&gamma, &class).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
