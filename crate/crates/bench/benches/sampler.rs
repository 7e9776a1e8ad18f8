use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pa_bench::grown_degrees;
use pa_core::engine::DegreeSampler;
use pa_core::seeding::rng_from_seed;

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampler");
    for n in [1_000u64, 5_000] {
        let weights = grown_degrees(n, 1);
        let mut rng = rng_from_seed(2);
        let mut out = Vec::new();
        let mut s = DegreeSampler::from_weights(&weights);
        g.bench_with_input(BenchmarkId::new("with_replacement_n_draws", n), &n, |b, &n| {
            b.iter(|| {
                out.clear();
                s.sample_with_replacement(n as usize, &mut rng, &mut out).unwrap();
            })
        });
        g.bench_with_input(BenchmarkId::new("with_replacement_10_draws", n), &n, |b, _| {
            b.iter(|| {
                out.clear();
                s.sample_with_replacement(10, &mut rng, &mut out).unwrap();
            })
        });
        g.bench_with_input(BenchmarkId::new("without_replacement_n_half", n), &n, |b, &n| {
            b.iter(|| {
                out.clear();
                s.sample_without_replacement(n as usize / 2, &mut rng, &mut out)
                    .unwrap();
            })
        });
        g.bench_with_input(BenchmarkId::new("rebuild", n), &n, |b, _| {
            b.iter(|| s.rebuild(&weights))
        });
    }
    g.finish();
}

criterion_group!(benches, sampling);
criterion_main!(benches);
