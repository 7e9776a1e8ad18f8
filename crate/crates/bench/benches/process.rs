use criterion::{criterion_group, criterion_main, Criterion};
use pa_bench::linear_config;
use pa_core::engine::{Process, Variant};
use pa_core::rado::{er_generate, ErConfig};
use pa_core::seeding::rng_from_seed;
use pa_core::{Rational, StorageMode};

fn runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("process");
    g.sample_size(10);
    let cases = [
        ("mpa_degrees_only_t2000", Variant::Mpa, StorageMode::DegreesOnly, 2000),
        ("gpa_degrees_only_t2000", Variant::Gpa, StorageMode::DegreesOnly, 2000),
        ("mpa_full_t1000", Variant::Mpa, StorageMode::Full, 1000),
    ];
    for (name, variant, storage, horizon) in cases {
        let base = Process::new(&linear_config(variant, horizon, storage, 0)).unwrap();
        let mut seed = 0;
        g.bench_function(name, |b| {
            b.iter(|| {
                seed += 1;
                let mut p = base.fork(seed);
                p.advance_to(horizon).unwrap();
                p.graph().total_edges()
            })
        });
    }
    let er = ErConfig::constant(500, Rational::new(1, 2));
    g.bench_function("er_generate_500", |b| {
        b.iter(|| er_generate(&er, &mut rng_from_seed(3)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, runs);
criterion_main!(benches);
