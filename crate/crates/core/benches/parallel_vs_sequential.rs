use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use isolink::arrivals::ChannelParams;
use isolink::brownian::{estimate_hit_probability, Dimensions, GeometryParams, McConfig};
use isolink::modulation::{LinkSpec, Scheme};
use isolink::rate::{maximize_rate, SearchConfig};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let threads = rayon::current_num_threads();
    vec![
        ("1-thread", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("global", rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()),
    ]
}

fn threshold_search(c: &mut Criterion) {
    let link = LinkSpec::new(ChannelParams::table_hexose(1000.0, 100.0));
    let search = SearchConfig {
        coarse_intervals: 24,
        ..SearchConfig::default()
    };
    let mut group = c.benchmark_group("q_icsk_search");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| maximize_rate(Scheme::Q_ICSK, &link, &search).unwrap()))
        });
    }
    group.finish();
}

fn hitting_probability(c: &mut Criterion) {
    let geom = GeometryParams {
        distance: 16e-6,
        receiver_radius: 10e-6,
        dimensions: Dimensions::ThreeD,
    };
    let cfg = McConfig::for_symbol(5.9, 4000, 1);
    let mut group = c.benchmark_group("brownian_hits");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| estimate_hit_probability(&geom, 597.25e-12, &cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, threshold_search, hitting_probability);
criterion_main!(benches);
