use b92link::b92::{alice_generate, channel_detect, DetectorModel, PulseSource};
use b92link::exec::Execution;
use b92link::sim::{sweep, Scenario};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn detect(c: &mut Criterion) {
    let src = PulseSource::default();
    let det = DetectorModel::default();
    let mut group = c.benchmark_group("channel_detect");
    group.sample_size(10);
    for n in [1usize << 18, 1 << 21, 1 << 23] {
        let alice = alice_generate(n, 1, Execution::Parallel).unwrap();
        group.throughput(Throughput::Elements(n as u64));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| channel_detect(&alice, 0.25, 4e3, &det, &src, None, 2, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn background_sweep(c: &mut Criterion) {
    let s = Scenario {
        slots: 1_000_000,
        ..Scenario::default()
    };
    let values: Vec<f64> = (0..8).map(|i| i as f64 / 40.0).collect();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| sweep(&s, "background.sky_radiance", &values, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, detect, background_sweep);
criterion_main!(benches);
