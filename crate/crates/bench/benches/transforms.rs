use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use fofdm_bench::random_block;
use fofdm_core::transforms::Dct;
use std::hint::black_box;

fn bench_dct(c: &mut Criterion) {
    let mut g = c.benchmark_group("dct");
    for &n in &[256usize, 1024, 4096] {
        let plan = Dct::new(n).unwrap();
        let data = random_block(n, n as u64);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("forward", n), &n, |b, _| {
            b.iter(|| {
                let mut work = data.clone();
                plan.forward_in_place(black_box(&mut work));
                work
            })
        });
        g.bench_with_input(BenchmarkId::new("inverse", n), &n, |b, _| {
            b.iter(|| {
                let mut work = data.clone();
                plan.inverse_in_place(black_box(&mut work));
                work
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_dct);
criterion_main!(benches);
