use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use fofdm_bench::{random_bits, two_layer_ctx};
use fofdm_core::channel_metrics::{awgn, db_to_lin, layered_power_report};
use fofdm_core::conventional_rx::demodulate_conventional;
use fofdm_core::diversity_rx::demodulate_improved;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn bench_link(c: &mut Criterion) {
    let ctx = two_layer_ctx();
    let nbits = ctx.cfg.total_bits();
    let bits = random_bits(nbits, 3);
    let frame = ctx.build_frame(&bits).unwrap();
    let eb = layered_power_report(&ctx.cfg).eb_elec;
    let n0 = eb / db_to_lin(13.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let y = awgn(&frame.composite, n0, &mut rng);
    let ws = demodulate_conventional(&ctx, &y).unwrap();

    let mut g = c.benchmark_group("link");
    g.throughput(Throughput::Elements(nbits as u64));
    g.bench_function("build_frame", |b| {
        b.iter(|| ctx.build_frame(black_box(&bits)).unwrap())
    });
    g.bench_function("demod_conventional", |b| {
        b.iter(|| demodulate_conventional(&ctx, black_box(&y)).unwrap())
    });
    g.bench_function("demod_improved", |b| {
        b.iter(|| demodulate_improved(&ctx, black_box(&ws), &[0.48, 0.48]).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_link);
criterion_main!(benches);
