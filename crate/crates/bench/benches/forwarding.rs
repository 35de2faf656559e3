use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

use icnsim::icn::{decode, encode};
use icnsim_bench::{bed, chunk_name, data, interest, packets};

fn codec(c: &mut Criterion) {
    let pkts = packets(256);
    let wires: Vec<Vec<u8>> = pkts.iter().map(|p| encode(p).unwrap()).collect();
    let mut g = c.benchmark_group("codec");
    g.throughput(Throughput::Elements(pkts.len() as u64));
    g.bench_function("encode", |b| b.iter(|| pkts.iter().map(|p| encode(black_box(p)).unwrap().len()).sum::<usize>()));
    g.bench_function("decode", |b| b.iter(|| wires.iter().map(|w| decode(black_box(w)).is_ok() as usize).sum::<usize>()));
    g.finish();
}

fn fib(c: &mut Criterion) {
    let mut g = c.benchmark_group("fib_lookup");
    for routes in [16, 1024] {
        let bed = bed(routes, 0);
        let names: Vec<_> = (0..1024).map(|i| chunk_name(i, routes)).collect();
        g.throughput(Throughput::Elements(names.len() as u64));
        g.bench_function(format!("{routes}_routes"), |b| {
            b.iter(|| names.iter().filter(|n| bed.forwarder.fib_lookup(black_box(n)).is_some()).count())
        });
    }
    g.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipeline");
    let n = 512;
    g.throughput(Throughput::Elements(n));
    g.bench_function("interest_data_miss", |b| {
        b.iter_batched(
            || bed(16, 1 << 20),
            |mut bed| {
                for i in 0..n {
                    bed.forwarder.on_interest(bed.down, interest(i, 16), i).unwrap();
                    bed.forwarder.on_data(bed.up, data(i, 16), i).unwrap();
                }
                bed
            },
            BatchSize::SmallInput,
        )
    });
    g.bench_function("cache_hit", |b| {
        let mut warm = bed(16, 1 << 20);
        for i in 0..n {
            warm.forwarder.on_interest(warm.down, interest(i, 16), 0).unwrap();
            warm.forwarder.on_data(warm.up, data(i, 16), 0).unwrap();
        }
        let mut nonce = 1u32 << 20;
        b.iter(|| {
            for i in 0..n {
                nonce = nonce.wrapping_add(1);
                let mut it = interest(i, 16);
                it.nonce = nonce;
                black_box(warm.forwarder.on_interest(warm.down, it, 1).unwrap());
            }
        })
    });
    g.finish();
}

criterion_group!(benches, codec, fib, pipeline);
criterion_main!(benches);
