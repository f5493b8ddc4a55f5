use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sqkd_core::device::{ChannelParams, DeviceChainParams, Preset};
use sqkd_core::protocol::{generate_codebook_with, simulate_transmission, BasisMode};
use sqkd_core::security::asymptotic_key;
use sqkd_core::Execution;

fn transmission(c: &mut Criterion) {
    let chain = DeviceChainParams::preset(Preset::Run1);
    let channel = ChannelParams::experiment(0.01).unwrap();
    let var = chain.codebook_variance().unwrap();
    let mut group = c.benchmark_group("transmission");
    for n in [16_665usize, 200_000] {
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &n, |b, &n| {
                b.iter(|| {
                    let cb = generate_codebook_with(n, var, 1, exec).unwrap();
                    simulate_transmission(&cb, &chain, &channel, 2, BasisMode::Sift, exec).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn key_sweep(c: &mut Criterion) {
    let chain = DeviceChainParams::preset(Preset::Run2);
    let grid: Vec<f64> = (0..200).map(|i| i as f64 * 5e-4).collect();
    let mut group = c.benchmark_group("key_sweep");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| {
                exec.map_slice(&grid, |&n| {
                    asymptotic_key(&chain, &ChannelParams::experiment(n).unwrap()).unwrap()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, transmission, key_sweep);
criterion_main!(benches);
