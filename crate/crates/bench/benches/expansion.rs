use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use readk_bench::two_pass;
use readk_core::composite::build_read_k_generator;
use readk_core::inw::build_inw;
use readk_core::{BitString, Generator, InwMode, Workspace};

fn bench_generator(c: &mut Criterion, name: &str, g: &dyn Generator) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let seed = BitString::random(g.seed_len(), &mut rng);
    let mut out = vec![false; g.output_len()];
    let mut ws = Workspace::new();
    let mut group = c.benchmark_group("expand");
    group.throughput(Throughput::Elements(g.output_len() as u64));
    group.bench_function(BenchmarkId::from_parameter(name), |b| {
        b.iter(|| {
            g.expand_with(black_box(&seed), &mut out, &mut ws);
            out[0]
        })
    });
    group.finish();
}

fn inw(c: &mut Criterion) {
    for mode in [InwMode::Expander, InwMode::Hash, InwMode::toy()] {
        let g = build_inw(1 << 12, 4, 4, 0.1, mode).expect("valid parameters");
        bench_generator(c, &format!("inw_{}_4096", mode.name()), &g);
    }
}

fn read_k(c: &mut Criterion) {
    let s = two_pass(4096, 5);
    let g = build_read_k_generator(&s, 4, 0.1, InwMode::Expander).expect("valid parameters");
    bench_generator(c, "read_k_expander_4096", &g);
}

criterion_group!(benches, inw, read_k);
criterion_main!(benches);
