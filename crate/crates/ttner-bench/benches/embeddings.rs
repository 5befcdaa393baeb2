use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use std::hint::black_box;
use ttner_bench::embedding_corpus;
use ttner_core::embeddings::{sgns_loss_and_grads, train_skipgram, SgnsConfig};

fn bench_sgns_step(c: &mut Criterion) {
    let dim = 200;
    let center: Vec<f64> = (0..dim).map(|i| (i as f64 * 0.37).sin() * 0.5).collect();
    let context: Vec<f64> = (0..dim).map(|i| (i as f64 * 0.73).cos() * 0.5).collect();
    let negatives: Vec<Vec<f64>> = (0..5)
        .map(|n| {
            (0..dim)
                .map(|i| ((n * dim + i) as f64 * 0.11).sin() * 0.5)
                .collect()
        })
        .collect();
    let neg_refs: Vec<&[f64]> = negatives.iter().map(Vec::as_slice).collect();
    c.bench_function("sgns_loss_and_grads dim=200 neg=5", |b| {
        b.iter(|| {
            sgns_loss_and_grads(
                black_box(&center),
                black_box(&context),
                black_box(&neg_refs),
            )
        })
    });
}

fn bench_skipgram_training(c: &mut Criterion) {
    let corpus = embedding_corpus(30_000);
    let tokens: usize = corpus.iter().map(Vec::len).sum();
    let mut group = c.benchmark_group("skipgram");
    group.throughput(Throughput::Elements(tokens as u64));
    group.sample_size(10);
    group.bench_function("train 30k tokens dim=32 1 epoch", |b| {
        let config = SgnsConfig {
            dim: 32,
            epochs: 1,
            ..SgnsConfig::default()
        };
        b.iter(|| train_skipgram(black_box(&corpus), &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_sgns_step, bench_skipgram_training);
criterion_main!(benches);
