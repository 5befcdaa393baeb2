use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use std::hint::black_box;
use ttner_bench::tagging_corpus;
use ttner_core::tagger::{extract_features, tag, train, FeatureOptions, TagHistory, TaggerConfig};

fn bench_feature_extraction(c: &mut Criterion) {
    let corpus = tagging_corpus(50);
    let options = FeatureOptions::default();
    c.bench_function("extract_features per sentence", |b| {
        b.iter(|| {
            for sentence in &corpus {
                let mut predictions = Vec::with_capacity(sentence.len());
                for i in 0..sentence.len() {
                    let history = TagHistory::at(&predictions, i);
                    let fv =
                        extract_features(black_box(sentence), i, &history, None, &options).unwrap();
                    black_box(&fv);
                    predictions.push(ttner_core::encoding::Tag::Outside);
                }
            }
        })
    });
}

fn bench_training(c: &mut Criterion) {
    let corpus = tagging_corpus(500);
    let tokens: usize = corpus.iter().map(|s| s.len()).sum();
    let mut group = c.benchmark_group("perceptron");
    group.throughput(Throughput::Elements(tokens as u64));
    group.sample_size(10);
    group.bench_function("train 500 sentences 1 epoch", |b| {
        let config = TaggerConfig {
            epochs: 1,
            ..TaggerConfig::default()
        };
        b.iter(|| train(black_box(&corpus), &config, None).unwrap())
    });
    group.finish();
}

fn bench_tagging(c: &mut Criterion) {
    let corpus = tagging_corpus(600);
    let (train_set, test_set) = corpus.split_at(500);
    let model = train(
        train_set,
        &TaggerConfig {
            epochs: 3,
            ..TaggerConfig::default()
        },
        None,
    )
    .unwrap();
    let tokens: usize = test_set.iter().map(|s| s.len()).sum();
    let mut group = c.benchmark_group("inference");
    group.throughput(Throughput::Elements(tokens as u64));
    group.bench_function("tag 100 sentences", |b| {
        b.iter(|| {
            for sentence in test_set {
                black_box(tag(&model, black_box(sentence), None));
            }
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_feature_extraction,
    bench_training,
    bench_tagging
);
criterion_main!(benches);
