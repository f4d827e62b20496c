use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use diagweak_core::embed::{embed_text, fit_pca};
use diagweak_core::hdbscan::cluster;
use diagweak_core::textnorm::normalize;
use diagweak_core::{AbbreviationTable, EmbedderConfig, EmbeddingVector, HdbscanParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &[
    "bronchiolite", "broncospasmo", "febbre", "otite", "media", "acuta", "gastroenterite", "polmonite",
    "destra", "sinistra", "lieve", "grave", "disidratazione", "faringite", "tosse", "infezione",
];

fn strings(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.random_range(2..6);
            (0..len).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
        })
        .collect()
}

fn embedded(n: usize) -> Vec<EmbeddingVector> {
    let cfg = EmbedderConfig::default();
    let abbr = AbbreviationTable::empty();
    strings(n, 7).iter().map(|s| embed_text(&normalize(s, &abbr), &cfg).unwrap()).collect()
}

fn bench_embed(c: &mut Criterion) {
    let cfg = EmbedderConfig::default();
    let abbr = AbbreviationTable::empty();
    let tokens: Vec<_> = strings(500, 1).iter().map(|s| normalize(s, &abbr)).collect();
    c.bench_function("embed_500_strings", |b| {
        b.iter(|| tokens.iter().map(|t| embed_text(t, &cfg).unwrap()).collect::<Vec<_>>())
    });
}

fn bench_pca(c: &mut Criterion) {
    let mut group = c.benchmark_group("pca_k16");
    group.sample_size(10);
    for n in [200, 1000] {
        let vs = embedded(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &vs, |b, vs| b.iter(|| fit_pca(vs, 16).unwrap()));
    }
    group.finish();
}

fn bench_hdbscan(c: &mut Criterion) {
    let mut group = c.benchmark_group("hdbscan_16d");
    group.sample_size(10);
    for n in [200, 1000] {
        let vs = embedded(n);
        let pca = fit_pca(&vs, 16).unwrap();
        let points: Vec<Vec<f64>> = vs.iter().map(|v| diagweak_core::embed::project_pca(&pca, v).unwrap()).collect();
        let params = HdbscanParams::new(5, 5);
        group.bench_with_input(BenchmarkId::from_parameter(n), &points, |b, p| b.iter(|| cluster(p, &params).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_embed, bench_pca, bench_hdbscan);
criterion_main!(benches);
