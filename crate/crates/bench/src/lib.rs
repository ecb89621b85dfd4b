//! Fixed inputs shared by the benchmarks in `benches/`.

use std::path::PathBuf;

use emomon_core::metrics::EvalPair;
use emomon_core::{EmotionLabels, EmotionScores};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 16] = [
    "la", "cuarentena", "¡qué", "alegría!", "tristeza", "miedo", "rabia", "Medellín", "covid", "hoy",
    "increíble", "asco", "#QuedateEnCasa", "@alcaldia", "https://t.co/abc", "¿por",
];

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

pub fn sample_texts(n: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(4..30);
            (0..len).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
        })
        .collect()
}

pub fn sample_pairs(n: usize) -> Vec<EvalPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n)
        .map(|i| EvalPair {
            tweet_id: i.to_string(),
            scores: EmotionScores(std::array::from_fn(|_| rng.gen())),
            gold: EmotionLabels(std::array::from_fn(|_| rng.gen_bool(0.3))),
        })
        .collect()
}
