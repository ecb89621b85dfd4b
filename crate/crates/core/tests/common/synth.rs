//! Seeded synthetic corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emomon_core::emotion::EmotionLabels;
use emomon_core::train::TrainingExample;

pub const SCOPES: [&str; 3] = ["medellin", "bogota", "alcaldiamed"];
pub const KEYWORDS: &str = "# outbreak terms\ncovid\ncuarentena\nvirus\npandemia\n";

const FILLER: [&str; 16] = [
    "hoy", "la", "ciudad", "en", "casa", "todo", "bien", "muy", "con", "mucho", "gente", "calle",
    "noticias", "alcaldia", "vacuna", "hospital",
];
const EMOTIVE: [&str; 12] = [
    "alegría", "feliz", "triste", "tristeza", "miedo", "temor", "rabia", "odio", "sorpresa",
    "increíble", "asco", "qué asco",
];
const KEYWORD_FORMS: [&str; 5] = ["COVID", "#cuarentena", "virus", "pandemia", "Cuarentena"];

fn text(rng: &mut ChaCha8Rng) -> String {
    let mut words: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(3..12) {
        words.push(FILLER.choose(rng).unwrap().to_string());
    }
    for _ in 0..rng.gen_range(0..3) {
        words.push(EMOTIVE.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.9) {
        words.push(KEYWORD_FORMS.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.2) {
        words.push("https://t.co/abc".into());
    }
    if rng.gen_bool(0.2) {
        words.push(format!("@user{}", rng.gen_range(0..50)));
    }
    words.shuffle(rng);
    if rng.gen_bool(0.3) {
        words.push("!!".into());
    }
    words.join(" ")
}

/// `n` tweet-like texts.
pub fn texts(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| text(&mut rng)).collect()
}

/// `n` ndjson lines. About 2% are duplicate ids, 1% malformed and 2%
/// declare a non-Spanish language.
pub fn tweet_lines(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines: Vec<String> = Vec::with_capacity(n);
    for i in 0..n {
        let roll: f64 = rng.gen();
        if roll < 0.01 {
            lines.push("{\"id\": 12, \"text\": ".into());
            continue;
        }
        if roll < 0.03 && !lines.is_empty() {
            let j = rng.gen_range(0..lines.len());
            lines.push(lines[j].clone());
            continue;
        }
        let secs = rng.gen_range(0..31 * 86_400);
        let ts = chrono::DateTime::from_timestamp(1_596_240_000 + secs, 0).unwrap();
        let lang = if roll < 0.05 { ",\"lang\":\"en\"" } else if roll < 0.5 { ",\"lang\":\"es\"" } else { "" };
        let record = serde_json::json!({
            "id": format!("t{i:06}"),
            "created_at": ts.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            "text": text(&mut rng),
            "user": format!("persona{}", rng.gen_range(0..400)),
            "scope": SCOPES.choose(&mut rng).unwrap(),
        });
        let mut line = record.to_string();
        line.insert_str(line.len() - 1, lang);
        lines.push(line);
    }
    lines
}

/// Linearly separable examples: `labels_c = (W*_c · v + b*_c > 0)` with
/// `v` uniform in `[-1, 1]^dim`.
pub fn separable(n: usize, dim: usize, seed: u64) -> Vec<TrainingExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: Vec<Vec<f64>> = (0..6).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let bias: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.2..0.2)).collect();
    (0..n)
        .map(|i| {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut labels = [false; 6];
            for c in 0..6 {
                let z: f64 = planted[c].iter().zip(&v).map(|(w, x)| w * x).sum::<f64>() + bias[c];
                labels[c] = z > 0.0;
            }
            TrainingExample { tweet_id: format!("s{i:04}"), v, labels: EmotionLabels(labels) }
        })
        .collect()
}
