//! Brute-force metric definitions used as test oracles. Written without
//! sorting so they share no code path with the library.

use emomon_core::classify::classify_linear;
use emomon_core::train::{wbce_gradient, wbce_loss, ClassWeights, LinearModel};
use emomon_core::{EmotionLabels, EmotionScores};

pub const CLASSES: usize = 6;
const CLAMP: f64 = 1e-7;

/// Mean over gold positives `i` of `#{positives with s >= s_i} / #{items with s >= s_i}`.
pub fn average_precision(scores: &[f64], gold: &[bool]) -> Option<f64> {
    let positives: Vec<usize> = (0..gold.len()).filter(|&i| gold[i]).collect();
    if positives.is_empty() {
        return None;
    }
    let mut sum = 0.0;
    for &i in &positives {
        let mut at_or_above = 0usize;
        let mut hits = 0usize;
        for j in 0..scores.len() {
            if scores[j] >= scores[i] {
                at_or_above += 1;
                if gold[j] {
                    hits += 1;
                }
            }
        }
        sum += hits as f64 / at_or_above as f64;
    }
    Some(sum / positives.len() as f64)
}

pub fn mean_ap(scores: &[[f64; CLASSES]], gold: &[[bool; CLASSES]]) -> Option<f64> {
    let mut total = 0.0;
    let mut classes = 0;
    for c in 0..CLASSES {
        let s: Vec<f64> = scores.iter().map(|r| r[c]).collect();
        let g: Vec<bool> = gold.iter().map(|r| r[c]).collect();
        if let Some(ap) = average_precision(&s, &g) {
            total += ap;
            classes += 1;
        }
    }
    (classes > 0).then(|| total / classes as f64)
}

pub fn hamming(scores: &[[f64; CLASSES]], gold: &[[bool; CLASSES]], tau: f64) -> f64 {
    let mut wrong = 0;
    for (s, g) in scores.iter().zip(gold) {
        for c in 0..CLASSES {
            if (s[c] >= tau) != g[c] {
                wrong += 1;
            }
        }
    }
    wrong as f64 / (scores.len() * CLASSES) as f64
}

pub fn macro_f1(scores: &[[f64; CLASSES]], gold: &[[bool; CLASSES]], tau: f64) -> f64 {
    let mut sum = 0.0;
    for c in 0..CLASSES {
        let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for (s, g) in scores.iter().zip(gold) {
            match (s[c] >= tau, g[c]) {
                (true, true) => tp += 1.0,
                (true, false) => fp += 1.0,
                (false, true) => fn_ += 1.0,
                _ => {}
            }
        }
        let denom = 2.0 * tp + fp + fn_;
        sum += if denom == 0.0 { 0.0 } else { 2.0 * tp / denom };
    }
    sum / CLASSES as f64
}

fn loss_at(model: &LinearModel, batch: &[(&[f64], EmotionLabels)], w: &ClassWeights) -> f64 {
    let scores: Vec<EmotionScores> = batch.iter().map(|(v, _)| classify_linear(model, v).unwrap()).collect();
    let labels: Vec<EmotionLabels> = batch.iter().map(|(_, y)| *y).collect();
    wbce_loss(&scores, &labels, w, CLAMP).unwrap()
}

/// Largest component-wise relative error between the analytic gradient and
/// central differences with step `h`.
pub fn finite_difference_error(model: &LinearModel, batch: &[(&[f64], EmotionLabels)], w: &ClassWeights, h: f64) -> f64 {
    let analytic = wbce_gradient(model, batch, w, CLAMP).unwrap();
    let analytic: Vec<f64> = analytic.iter().collect();
    let dim = model.dim();
    let mut flat: Vec<f64> = model.weights().to_vec();
    flat.extend_from_slice(model.bias());
    let rebuild = |params: &[f64]| {
        let mut bias = [0.0; 6];
        bias.copy_from_slice(&params[6 * dim..]);
        LinearModel::from_flat(dim, params[..6 * dim].to_vec(), bias).unwrap()
    };
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let mut plus = flat.clone();
        plus[i] += h;
        let mut minus = flat.clone();
        minus[i] -= h;
        let numeric = (loss_at(&rebuild(&plus), batch, w) - loss_at(&rebuild(&minus), batch, w)) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-7);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}
