//! Multi-label evaluation: mean average precision, Hamming loss and macro F1,
//! plus the four validation experiments.
//!
//! Average precision uses the non-interpolated threshold sweep: for each
//! distinct score `s`, in descending order, the prediction set is every item
//! scoring at least `s`, and `AP = Σ (R_k − R_{k−1}) · P_k`. Tied scores enter
//! together, so the result does not depend on item order. Classes without gold
//! positives are skipped by mAP; F1 with a zero denominator counts as 0.

mod experiment;
mod gold;

use serde::Serialize;

use crate::classify::threshold;
use crate::emotion::{Emotion, EmotionLabels, EmotionScores, NUM_EMOTIONS};

pub use experiment::{
    experiment_texts, run_experiment, ExperimentBackends, ExperimentError, ExperimentId,
    ExperimentOutcome, ReportFile, ReportProvenance,
};
pub use gold::{read_gold_csv, read_gold_from_reader, write_gold_csv, GoldError, GoldRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("no class has a gold positive; mean average precision is undefined")]
    NoPositivesAnywhere,
}

/// Scores and gold labels for one validation tweet.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPair {
    pub tweet_id: String,
    pub scores: EmotionScores,
    pub gold: EmotionLabels,
}

/// Threshold-sweep average precision; `None` when `gold` has no positive.
///
/// Panics if the slices differ in length.
pub fn average_precision(scores: &[f64], gold: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), gold.len(), "scores and gold must align");
    let positives = gold.iter().filter(|&&g| g).count();
    if positives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let total = positives as f64;
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    let mut tp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            tp += usize::from(gold[order[i]]);
            i += 1;
        }
        let recall = tp as f64 / total;
        let precision = tp as f64 / i as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Some(ap)
}

fn column(pairs: &[EvalPair], e: Emotion) -> (Vec<f64>, Vec<bool>) {
    pairs.iter().map(|p| (p.scores.get(e), p.gold.get(e))).unzip()
}

pub fn per_class_average_precision(pairs: &[EvalPair]) -> [Option<f64>; NUM_EMOTIONS] {
    Emotion::ALL.map(|e| {
        let (scores, gold) = column(pairs, e);
        average_precision(&scores, &gold)
    })
}

/// Mean of the per-class APs that exist.
pub fn mean_average_precision(pairs: &[EvalPair]) -> Result<f64, MetricsError> {
    mean_present(&per_class_average_precision(pairs)).ok_or(MetricsError::NoPositivesAnywhere)
}

fn mean_present(values: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

/// Fraction of mismatched label cells after thresholding at `tau`.
pub fn hamming_loss(pairs: &[EvalPair], tau: f64) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyEvaluation);
    }
    let wrong: usize = pairs
        .iter()
        .map(|p| {
            let predicted = threshold(&p.scores, tau);
            predicted.0.iter().zip(p.gold.0).filter(|(a, b)| **a != *b).count()
        })
        .sum();
    Ok(wrong as f64 / (pairs.len() * NUM_EMOTIONS) as f64)
}

/// Per-class confusion counts at `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    /// `2TP / (2TP + FP + FN)`, 0 when the denominator is 0.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }

    pub fn recall(&self) -> Option<f64> {
        let pos = self.tp + self.fn_;
        (pos > 0).then(|| self.tp as f64 / pos as f64)
    }
}

pub fn confusion(pairs: &[EvalPair], tau: f64) -> [Confusion; NUM_EMOTIONS] {
    let mut out = [Confusion::default(); NUM_EMOTIONS];
    for p in pairs {
        let predicted = threshold(&p.scores, tau);
        for (c, slot) in out.iter_mut().enumerate() {
            match (predicted.0[c], p.gold.0[c]) {
                (true, true) => slot.tp += 1,
                (true, false) => slot.fp += 1,
                (false, true) => slot.fn_ += 1,
                (false, false) => slot.tn += 1,
            }
        }
    }
    out
}

pub fn per_class_f1(pairs: &[EvalPair], tau: f64) -> [f64; NUM_EMOTIONS] {
    confusion(pairs, tau).map(|c| c.f1())
}

/// Unweighted mean of the six per-class F1 scores.
pub fn macro_f1(pairs: &[EvalPair], tau: f64) -> Result<f64, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyEvaluation);
    }
    Ok(per_class_f1(pairs, tau).iter().sum::<f64>() / NUM_EMOTIONS as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub experiment_id: u8,
    pub n: usize,
    pub map: f64,
    pub hamming: f64,
    pub macro_f1: f64,
    pub per_class_ap: [Option<f64>; NUM_EMOTIONS],
    pub per_class_f1: [f64; NUM_EMOTIONS],
}

/// All metrics on one set of pairs.
pub fn evaluate(pairs: &[EvalPair], tau: f64, experiment_id: u8) -> Result<MetricsReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyEvaluation);
    }
    let per_class_ap = per_class_average_precision(pairs);
    let map = mean_present(&per_class_ap).ok_or(MetricsError::NoPositivesAnywhere)?;
    let per_class_f1 = per_class_f1(pairs, tau);
    Ok(MetricsReport {
        experiment_id,
        n: pairs.len(),
        map,
        hamming: hamming_loss(pairs, tau)?,
        macro_f1: per_class_f1.iter().sum::<f64>() / NUM_EMOTIONS as f64,
        per_class_ap,
        per_class_f1,
    })
}
