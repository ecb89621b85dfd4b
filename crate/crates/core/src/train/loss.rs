use crate::classify::sigmoid;
use crate::emotion::{Emotion, EmotionLabels, EmotionScores, NUM_EMOTIONS};
use crate::train::{LinearModel, TrainError};

/// Per-class multiplier on the positive term of the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassWeights(pub [f64; NUM_EMOTIONS]);

impl ClassWeights {
    pub const ONES: ClassWeights = ClassWeights([1.0; NUM_EMOTIONS]);
}

/// `w_c = (n − P_c) / P_c`.
///
/// A class with `P_c = n` would get weight 0; it is floored at the smallest
/// positive `f64` so every weight stays strictly positive.
pub fn class_weights(pos_counts: &[usize; NUM_EMOTIONS], n: usize) -> Result<ClassWeights, TrainError> {
    if n == 0 {
        return Err(TrainError::EmptyDataset);
    }
    let mut w = [0.0; NUM_EMOTIONS];
    for (c, (&p, slot)) in pos_counts.iter().zip(w.iter_mut()).enumerate() {
        if p == 0 {
            return Err(TrainError::ClassWithoutPositives(Emotion::ALL[c]));
        }
        if p > n {
            return Err(TrainError::InvalidConfig(format!(
                "{} has {p} positives out of {n} examples",
                Emotion::ALL[c]
            )));
        }
        *slot = ((n - p) as f64 / p as f64).max(f64::MIN_POSITIVE);
    }
    Ok(ClassWeights(w))
}

fn clamp_prob(p: f64, clamp: f64) -> f64 {
    p.clamp(clamp, 1.0 - clamp)
}

/// Loss contribution of one cell before averaging.
pub fn wbce_term(p: f64, y: bool, w: f64, clamp: f64) -> f64 {
    let p = clamp_prob(p, clamp);
    if y {
        -w * p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Mean over all `N·6` cells of the weighted binary cross-entropy.
pub fn wbce_loss(
    scores: &[EmotionScores],
    labels: &[EmotionLabels],
    w: &ClassWeights,
    clamp: f64,
) -> Result<f64, TrainError> {
    if scores.len() != labels.len() {
        return Err(TrainError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if scores.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(s, y)| (0..NUM_EMOTIONS).map(|c| wbce_term(s.0[c], y.0[c], w.0[c], clamp)).sum::<f64>())
        .sum();
    Ok(total / (scores.len() * NUM_EMOTIONS) as f64)
}

/// Gradient with the same layout as [`LinearModel`] parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: [f64; NUM_EMOTIONS],
}

impl Gradient {
    pub fn zeros(dim: usize) -> Self {
        Self { weights: vec![0.0; NUM_EMOTIONS * dim], bias: [0.0; NUM_EMOTIONS] }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().chain(&self.bias).copied()
    }
}

/// Exact gradient of [`wbce_loss`] over `sigmoid(W v + b)` with respect to
/// `W` and `b`. Where the clamp is active the loss is flat, so those cells
/// contribute nothing.
pub fn wbce_gradient(
    model: &LinearModel,
    batch: &[(&[f64], EmotionLabels)],
    w: &ClassWeights,
    clamp: f64,
) -> Result<Gradient, TrainError> {
    if batch.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let dim = model.dim();
    let mut grad = Gradient::zeros(dim);
    let scale = 1.0 / (batch.len() * NUM_EMOTIONS) as f64;
    for (v, y) in batch {
        if v.len() != dim {
            return Err(TrainError::DimensionMismatch { expected: dim, got: v.len() });
        }
        let z = model.logits(v);
        for c in 0..NUM_EMOTIONS {
            let p = sigmoid(z[c]);
            if p < clamp || p > 1.0 - clamp {
                continue;
            }
            // d/dz of −[w y ln p + (1 − y) ln(1 − p)]
            let dz = if y.0[c] { -w.0[c] * (1.0 - p) } else { p } * scale;
            grad.bias[c] += dz;
            let row = &mut grad.weights[c * dim..(c + 1) * dim];
            for (g, x) in row.iter_mut().zip(v.iter()) {
                *g += dz * x;
            }
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        let w = class_weights(&[50; 6], 100).unwrap();
        assert_eq!(w.0, [1.0; 6]);
        let w = class_weights(&[10, 50, 50, 50, 50, 50], 100).unwrap();
        assert_eq!(w.0[0], 9.0);
        assert!(matches!(
            class_weights(&[0, 1, 1, 1, 1, 1], 100),
            Err(TrainError::ClassWithoutPositives(Emotion::Joy))
        ));
        assert!(class_weights(&[100; 6], 100).unwrap().0.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn loss_examples() {
        assert!((wbce_term(0.5, true, 1.0, 1e-7) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((wbce_term(0.8, true, 3.0, 1e-7) - 0.669431).abs() < 1e-6);

        let clamp = 1e-7;
        let labels = [EmotionLabels([true, false, true, false, false, true])];
        let perfect = [labels[0].as_scores()];
        let loss = wbce_loss(&perfect, &labels, &ClassWeights::ONES, clamp).unwrap();
        assert!(loss > 0.0 && loss <= 6.0 * -(1.0 - clamp).ln());

        assert!(matches!(
            wbce_loss(&perfect, &[], &ClassWeights::ONES, clamp),
            Err(TrainError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gradient_at_origin() {
        let model = LinearModel::zeros(3).unwrap();
        let v = [0.3, -1.0, 2.0];
        let g = wbce_gradient(&model, &[(&v, EmotionLabels([true; 6]))], &ClassWeights::ONES, 1e-7)
            .unwrap();
        for c in 0..6 {
            assert!((g.bias[c] - (0.5 - 1.0) / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_input_kills_weight_gradient() {
        let model = LinearModel::from_flat(2, vec![0.7; 12], [0.4, -0.2, 1.0, 0.0, -3.0, 2.0]).unwrap();
        let v = [0.0, 0.0];
        let g = wbce_gradient(&model, &[(&v, EmotionLabels([true; 6]))], &ClassWeights::ONES, 1e-7)
            .unwrap();
        assert!(g.weights.iter().all(|&x| x == 0.0));
        assert!(matches!(
            wbce_gradient(&model, &[(&[1.0][..], EmotionLabels::NONE)], &ClassWeights::ONES, 1e-7),
            Err(TrainError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
