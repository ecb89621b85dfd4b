use crate::train::{Gradient, LinearModel, TrainConfig};

/// First/second moment estimates over the flattened `(W, b)` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(model: &LinearModel) -> Self {
        let n = model.weights().len() + model.bias().len();
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(state: &mut AdamState, grad: &Gradient, cfg: &TrainConfig, model: &mut LinearModel) {
    let (weights, bias) = model.params_mut();
    debug_assert_eq!(state.m.len(), weights.len() + bias.len());
    debug_assert_eq!(grad.weights.len(), weights.len());

    state.t += 1;
    let t = state.t as i32;
    let m_correction = 1.0 - cfg.beta1.powi(t);
    let v_correction = 1.0 - cfg.beta2.powi(t);

    let params = weights.iter_mut().chain(bias.iter_mut());
    for (((theta, g), m), v) in params.zip(grad.iter()).zip(&mut state.m).zip(&mut state.v) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / m_correction;
        let v_hat = *v / v_correction;
        *theta -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}
