use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::emotion::NUM_EMOTIONS;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("model dimension must be at least 1")]
    ZeroDimension,
    #[error("expected {expected} values in {what}, got {got}")]
    Shape { what: &'static str, expected: usize, got: usize },
    #[error("model contains a non-finite parameter")]
    NonFinite,
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format: {0}")]
    Format(#[from] serde_json::Error),
}

/// One-vs-rest logistic regression over `dim`-dimensional embeddings.
///
/// Weights are stored row-major, one row of length `dim` per emotion.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    dim: usize,
    weights: Vec<f64>,
    bias: [f64; NUM_EMOTIONS],
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension);
        }
        Ok(Self { dim, weights: vec![0.0; NUM_EMOTIONS * dim], bias: [0.0; NUM_EMOTIONS] })
    }

    pub fn from_flat(
        dim: usize,
        weights: Vec<f64>,
        bias: [f64; NUM_EMOTIONS],
    ) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension);
        }
        if weights.len() != NUM_EMOTIONS * dim {
            return Err(ModelError::Shape {
                what: "weights",
                expected: NUM_EMOTIONS * dim,
                got: weights.len(),
            });
        }
        if !weights.iter().chain(&bias).all(|x| x.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        Ok(Self { dim, weights, bias })
    }

    pub fn from_rows(rows: &[Vec<f64>], bias: &[f64]) -> Result<Self, ModelError> {
        if rows.len() != NUM_EMOTIONS {
            return Err(ModelError::Shape {
                what: "weight rows",
                expected: NUM_EMOTIONS,
                got: rows.len(),
            });
        }
        let dim = rows[0].len();
        let mut flat = Vec::with_capacity(NUM_EMOTIONS * dim);
        for row in rows {
            if row.len() != dim {
                return Err(ModelError::Shape { what: "weight row", expected: dim, got: row.len() });
            }
            flat.extend_from_slice(row);
        }
        let bias: [f64; NUM_EMOTIONS] = bias.try_into().map_err(|_| ModelError::Shape {
            what: "bias",
            expected: NUM_EMOTIONS,
            got: bias.len(),
        })?;
        Self::from_flat(dim, flat, bias)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, class: usize) -> &[f64] {
        &self.weights[class * self.dim..(class + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64; NUM_EMOTIONS] {
        &self.bias
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64; NUM_EMOTIONS]) {
        (&mut self.weights, &mut self.bias)
    }

    /// Pre-activation `W_c · v + b_c`; caller guarantees `v.len() == dim`.
    pub fn logits(&self, v: &[f64]) -> [f64; NUM_EMOTIONS] {
        debug_assert_eq!(v.len(), self.dim);
        let mut z = self.bias;
        for (c, zc) in z.iter_mut().enumerate() {
            *zc += self.row(c).iter().zip(v).map(|(w, x)| w * x).sum::<f64>();
        }
        z
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            weights: self.weights.iter().map(|w| w * factor).collect(),
            bias: self.bias.map(|b| b * factor),
        }
    }
}

/// On-disk checkpoint: `{"dim": D, "weights": [[..]; 6], "bias": [..; 6], "epoch": k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub dim: usize,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub epoch: usize,
}

impl Checkpoint {
    pub fn from_model(model: &LinearModel, epoch: usize) -> Self {
        Self {
            dim: model.dim,
            weights: (0..NUM_EMOTIONS).map(|c| model.row(c).to_vec()).collect(),
            bias: model.bias.to_vec(),
            epoch,
        }
    }

    pub fn to_model(&self) -> Result<LinearModel, ModelError> {
        let model = LinearModel::from_rows(&self.weights, &self.bias)?;
        if model.dim != self.dim {
            return Err(ModelError::Shape { what: "dim", expected: self.dim, got: model.dim });
        }
        Ok(model)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec(self).expect("checkpoint serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let ckpt: Checkpoint = serde_json::from_slice(&fs::read(path)?)?;
        ckpt.to_model()?;
        Ok(ckpt)
    }
}
