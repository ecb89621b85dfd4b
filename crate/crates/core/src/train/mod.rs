//! Native trainer for the linear baseline: class-weighted binary
//! cross-entropy, analytic gradients, Adam, one checkpoint per epoch and
//! best-checkpoint selection by eval mAP.

mod adam;
mod loss;
mod model;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{classify_linear, EmbeddingTable, DEFAULT_TAU};
use crate::emotion::{Emotion, EmotionLabels, EmotionScores, NUM_EMOTIONS};
use crate::labeling::DatasetExample;
use crate::metrics::{evaluate, EvalPair, MetricsError};

pub use adam::{adam_step, AdamState};
pub use loss::{class_weights, wbce_gradient, wbce_loss, wbce_term, ClassWeights, Gradient};
pub use model::{Checkpoint, LinearModel, ModelError};

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("no embedding for tweet {0:?}")]
    MissingEmbedding(String),
    #[error("class {0} has no positive example")]
    ClassWithoutPositives(Emotion),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("evaluation set is empty")]
    EmptyEvalSet,
    #[error("{scores} score rows but {labels} label rows")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("embedding has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("evaluation: {0}")]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("writing training output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub prob_clamp: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-5,
            epochs: 4,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            prob_clamp: 1e-7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(self.prob_clamp > 0.0 && self.prob_clamp < 0.5) {
            return bad("prob_clamp must lie in (0, 0.5)");
        }
        Ok(())
    }
}

/// An example with its embedding attached.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub tweet_id: String,
    pub v: Vec<f64>,
    pub labels: EmotionLabels,
}

/// Attach embeddings to labeled examples.
pub fn join_embeddings<'a, I>(
    examples: I,
    embeddings: &EmbeddingTable,
) -> Result<Vec<TrainingExample>, TrainError>
where
    I: IntoIterator<Item = (&'a str, EmotionLabels)>,
{
    examples
        .into_iter()
        .map(|(id, labels)| {
            let v = embeddings
                .get(id)
                .ok_or_else(|| TrainError::MissingEmbedding(id.to_string()))?;
            Ok(TrainingExample { tweet_id: id.to_string(), v: v.to_vec(), labels })
        })
        .collect()
}

pub fn join_dataset(
    dataset: &[DatasetExample],
    embeddings: &EmbeddingTable,
) -> Result<Vec<TrainingExample>, TrainError> {
    join_embeddings(dataset.iter().map(|d| (d.tweet_id.as_str(), d.labels)), embeddings)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub eval_map: f64,
    pub eval_f1: f64,
    pub eval_hamming: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedArtifacts {
    /// One per epoch, epoch numbers starting at 1.
    pub checkpoints: Vec<Checkpoint>,
    pub log: Vec<EpochLog>,
    pub initial_loss: f64,
    pub class_weights: ClassWeights,
    pub best_epoch: usize,
}

impl TrainedArtifacts {
    pub fn best(&self) -> &Checkpoint {
        &self.checkpoints[self.best_epoch - 1]
    }

    pub fn final_loss(&self) -> f64 {
        self.log.last().map_or(self.initial_loss, |l| l.train_loss)
    }

    pub fn training_log_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,eval_map,eval_f1,eval_hamming\n");
        for l in &self.log {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                l.epoch, l.train_loss, l.eval_map, l.eval_f1, l.eval_hamming
            );
        }
        out
    }

    pub fn selection_json(&self) -> String {
        let best = &self.log[self.best_epoch - 1];
        let value = serde_json::json!({
            "best_epoch": self.best_epoch,
            "checkpoint": checkpoint_file_name(self.best_epoch),
            "criterion": "eval_map",
            "eval_map": best.eval_map,
            "class_weights": self.class_weights.0,
        });
        let mut s = serde_json::to_string_pretty(&value).expect("selection serializes");
        s.push('\n');
        s
    }

    /// Write `checkpoint_epoch_<k>.json`, `training_log.csv` and
    /// `selection.json`; returns the checkpoint paths.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, TrainError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut paths = Vec::with_capacity(self.checkpoints.len());
        for ckpt in &self.checkpoints {
            let path = dir.join(checkpoint_file_name(ckpt.epoch));
            ckpt.save(&path)?;
            paths.push(path);
        }
        fs::write(dir.join("training_log.csv"), self.training_log_csv())?;
        fs::write(dir.join("selection.json"), self.selection_json())?;
        Ok(paths)
    }
}

pub fn checkpoint_file_name(epoch: usize) -> String {
    format!("checkpoint_epoch_{epoch}.json")
}

fn predict_all(model: &LinearModel, data: &[TrainingExample]) -> Result<Vec<EmotionScores>, TrainError> {
    data.iter()
        .map(|ex| {
            classify_linear(model, &ex.v).map_err(|_| TrainError::DimensionMismatch {
                expected: model.dim(),
                got: ex.v.len(),
            })
        })
        .collect()
}

pub fn dataset_loss(
    model: &LinearModel,
    data: &[TrainingExample],
    w: &ClassWeights,
    clamp: f64,
) -> Result<f64, TrainError> {
    let scores = predict_all(model, data)?;
    let labels: Vec<EmotionLabels> = data.iter().map(|d| d.labels).collect();
    wbce_loss(&scores, &labels, w, clamp)
}

fn eval_pairs(model: &LinearModel, data: &[TrainingExample]) -> Result<Vec<EvalPair>, TrainError> {
    Ok(predict_all(model, data)?
        .into_iter()
        .zip(data)
        .map(|(scores, ex)| EvalPair { tweet_id: ex.tweet_id.clone(), scores, gold: ex.labels })
        .collect())
}

/// Mini-batch Adam from a zero initialization.
///
/// Examples are first sorted by tweet id, then shuffled each epoch by
/// `cfg.seed`, so results do not depend on input order. The checkpoint with
/// the highest eval mAP is selected; ties go to the earliest epoch.
pub fn train(
    data: &[TrainingExample],
    eval: &[TrainingExample],
    cfg: &TrainConfig,
) -> Result<TrainedArtifacts, TrainError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if eval.is_empty() {
        return Err(TrainError::EmptyEvalSet);
    }
    let dim = data[0].v.len();
    for ex in data.iter().chain(eval) {
        if ex.v.len() != dim {
            return Err(TrainError::DimensionMismatch { expected: dim, got: ex.v.len() });
        }
    }

    let mut sorted: Vec<&TrainingExample> = data.iter().collect();
    sorted.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));
    let mut pos_counts = [0usize; NUM_EMOTIONS];
    for ex in &sorted {
        for e in ex.labels.emotions() {
            pos_counts[e.index()] += 1;
        }
    }
    let weights = class_weights(&pos_counts, sorted.len())?;

    let mut model = LinearModel::zeros(dim)?;
    let mut state = AdamState::new(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let initial_loss = dataset_loss(&model, data, &weights, cfg.prob_clamp)?;

    let mut order: Vec<usize> = (0..sorted.len()).collect();
    let mut checkpoints = Vec::with_capacity(cfg.epochs);
    let mut log = Vec::with_capacity(cfg.epochs);
    let mut batch: Vec<(&[f64], EmotionLabels)> = Vec::with_capacity(cfg.batch_size);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| (sorted[i].v.as_slice(), sorted[i].labels)));
            let grad = wbce_gradient(&model, &batch, &weights, cfg.prob_clamp)?;
            adam_step(&mut state, &grad, cfg, &mut model);
        }
        let train_loss = dataset_loss(&model, data, &weights, cfg.prob_clamp)?;
        let report = evaluate(&eval_pairs(&model, eval)?, DEFAULT_TAU, 4)?;
        log.push(EpochLog {
            epoch,
            train_loss,
            eval_map: report.map,
            eval_f1: report.macro_f1,
            eval_hamming: report.hamming,
        });
        checkpoints.push(Checkpoint::from_model(&model, epoch));
    }

    let mut best_epoch = 1;
    for l in &log {
        if l.eval_map > log[best_epoch - 1].eval_map {
            best_epoch = l.epoch;
        }
    }
    Ok(TrainedArtifacts { checkpoints, log, initial_loss, class_weights: weights, best_epoch })
}
