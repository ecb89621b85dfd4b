//! The four validation experiments.
//!
//! | id | input to the classifier                         | backend        |
//! |----|-------------------------------------------------|----------------|
//! | 1  | normalized text, lexicon terms removed          | remote model   |
//! | 2  | normalized words                                | lexicon match  |
//! | 3  | normalized text, lexicon terms kept             | remote model   |
//! | 4  | embedding of the lexicon-free text (by id)      | linear model   |

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::classify::{
    ClassifyError, ClassifyInput, EmbeddingTable, EmotionClassifier, ExternalBackendConfig,
    ExternalClassifier, LexiconClassifier, LinearClassifier,
};
use crate::emotion::NUM_EMOTIONS;
use crate::labeling::Lexicon;
use crate::metrics::{evaluate, EvalPair, GoldRecord, MetricsError, MetricsReport};
use crate::textprep::{normalize, normalize_words, strip_lexicon};
use crate::train::LinearModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "u8")]
pub enum ExperimentId {
    RemovedLexiconsModel = 1,
    LexiconMatch = 2,
    KeptLexiconsModel = 3,
    EmbeddingBaseline = 4,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [
        ExperimentId::RemovedLexiconsModel,
        ExperimentId::LexiconMatch,
        ExperimentId::KeptLexiconsModel,
        ExperimentId::EmbeddingBaseline,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.number() == n)
    }
}

impl From<ExperimentId> for u8 {
    fn from(id: ExperimentId) -> u8 {
        id.number()
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for ExperimentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .parse::<u8>()
            .ok()
            .and_then(Self::from_number)
            .ok_or_else(|| format!("experiment must be 1, 2, 3 or 4, got {s:?}"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("experiment needs embeddings: {0}")]
    MissingEmbedding(String),
    #[error("experiment needs a {0} backend")]
    MissingBackend(&'static str),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Backends available to a run; each experiment uses the ones it needs.
#[derive(Debug, Clone, Default)]
pub struct ExperimentBackends {
    pub server: Option<ExternalBackendConfig>,
    pub embeddings: Option<EmbeddingTable>,
    /// Model and a display name (usually the checkpoint path).
    pub model: Option<(LinearModel, String)>,
}

/// Classifier input text per gold record for a text-based experiment.
///
/// Experiment 4 reads embeddings, but its embeddings should be computed from
/// the text this returns for id 1.
pub fn experiment_texts(id: ExperimentId, gold: &[GoldRecord], lexicon: &Lexicon) -> Vec<String> {
    gold.iter()
        .map(|g| match id {
            ExperimentId::RemovedLexiconsModel | ExperimentId::EmbeddingBaseline => {
                strip_lexicon(&normalize_words(&g.text), lexicon).join(" ")
            }
            ExperimentId::LexiconMatch | ExperimentId::KeptLexiconsModel => {
                normalize(&g.text).into_string()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub report: MetricsReport,
    pub backend: String,
    pub tau: f64,
}

/// Run one experiment against the gold set.
pub fn run_experiment(
    id: ExperimentId,
    gold: &[GoldRecord],
    backends: &ExperimentBackends,
    lexicon: &Lexicon,
    tau: f64,
) -> Result<ExperimentOutcome, ExperimentError> {
    if gold.is_empty() {
        return Err(MetricsError::EmptyEvaluation.into());
    }
    let texts = experiment_texts(id, gold, lexicon);
    let inputs: Vec<ClassifyInput<'_>> = gold
        .iter()
        .zip(&texts)
        .map(|(g, t)| ClassifyInput { tweet_id: &g.tweet_id, text: t })
        .collect();

    let classifier: Box<dyn EmotionClassifier> = match id {
        ExperimentId::LexiconMatch => Box::new(LexiconClassifier::new(lexicon.clone())),
        ExperimentId::RemovedLexiconsModel | ExperimentId::KeptLexiconsModel => {
            let cfg = backends.server.clone().ok_or(ExperimentError::MissingBackend("server"))?;
            Box::new(ExternalClassifier::fail_fast(cfg))
        }
        ExperimentId::EmbeddingBaseline => {
            let table = backends
                .embeddings
                .clone()
                .ok_or_else(|| ExperimentError::MissingEmbedding("no embeddings file".into()))?;
            let (model, name) = backends.model.clone().ok_or(ExperimentError::MissingBackend("model"))?;
            Box::new(LinearClassifier::new(name, model, table))
        }
    };
    let scores = classifier.classify(&inputs).map_err(|e| match e {
        ClassifyError::MissingEmbedding(id) => ExperimentError::MissingEmbedding(id),
        other => other.into(),
    })?;

    let pairs: Vec<EvalPair> = gold
        .iter()
        .zip(scores)
        .map(|(g, s)| EvalPair { tweet_id: g.tweet_id.clone(), scores: s, gold: g.labels })
        .collect();
    let report = evaluate(&pairs, tau, id.number())?;
    Ok(ExperimentOutcome { report, backend: classifier.identity(), tau })
}

/// JSON report written by the `evaluate` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportFile {
    pub experiment_id: u8,
    pub n: usize,
    pub map: f64,
    pub hamming: f64,
    pub macro_f1: f64,
    pub per_class_ap: [Option<f64>; NUM_EMOTIONS],
    pub per_class_f1: [f64; NUM_EMOTIONS],
    pub emotions: [&'static str; NUM_EMOTIONS],
    pub provenance: ReportProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportProvenance {
    pub tau: f64,
    pub experiment_id: u8,
    pub backend: String,
    pub lexicon_checksum: String,
    pub ap_definition: &'static str,
    pub f1_zero_denominator: f64,
}

impl ReportFile {
    pub fn new(outcome: &ExperimentOutcome, lexicon: &Lexicon) -> Self {
        let r = &outcome.report;
        Self {
            experiment_id: r.experiment_id,
            n: r.n,
            map: r.map,
            hamming: r.hamming,
            macro_f1: r.macro_f1,
            per_class_ap: r.per_class_ap,
            per_class_f1: r.per_class_f1,
            emotions: crate::emotion::Emotion::names(),
            provenance: ReportProvenance {
                tau: outcome.tau,
                experiment_id: r.experiment_id,
                backend: outcome.backend.clone(),
                lexicon_checksum: lexicon.checksum(),
                ap_definition: "non-interpolated threshold sweep; classes without positives skipped",
                f1_zero_denominator: 0.0,
            },
        }
    }
}
