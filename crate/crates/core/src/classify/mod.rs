//! Emotion classifiers behind one interface: lexicon lookup, the native linear
//! model over precomputed embeddings, and a remote inference server.

mod embeddings;
mod external;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::emotion::{Emotion, EmotionLabels, EmotionScores};
use crate::labeling::Lexicon;
use crate::textprep::{match_lexicon, normalize_words};
use crate::train::{Checkpoint, LinearModel};

pub use embeddings::{EmbeddingError, EmbeddingRecord, EmbeddingTable};
pub use external::{classify_external, classify_external_with_retry, ExternalBackendConfig};

/// Default decision threshold, inclusive.
pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("embedding has dimension {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no embedding for tweet {0:?}")]
    MissingEmbedding(String),
    #[error("inference backend unreachable: {0}")]
    BackendUnreachable(String),
    #[error("inference backend protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
}

/// Score 1.0 for every emotion with at least one lexicon hit, else 0.0.
pub fn classify_lexicon<S: AsRef<str>>(words: &[S], lexicon: &Lexicon) -> EmotionScores {
    let matches = match_lexicon(words, lexicon);
    EmotionScores(Emotion::ALL.map(|e| if matches.matched(e) { 1.0 } else { 0.0 }))
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `s_c = sigmoid(W_c · v + b_c)`.
pub fn classify_linear(model: &LinearModel, v: &[f64]) -> Result<EmotionScores, ClassifyError> {
    if v.len() != model.dim() {
        return Err(ClassifyError::DimensionMismatch { expected: model.dim(), got: v.len() });
    }
    Ok(EmotionScores(model.logits(v).map(sigmoid)))
}

/// Label `c` is set iff `s_c >= tau`.
pub fn threshold(scores: &EmotionScores, tau: f64) -> EmotionLabels {
    EmotionLabels(scores.0.map(|s| s >= tau))
}

/// One item to classify. Text-based backends read `text`, the embedding
/// backend looks up `tweet_id`.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyInput<'a> {
    pub tweet_id: &'a str,
    pub text: &'a str,
}

pub trait EmotionClassifier: Send + Sync {
    /// Stable identity string recorded in reports and series metadata.
    fn identity(&self) -> String;

    fn classify(&self, inputs: &[ClassifyInput<'_>]) -> Result<Vec<EmotionScores>, ClassifyError>;

    /// Cheap readiness check.
    fn probe(&self) -> Result<(), ClassifyError> {
        Ok(())
    }
}

/// Lexicon backend; input text is normalized before matching.
#[derive(Debug, Clone)]
pub struct LexiconClassifier {
    lexicon: Lexicon,
}

impl LexiconClassifier {
    pub fn new(lexicon: Lexicon) -> Self {
        Self { lexicon }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }
}

impl EmotionClassifier for LexiconClassifier {
    fn identity(&self) -> String {
        "lexicon".to_string()
    }

    fn classify(&self, inputs: &[ClassifyInput<'_>]) -> Result<Vec<EmotionScores>, ClassifyError> {
        Ok(inputs
            .iter()
            .map(|i| classify_lexicon(&normalize_words(i.text), &self.lexicon))
            .collect())
    }
}

/// Linear model over embeddings looked up by tweet id.
#[derive(Debug, Clone)]
pub struct LinearClassifier {
    name: String,
    model: LinearModel,
    embeddings: EmbeddingTable,
}

impl LinearClassifier {
    pub fn new(name: impl Into<String>, model: LinearModel, embeddings: EmbeddingTable) -> Self {
        Self { name: name.into(), model, embeddings }
    }
}

impl EmotionClassifier for LinearClassifier {
    fn identity(&self) -> String {
        format!("model:{}", self.name)
    }

    fn classify(&self, inputs: &[ClassifyInput<'_>]) -> Result<Vec<EmotionScores>, ClassifyError> {
        inputs
            .iter()
            .map(|i| {
                let v = self
                    .embeddings
                    .get(i.tweet_id)
                    .ok_or_else(|| ClassifyError::MissingEmbedding(i.tweet_id.to_string()))?;
                classify_linear(&self.model, v)
            })
            .collect()
    }
}

/// Remote server backend, optionally retrying unreachable errors.
#[derive(Debug, Clone)]
pub struct ExternalClassifier {
    cfg: ExternalBackendConfig,
    retries: usize,
}

impl ExternalClassifier {
    /// No retries; evaluation runs fail fast.
    pub fn fail_fast(cfg: ExternalBackendConfig) -> Self {
        Self { cfg, retries: 0 }
    }

    /// One retry, used by the monitoring path.
    pub fn with_retry(cfg: ExternalBackendConfig) -> Self {
        Self { cfg, retries: 1 }
    }

    pub fn config(&self) -> &ExternalBackendConfig {
        &self.cfg
    }
}

impl EmotionClassifier for ExternalClassifier {
    fn identity(&self) -> String {
        format!("server:{}", self.cfg.endpoint)
    }

    fn classify(&self, inputs: &[ClassifyInput<'_>]) -> Result<Vec<EmotionScores>, ClassifyError> {
        let texts: Vec<&str> = inputs.iter().map(|i| i.text).collect();
        classify_external_with_retry(&self.cfg, &texts, self.retries)
    }

    fn probe(&self) -> Result<(), ClassifyError> {
        self.cfg.probe()
    }
}

/// `lexicon`, `model:<checkpoint path>` or `server:<url>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassifierSpec {
    Lexicon,
    Model(PathBuf),
    Server(String),
}

impl FromStr for ClassifierSpec {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "lexicon" {
            return Ok(Self::Lexicon);
        }
        if let Some(path) = s.strip_prefix("model:").filter(|p| !p.is_empty()) {
            return Ok(Self::Model(PathBuf::from(path)));
        }
        if let Some(url) = s.strip_prefix("server:").filter(|u| !u.is_empty()) {
            return Ok(Self::Server(url.to_string()));
        }
        Err(ClassifyError::InvalidConfig(format!(
            "classifier must be `lexicon`, `model:<ckpt>` or `server:<url>`, got {s:?}"
        )))
    }
}

impl ClassifierSpec {
    /// Instantiate the backend. `Lexicon` needs `lexicon`, `Model` needs
    /// `embeddings`; `Server` uses default client settings with one retry.
    pub fn build(
        &self,
        lexicon: Option<&Lexicon>,
        embeddings: Option<&EmbeddingTable>,
    ) -> Result<Box<dyn EmotionClassifier>, ClassifyError> {
        match self {
            Self::Lexicon => {
                let lexicon = lexicon
                    .ok_or_else(|| ClassifyError::InvalidConfig("lexicon backend needs a lexicon file".into()))?;
                Ok(Box::new(LexiconClassifier::new(lexicon.clone())))
            }
            Self::Model(path) => {
                let embeddings = embeddings.ok_or_else(|| {
                    ClassifyError::InvalidConfig("model backend needs an embeddings file".into())
                })?;
                let model = Checkpoint::load(path)
                    .and_then(|c| c.to_model())
                    .map_err(|e| ClassifyError::InvalidConfig(format!("{}: {e}", path.display())))?;
                if model.dim() != embeddings.dim() {
                    return Err(ClassifyError::DimensionMismatch { expected: model.dim(), got: embeddings.dim() });
                }
                Ok(Box::new(LinearClassifier::new(path.display().to_string(), model, embeddings.clone())))
            }
            Self::Server(url) => {
                let cfg = ExternalBackendConfig::new(url.clone());
                cfg.validate()?;
                Ok(Box::new(ExternalClassifier::with_retry(cfg)))
            }
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Lexicon => f.write_str("lexicon"),
            Self::Model(p) => write!(f, "model:{}", p.display()),
            Self::Server(u) => write!(f, "server:{u}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Emotion::*;

    fn lex() -> Lexicon {
        Lexicon::from_entries([(Joy, "alegria"), (Joy, "feliz"), (Fear, "miedo")]).unwrap()
    }

    #[test]
    fn lexicon_examples() {
        assert_eq!(classify_lexicon(&["que", "alegria"], &lex()).0, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(classify_lexicon(&["hola"], &lex()).0, [0.0; 6]);
        assert_eq!(classify_lexicon(&["miedo", "feliz"], &lex()).0, [1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn linear_examples() {
        let zeros = LinearModel::zeros(2).unwrap();
        assert_eq!(classify_linear(&zeros, &[3.0, -1.0]).unwrap().0, [0.5; 6]);

        let model = LinearModel::from_rows(&vec![vec![1.0, 0.0]; 6], &[0.0; 6]).unwrap();
        let s = classify_linear(&model, &[3f64.ln(), 7.0]).unwrap();
        for c in s.0 {
            assert!((c - 0.75).abs() < 1e-15);
        }
        assert_eq!(
            classify_linear(&model, &[1.0]),
            Err(ClassifyError::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0).is_finite());
        assert_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn threshold_examples() {
        let t = |s: [f64; 6]| threshold(&EmotionScores(s), 0.5);
        assert_eq!(t([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), EmotionLabels::from_emotions([Joy]));
        assert_eq!(t([0.5; 6]), EmotionLabels([true; 6]));
        assert_eq!(t([0.49, 0.51, 0.0, 0.0, 0.0, 0.0]), EmotionLabels::from_emotions([Sadness]));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("lexicon".parse::<ClassifierSpec>().unwrap(), ClassifierSpec::Lexicon);
        assert_eq!(
            "model:out/best.json".parse::<ClassifierSpec>().unwrap(),
            ClassifierSpec::Model("out/best.json".into())
        );
        assert_eq!(
            "server:http://x:1".parse::<ClassifierSpec>().unwrap().to_string(),
            "server:http://x:1"
        );
        assert!("model:".parse::<ClassifierSpec>().is_err());
        assert!("bert".parse::<ClassifierSpec>().is_err());
    }

    #[test]
    fn linear_backend_needs_embeddings() {
        let table = EmbeddingTable::from_records([EmbeddingRecord { tweet_id: "a".into(), v: vec![0.0] }])
            .unwrap();
        let clf = LinearClassifier::new("m", LinearModel::zeros(1).unwrap(), table);
        let ok = clf.classify(&[ClassifyInput { tweet_id: "a", text: "" }]).unwrap();
        assert_eq!(ok[0].0, [0.5; 6]);
        assert_eq!(
            clf.classify(&[ClassifyInput { tweet_id: "b", text: "" }]),
            Err(ClassifyError::MissingEmbedding("b".into()))
        );
    }
}
