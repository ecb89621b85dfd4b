//! The six basic emotions and the fixed-width vectors indexed by them.
//!
//! The canonical order (joy, sadness, fear, anger, surprise, disgust) is shared
//! by every file format, wire message and in-memory vector in this crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of emotion classes.
pub const NUM_EMOTIONS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Joy,
    Sadness,
    Fear,
    Anger,
    Surprise,
    Disgust,
}

impl Emotion {
    pub const ALL: [Emotion; NUM_EMOTIONS] = [
        Emotion::Joy,
        Emotion::Sadness,
        Emotion::Fear,
        Emotion::Anger,
        Emotion::Surprise,
        Emotion::Disgust,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Emotion> {
        Self::ALL.get(index).copied()
    }

    pub const fn name(self) -> &'static str {
        match self {
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Fear => "fear",
            Emotion::Anger => "anger",
            Emotion::Surprise => "surprise",
            Emotion::Disgust => "disgust",
        }
    }

    /// Canonical names in index order.
    pub fn names() -> [&'static str; NUM_EMOTIONS] {
        Self::ALL.map(Emotion::name)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown emotion name {0:?}")]
pub struct UnknownEmotion(pub String);

impl FromStr for Emotion {
    type Err = UnknownEmotion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| UnknownEmotion(s.to_string()))
    }
}

/// Parse a comma-separated emotion list such as `joy,fear`. An empty string
/// yields an empty list.
pub fn parse_emotion_list(s: &str) -> Result<Vec<Emotion>, UnknownEmotion> {
    s.split(',')
        .map(str::trim)
        .filter(|part| !part.is_empty())
        .map(Emotion::from_str)
        .collect()
}

/// Boolean label set over the six emotions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct EmotionLabels(pub [bool; NUM_EMOTIONS]);

impl EmotionLabels {
    pub const NONE: EmotionLabels = EmotionLabels([false; NUM_EMOTIONS]);

    pub fn from_emotions<I: IntoIterator<Item = Emotion>>(emotions: I) -> Self {
        let mut labels = Self::NONE;
        for e in emotions {
            labels.0[e.index()] = true;
        }
        labels
    }

    /// Build from 0/1 integers; any other value is rejected.
    pub fn from_bits(bits: &[u8]) -> Option<Self> {
        if bits.len() != NUM_EMOTIONS {
            return None;
        }
        let mut labels = Self::NONE;
        for (slot, &b) in labels.0.iter_mut().zip(bits) {
            *slot = match b {
                0 => false,
                1 => true,
                _ => return None,
            };
        }
        Some(labels)
    }

    pub fn get(&self, e: Emotion) -> bool {
        self.0[e.index()]
    }

    pub fn set(&mut self, e: Emotion, value: bool) {
        self.0[e.index()] = value;
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn emotions(&self) -> impl Iterator<Item = Emotion> + '_ {
        Emotion::ALL.into_iter().filter(|e| self.get(*e))
    }

    pub fn bits(&self) -> [u8; NUM_EMOTIONS] {
        self.0.map(u8::from)
    }

    /// 0.0 / 1.0 view, useful when gold labels stand in for scores.
    pub fn as_scores(&self) -> EmotionScores {
        EmotionScores(self.0.map(|b| if b { 1.0 } else { 0.0 }))
    }
}

impl Serialize for EmotionLabels {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.bits().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EmotionLabels {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(deserializer)?;
        EmotionLabels::from_bits(&bits).ok_or_else(|| {
            serde::de::Error::custom("labels must be exactly six 0/1 integers")
        })
    }
}

/// Per-emotion scores, each finite and within [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EmotionScores(pub [f64; NUM_EMOTIONS]);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("expected {NUM_EMOTIONS} scores, got {0}")]
    Arity(usize),
    #[error("score {value} at index {index} is not a finite value in [0, 1]")]
    OutOfRange { index: usize, value: f64 },
}

impl EmotionScores {
    /// Validate a raw score slice.
    pub fn try_from_slice(values: &[f64]) -> Result<Self, ScoreError> {
        if values.len() != NUM_EMOTIONS {
            return Err(ScoreError::Arity(values.len()));
        }
        let mut scores = [0.0; NUM_EMOTIONS];
        for (index, (&value, slot)) in values.iter().zip(scores.iter_mut()).enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(ScoreError::OutOfRange { index, value });
            }
            *slot = value;
        }
        Ok(EmotionScores(scores))
    }

    pub fn get(&self, e: Emotion) -> f64 {
        self.0[e.index()]
    }
}
