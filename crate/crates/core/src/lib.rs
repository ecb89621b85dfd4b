//! Emotion monitoring for Spanish-language tweets.

pub mod annotate;
pub mod calendar;
pub mod classify;
pub mod emotion;
pub mod ingest;
pub mod labeling;
pub mod metrics;
pub mod monitor;
pub mod service;
pub mod textprep;
pub mod train;

pub use emotion::{Emotion, EmotionLabels, EmotionScores, NUM_EMOTIONS};
