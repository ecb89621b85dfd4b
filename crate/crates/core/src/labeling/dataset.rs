use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::emotion::{EmotionLabels, NUM_EMOTIONS};
use crate::ingest::{CorpusStore, RawTweet, StoreError};
use crate::labeling::{weak_label, Lexicon};
use crate::textprep::{normalize_words, strip_lexicon};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("no tweet received a lexicon label")]
    EmptyDataset,
    #[error("dataset line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("dataset I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetExample {
    pub tweet_id: String,
    pub words: Vec<String>,
    pub labels: EmotionLabels,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSet {
    pub examples: Vec<DatasetExample>,
    /// Positive count per emotion, canonical order.
    pub pos_counts: [usize; NUM_EMOTIONS],
}

/// Weakly label tweets; tweets with no lexicon hit are dropped. When
/// `remove_lexicons` is set, the stored words are lexicon-free.
pub fn label_tweets<'a, I>(tweets: I, lexicon: &Lexicon, remove_lexicons: bool) -> TrainingSet
where
    I: IntoIterator<Item = &'a RawTweet>,
{
    let mut examples = Vec::new();
    let mut pos_counts = [0usize; NUM_EMOTIONS];
    for tweet in tweets {
        let words = normalize_words(&tweet.text);
        let labels = weak_label(&words, lexicon);
        if labels.is_empty() {
            continue;
        }
        for e in labels.emotions() {
            pos_counts[e.index()] += 1;
        }
        let words = if remove_lexicons { strip_lexicon(&words, lexicon) } else { words };
        examples.push(DatasetExample { tweet_id: tweet.id.clone(), words, labels });
    }
    TrainingSet { examples, pos_counts }
}

/// Build the weakly labeled training set from every tweet in the store.
pub fn build_training_set(
    store: &CorpusStore,
    lexicon: &Lexicon,
    remove_lexicons: bool,
) -> Result<TrainingSet, DatasetError> {
    let tweets = store.read_all()?;
    let set = label_tweets(&tweets, lexicon, remove_lexicons);
    if set.examples.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    Ok(set)
}

pub fn write_dataset(path: impl AsRef<Path>, examples: &[DatasetExample]) -> Result<(), DatasetError> {
    let mut out = BufWriter::new(File::create(path)?);
    for ex in examples {
        serde_json::to_writer(&mut out, ex).map_err(std::io::Error::other)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetExample>, DatasetError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ex = serde_json::from_str(&line)
            .map_err(|e| DatasetError::Malformed { line: i + 1, reason: e.to_string() })?;
        out.push(ex);
    }
    Ok(out)
}
