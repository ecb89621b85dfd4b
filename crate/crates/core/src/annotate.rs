//! Survey export validation and gold-file emission.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::emotion::{Emotion, EmotionLabels, NUM_EMOTIONS};
use crate::ingest::{CorpusStore, StoreError};
use crate::labeling::{aggregate_annotations, AggregationError, AnnotationRecord};
use crate::metrics::{write_gold_csv, GoldError, GoldRecord};

#[derive(Debug, thiserror::Error)]
pub enum AnnotateError {
    #[error("survey export: unknown column {0:?}")]
    UnknownColumn(String),
    #[error("survey export: missing column {0:?}")]
    MissingColumn(String),
    #[error("survey export line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("survey export line {line}: annotator {annotator_id:?} answered tweet {tweet_id:?} differently before")]
    DuplicateAnnotation { line: u64, tweet_id: String, annotator_id: String },
    #[error("tweet id {0:?} has no text in the texts source")]
    UnresolvedTweetId(String),
    #[error("texts file: {0}")]
    Texts(String),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Gold(#[from] GoldError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Column positions of a survey export header, in any order.
struct SurveyColumns {
    tweet_id: usize,
    annotator_id: usize,
    emotions: [usize; NUM_EMOTIONS],
}

fn survey_columns(header: &csv::StringRecord) -> Result<SurveyColumns, AnnotateError> {
    let mut pos: HashMap<&str, usize> = HashMap::new();
    for (i, name) in header.iter().enumerate() {
        let name = name.trim();
        let known = name == "tweet_id" || name == "annotator_id" || name.parse::<Emotion>().is_ok();
        if !known {
            return Err(AnnotateError::UnknownColumn(name.to_string()));
        }
        if pos.insert(name, i).is_some() {
            return Err(AnnotateError::MalformedRow { line: 1, reason: format!("column {name:?} repeated") });
        }
    }
    let find = |name: &str| pos.get(name).copied().ok_or_else(|| AnnotateError::MissingColumn(name.to_string()));
    let mut emotions = [0; NUM_EMOTIONS];
    for (slot, e) in emotions.iter_mut().zip(Emotion::ALL) {
        *slot = find(e.name())?;
    }
    Ok(SurveyColumns { tweet_id: find("tweet_id")?, annotator_id: find("annotator_id")?, emotions })
}

/// Parse a survey export. Identical repeated rows collapse to one record;
/// a repeated (tweet, annotator) pair with a different answer is an error.
pub fn validate_survey_from_reader<R: Read>(reader: R) -> Result<Vec<AnnotationRecord>, AnnotateError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let cols = survey_columns(rdr.headers()?)?;
    let width = 2 + NUM_EMOTIONS;

    let mut out: Vec<AnnotationRecord> = Vec::new();
    let mut seen: HashMap<(String, String), EmotionLabels> = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let malformed = |reason: String| AnnotateError::MalformedRow { line, reason };
        if row.len() != width {
            return Err(malformed(format!("expected {width} cells, found {}", row.len())));
        }
        let tweet_id = row[cols.tweet_id].trim().to_string();
        let annotator_id = row[cols.annotator_id].trim().to_string();
        if tweet_id.is_empty() || annotator_id.is_empty() {
            return Err(malformed("empty tweet_id or annotator_id".into()));
        }
        let mut selected = EmotionLabels::NONE;
        for (e, &col) in Emotion::ALL.into_iter().zip(&cols.emotions) {
            match row[col].trim() {
                "0" => {}
                "1" => selected.set(e, true),
                other => return Err(malformed(format!("{e} cell {other:?} is not 0 or 1"))),
            }
        }
        match seen.get(&(tweet_id.clone(), annotator_id.clone())) {
            Some(prev) if *prev == selected => continue,
            Some(_) => return Err(AnnotateError::DuplicateAnnotation { line, tweet_id, annotator_id }),
            None => {}
        }
        seen.insert((tweet_id.clone(), annotator_id.clone()), selected);
        out.push(AnnotationRecord { tweet_id, annotator_id, selected });
    }
    Ok(out)
}

pub fn validate_survey_export(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>, AnnotateError> {
    validate_survey_from_reader(File::open(path)?)
}

/// Read a `tweet_id,text` CSV.
pub fn read_texts_csv<R: Read>(reader: R) -> Result<BTreeMap<String, String>, AnnotateError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["tweet_id", "text"] {
        return Err(AnnotateError::Texts("header must be `tweet_id,text`".into()));
    }
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        if row.len() != 2 {
            return Err(AnnotateError::Texts(format!("line {}: expected 2 cells", row.position().map_or(0, |p| p.line()))));
        }
        out.insert(row[0].to_string(), row[1].to_string());
    }
    Ok(out)
}

/// Texts keyed by tweet id from either a corpus store directory or a
/// `tweet_id,text` CSV file.
pub fn load_texts(source: impl AsRef<Path>) -> Result<BTreeMap<String, String>, AnnotateError> {
    let source = source.as_ref();
    if source.is_dir() {
        let store = CorpusStore::open(source)?;
        Ok(store.read_all()?.into_iter().map(|t| (t.id, t.text)).collect())
    } else {
        read_texts_csv(File::open(source)?)
    }
}

/// Aggregate annotations and join texts; rows sorted by tweet id.
pub fn gold_records(
    records: &[AnnotationRecord],
    texts: &BTreeMap<String, String>,
    min_agreement: usize,
) -> Result<Vec<GoldRecord>, AnnotateError> {
    aggregate_annotations(records, min_agreement)?
        .into_iter()
        .map(|(tweet_id, labels)| {
            let text = texts.get(&tweet_id).ok_or_else(|| AnnotateError::UnresolvedTweetId(tweet_id.clone()))?;
            Ok(GoldRecord { text: text.clone(), tweet_id, labels })
        })
        .collect()
}

/// Write the validation gold CSV for `records` to `out`.
pub fn emit_gold<W: Write>(
    records: &[AnnotationRecord],
    texts: &BTreeMap<String, String>,
    min_agreement: usize,
    out: W,
) -> Result<usize, AnnotateError> {
    let gold = gold_records(records, texts, min_agreement)?;
    write_gold_csv(out, &gold)?;
    Ok(gold.len())
}
