//! Validation gold file: `tweet_id,text,joy,sadness,fear,anger,surprise,disgust`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::emotion::{Emotion, EmotionLabels, NUM_EMOTIONS};

#[derive(Debug, thiserror::Error)]
pub enum GoldError {
    #[error("gold file header must be `tweet_id,text,{}`", Emotion::names().join(","))]
    BadHeader,
    #[error("gold file line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("gold file line {line}: duplicate tweet_id {id:?}")]
    DuplicateId { line: u64, id: String },
    #[error("gold file: {0}")]
    Csv(#[from] csv::Error),
    #[error("gold file I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldRecord {
    pub tweet_id: String,
    pub text: String,
    pub labels: EmotionLabels,
}

fn header() -> Vec<&'static str> {
    let mut h = vec!["tweet_id", "text"];
    h.extend(Emotion::names());
    h
}

pub fn read_gold_from_reader<R: Read>(reader: R) -> Result<Vec<GoldRecord>, GoldError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    if rdr.headers()?.iter().collect::<Vec<_>>() != header() {
        return Err(GoldError::BadHeader);
    }
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let mut bits = [0u8; NUM_EMOTIONS];
        for (i, bit) in bits.iter_mut().enumerate() {
            *bit = match row[2 + i].trim() {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(GoldError::MalformedRow {
                        line,
                        reason: format!("{} cell {other:?} is not 0 or 1", Emotion::ALL[i]),
                    })
                }
            };
        }
        let tweet_id = row[0].to_string();
        if tweet_id.is_empty() {
            return Err(GoldError::MalformedRow { line, reason: "empty tweet_id".into() });
        }
        if !seen.insert(tweet_id.clone()) {
            return Err(GoldError::DuplicateId { line, id: tweet_id });
        }
        out.push(GoldRecord {
            tweet_id,
            text: row[1].to_string(),
            labels: EmotionLabels::from_bits(&bits).expect("bits are 0/1"),
        });
    }
    Ok(out)
}

pub fn read_gold_csv(path: impl AsRef<Path>) -> Result<Vec<GoldRecord>, GoldError> {
    read_gold_from_reader(File::open(path)?)
}

/// Write rows in the given order.
pub fn write_gold_csv<W: Write>(writer: W, records: &[GoldRecord]) -> Result<(), GoldError> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    wtr.write_record(header())?;
    for r in records {
        let bits = r.labels.bits().map(|b| b.to_string());
        let mut row = vec![r.tweet_id.as_str(), r.text.as_str()];
        row.extend(bits.iter().map(String::as_str));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
