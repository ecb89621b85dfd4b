use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("embedding line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("embedding line {line}: dimension {got}, expected {expected}")]
    Dimension { line: usize, expected: usize, got: usize },
    #[error("embedding line {line}: duplicate tweet_id {id:?}")]
    Duplicate { line: usize, id: String },
    #[error("embedding file I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// One line of the embedding file: `{"tweet_id": "...", "v": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub tweet_id: String,
    pub v: Vec<f64>,
}

/// Embeddings keyed by tweet id, all of one dimension.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn from_records<I>(records: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = EmbeddingRecord>,
    {
        let mut table = Self::default();
        for (i, r) in records.into_iter().enumerate() {
            table.push(i + 1, r)?;
        }
        Ok(table)
    }

    fn push(&mut self, line: usize, r: EmbeddingRecord) -> Result<(), EmbeddingError> {
        if r.v.is_empty() {
            return Err(EmbeddingError::Malformed { line, reason: "empty vector".into() });
        }
        if !r.v.iter().all(|x| x.is_finite()) {
            return Err(EmbeddingError::Malformed { line, reason: "non-finite component".into() });
        }
        if self.vectors.is_empty() {
            self.dim = r.v.len();
        } else if r.v.len() != self.dim {
            return Err(EmbeddingError::Dimension { line, expected: self.dim, got: r.v.len() });
        }
        if self.vectors.contains_key(&r.tweet_id) {
            return Err(EmbeddingError::Duplicate { line, id: r.tweet_id });
        }
        self.vectors.insert(r.tweet_id, r.v);
        Ok(())
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let reader = BufReader::new(File::open(path)?);
        let mut table = Self::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: EmbeddingRecord = serde_json::from_str(&line)
                .map_err(|e| EmbeddingError::Malformed { line: i + 1, reason: e.to_string() })?;
            table.push(i + 1, record)?;
        }
        Ok(table)
    }

    /// Zero for an empty table.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, tweet_id: &str) -> Option<&[f64]> {
        self.vectors.get(tweet_id).map(Vec::as_slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, v: &[f64]) -> EmbeddingRecord {
        EmbeddingRecord { tweet_id: id.into(), v: v.to_vec() }
    }

    #[test]
    fn validates_records() {
        let t = EmbeddingTable::from_records([rec("a", &[1.0, 2.0]), rec("b", &[0.0, 0.0])]).unwrap();
        assert_eq!((t.dim(), t.len()), (2, 2));
        assert_eq!(t.get("a"), Some(&[1.0, 2.0][..]));
        assert!(matches!(
            EmbeddingTable::from_records([rec("a", &[1.0]), rec("b", &[1.0, 2.0])]),
            Err(EmbeddingError::Dimension { line: 2, .. })
        ));
        assert!(matches!(
            EmbeddingTable::from_records([rec("a", &[1.0]), rec("a", &[2.0])]),
            Err(EmbeddingError::Duplicate { .. })
        ));
        assert!(EmbeddingTable::from_records([rec("a", &[])]).is_err());
    }

    #[test]
    fn reads_ndjson() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.ndjson");
        std::fs::write(&p, "{\"tweet_id\":\"x\",\"v\":[0.5,1]}\n\n{\"tweet_id\":\"y\",\"v\":[1,2]}\n").unwrap();
        let t = EmbeddingTable::from_path(&p).unwrap();
        assert_eq!(t.get("y"), Some(&[1.0, 2.0][..]));
        std::fs::write(&p, "{\"id\":\"x\"}\n").unwrap();
        assert!(matches!(EmbeddingTable::from_path(&p), Err(EmbeddingError::Malformed { line: 1, .. })));
    }
}
