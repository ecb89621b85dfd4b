use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::emotion::{Emotion, NUM_EMOTIONS};
use crate::textprep::normalize_words;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("lexicon header must be `emotion,term`")]
    BadHeader,
    #[error("lexicon term {term:?} for {emotion} is empty after normalization")]
    EmptyTerm { emotion: Emotion, term: String },
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("reading lexicon: {0}")]
    Csv(#[from] csv::Error),
}

/// Emotion → normalized word sequences.
///
/// Terms are normalized on insertion with the same rules as tweet text, so any
/// term is matchable against normalized words. Duplicates within one emotion
/// collapse.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    terms: [Vec<Vec<String>>; NUM_EMOTIONS],
    by_first_word: HashMap<String, Vec<(Emotion, usize)>>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<'a, I>(entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (Emotion, &'a str)>,
    {
        let mut lexicon = Self::new();
        for (emotion, term) in entries {
            lexicon.insert(emotion, term)?;
        }
        Ok(lexicon)
    }

    /// Add a raw term; returns false when it was already present.
    pub fn insert(&mut self, emotion: Emotion, term: &str) -> Result<bool, LexiconError> {
        let words = normalize_words(term);
        if words.is_empty() {
            return Err(LexiconError::EmptyTerm { emotion, term: term.to_string() });
        }
        let list = &mut self.terms[emotion.index()];
        if list.contains(&words) {
            return Ok(false);
        }
        self.by_first_word
            .entry(words[0].clone())
            .or_default()
            .push((emotion, list.len()));
        list.push(words);
        Ok(true)
    }

    /// Read the `emotion,term` CSV format.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, LexiconError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() != 2 || &header[0] != "emotion" || &header[1] != "term" {
            return Err(LexiconError::BadHeader);
        }
        let mut lexicon = Self::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let emotion = row[0].trim().parse::<Emotion>().map_err(|e| {
                LexiconError::MalformedRow { line, reason: e.to_string() }
            })?;
            lexicon.insert(emotion, &row[1])?;
        }
        Ok(lexicon)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::from_csv_reader(File::open(path)?)
    }

    pub fn terms(&self, emotion: Emotion) -> &[Vec<String>] {
        &self.terms[emotion.index()]
    }

    pub fn len(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Terms whose first word is `word`, with their emotion.
    pub(crate) fn candidates(&self, word: &str) -> impl Iterator<Item = (Emotion, &[String])> {
        self.by_first_word
            .get(word)
            .into_iter()
            .flatten()
            .map(|&(e, i)| (e, self.terms[e.index()][i].as_slice()))
    }

    /// SHA-256 over the sorted normalized content; independent of file order.
    pub fn checksum(&self) -> String {
        let mut lines = Vec::with_capacity(self.len());
        for e in Emotion::ALL {
            for term in self.terms(e) {
                lines.push(format!("{}\t{}", e.name(), term.join(" ")));
            }
        }
        lines.sort();
        let mut hasher = Sha256::new();
        for line in &lines {
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}
