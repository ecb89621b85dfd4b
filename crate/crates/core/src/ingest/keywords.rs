use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::ingest::RawTweet;
use crate::textprep::normalize_words;

#[derive(Debug, thiserror::Error)]
pub enum KeywordError {
    #[error("keyword {0:?} does not normalize to exactly one word")]
    NotSingleWord(String),
    #[error("keyword list is empty")]
    Empty,
    #[error("reading keywords: {0}")]
    Io(#[from] std::io::Error),
}

/// Normalized single-word outbreak keywords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordList {
    terms: BTreeSet<String>,
}

impl KeywordList {
    pub fn new<I, S>(terms: I) -> Result<Self, KeywordError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for raw in terms {
            let raw = raw.as_ref();
            let mut words = normalize_words(raw);
            if words.len() != 1 {
                return Err(KeywordError::NotSingleWord(raw.to_string()));
            }
            set.insert(words.pop().expect("one word"));
        }
        if set.is_empty() {
            return Err(KeywordError::Empty);
        }
        Ok(Self { terms: set })
    }

    /// One keyword per line; blank lines and lines starting with `#` are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, KeywordError> {
        let text = fs::read_to_string(path)?;
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.terms.contains(word)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }
}

/// True iff a normalized word of the tweet equals a keyword.
pub fn filter_by_keywords(tweet: &RawTweet, keywords: &KeywordList) -> bool {
    text_has_keyword(&tweet.text, keywords)
}

pub fn text_has_keyword(text: &str, keywords: &KeywordList) -> bool {
    normalize_words(text).iter().any(|w| keywords.contains(w))
}
