//! Greedy longest-prefix WordPiece tokenization.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

/// Continuation prefix for non-initial pieces.
pub const CONTINUATION_PREFIX: &str = "##";

/// Default maximum sequence length in content tokens.
pub const DEFAULT_MAX_LEN: usize = 65;

#[derive(Debug, thiserror::Error)]
pub enum TokenizerError {
    #[error("vocabulary is empty")]
    EmptyVocab,
    #[error("duplicate vocabulary token {token:?} at line {line}")]
    DuplicateToken { token: String, line: usize },
    #[error("unknown token {0:?} is not in the vocabulary")]
    UnkNotInVocab(String),
    #[error("max_len must be at least 1")]
    ZeroMaxLen,
    #[error("reading vocabulary: {0}")]
    Io(#[from] std::io::Error),
}

/// Validated tokenizer configuration. Token id = position in `vocab`.
#[derive(Debug, Clone)]
pub struct WordPieceTokenizer {
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    unk_token: String,
    max_len: usize,
}

impl WordPieceTokenizer {
    pub fn new(
        vocab: Vec<String>,
        unk_token: impl Into<String>,
        max_len: usize,
    ) -> Result<Self, TokenizerError> {
        let unk_token = unk_token.into();
        if vocab.is_empty() {
            return Err(TokenizerError::EmptyVocab);
        }
        if max_len == 0 {
            return Err(TokenizerError::ZeroMaxLen);
        }
        let mut ids = HashMap::with_capacity(vocab.len());
        for (i, token) in vocab.iter().enumerate() {
            if ids.insert(token.clone(), i as u32).is_some() {
                return Err(TokenizerError::DuplicateToken { token: token.clone(), line: i + 1 });
            }
        }
        if !ids.contains_key(&unk_token) {
            return Err(TokenizerError::UnkNotInVocab(unk_token));
        }
        Ok(Self { vocab, ids, unk_token, max_len })
    }

    /// Load a vocabulary file: UTF-8, one token per line.
    pub fn from_vocab_file(
        path: impl AsRef<Path>,
        unk_token: impl Into<String>,
        max_len: usize,
    ) -> Result<Self, TokenizerError> {
        let text = fs::read_to_string(path)?;
        let vocab = text
            .lines()
            .map(|l| l.trim_end_matches('\r').to_string())
            .collect::<Vec<_>>();
        // a trailing newline must not add an empty token
        let vocab = match vocab.last() {
            Some(last) if last.is_empty() => vocab[..vocab.len() - 1].to_vec(),
            _ => vocab,
        };
        Self::new(vocab, unk_token, max_len)
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn unk_token(&self) -> &str {
        &self.unk_token
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// Tokenize a word sequence; output is truncated to `max_len` tokens.
    pub fn tokenize<S: AsRef<str>>(&self, words: &[S]) -> Vec<String> {
        let mut out = Vec::new();
        for word in words {
            if out.len() >= self.max_len {
                break;
            }
            self.tokenize_word(word.as_ref(), &mut out);
        }
        out.truncate(self.max_len);
        out
    }

    /// Token ids for [`tokenize`](Self::tokenize).
    pub fn encode<S: AsRef<str>>(&self, words: &[S]) -> Vec<u32> {
        self.tokenize(words)
            .iter()
            .map(|t| self.ids[t.as_str()])
            .collect()
    }

    fn tokenize_word(&self, word: &str, out: &mut Vec<String>) {
        if word.is_empty() {
            return;
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        let mut candidate = String::new();
        while start < word.len() {
            let mut found = None;
            // try the longest remaining slice first
            let ends = word[start..]
                .char_indices()
                .skip(1)
                .map(|(i, _)| start + i)
                .chain(std::iter::once(word.len()));
            let mut ends = ends.collect::<Vec<_>>();
            ends.reverse();
            for end in ends {
                candidate.clear();
                if start > 0 {
                    candidate.push_str(CONTINUATION_PREFIX);
                }
                candidate.push_str(&word[start..end]);
                if self.ids.contains_key(candidate.as_str()) {
                    found = Some(end);
                    break;
                }
            }
            match found {
                Some(end) => {
                    pieces.push(candidate.clone());
                    start = end;
                }
                None => {
                    out.push(self.unk_token.clone());
                    return;
                }
            }
        }
        out.extend(pieces);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> WordPieceTokenizer {
        let vocab = ["que", "ale", "##gria", "##s", "miedo", "!", "[UNK]"];
        WordPieceTokenizer::new(vocab.iter().map(|s| s.to_string()).collect(), "[UNK]", 65)
            .unwrap()
    }

    #[test]
    fn worked_examples() {
        let tok = demo();
        assert_eq!(tok.tokenize(&["alegria"]), ["ale", "##gria"]);
        assert!(tok.tokenize::<&str>(&[]).is_empty());
        assert_eq!(tok.tokenize(&["miedo", "!", "zzz"]), ["miedo", "!", "[UNK]"]);
    }

    #[test]
    fn partial_decomposition_is_unknown() {
        let tok = demo();
        // "ale" matches but "gri" has no continuation piece
        assert_eq!(tok.tokenize(&["alegri"]), ["[UNK]"]);
        assert_eq!(tok.tokenize(&["alegrias"]), ["ale", "##gria", "##s"]);
    }

    #[test]
    fn truncates_to_max_len() {
        let vocab = vec!["a".to_string(), "##a".to_string(), "[UNK]".to_string()];
        let tok = WordPieceTokenizer::new(vocab, "[UNK]", 3).unwrap();
        assert_eq!(tok.tokenize(&["aaaa"]), ["a", "##a", "##a"]);
        assert_eq!(tok.encode(&["a", "a"]), [0, 0]);
    }

    #[test]
    fn config_validation() {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert!(matches!(
            WordPieceTokenizer::new(vec![], "[UNK]", 65),
            Err(TokenizerError::EmptyVocab)
        ));
        assert!(matches!(
            WordPieceTokenizer::new(v(&["a", "a", "[UNK]"]), "[UNK]", 65),
            Err(TokenizerError::DuplicateToken { line: 2, .. })
        ));
        assert!(matches!(
            WordPieceTokenizer::new(v(&["a"]), "[UNK]", 65),
            Err(TokenizerError::UnkNotInVocab(_))
        ));
        assert!(matches!(
            WordPieceTokenizer::new(v(&["[UNK]"]), "[UNK]", 0),
            Err(TokenizerError::ZeroMaxLen)
        ));
    }

    #[test]
    fn multibyte_words() {
        let v = ["añ", "##o", "[UNK]"].iter().map(|s| s.to_string()).collect();
        let tok = WordPieceTokenizer::new(v, "[UNK]", 65).unwrap();
        assert_eq!(tok.tokenize(&["año"]), ["añ", "##o"]);
    }
}
