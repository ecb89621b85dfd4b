use crate::emotion::{Emotion, NUM_EMOTIONS};
use crate::labeling::Lexicon;

/// Inclusive word-index range `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.start..=self.end).contains(&index)
    }
}

/// Lexicon hits per emotion, each list sorted by span.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LexiconMatches(pub [Vec<Span>; NUM_EMOTIONS]);

impl LexiconMatches {
    pub fn spans(&self, emotion: Emotion) -> &[Span] {
        &self.0[emotion.index()]
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(Vec::is_empty)
    }

    pub fn matched(&self, emotion: Emotion) -> bool {
        !self.spans(emotion).is_empty()
    }
}

/// Every contiguous occurrence of every lexicon term in `words`.
pub fn match_lexicon<S: AsRef<str>>(words: &[S], lexicon: &Lexicon) -> LexiconMatches {
    let mut matches = LexiconMatches::default();
    for (start, word) in words.iter().enumerate() {
        for (emotion, term) in lexicon.candidates(word.as_ref()) {
            let end = start + term.len();
            if end <= words.len()
                && words[start..end]
                    .iter()
                    .zip(term)
                    .all(|(w, t)| w.as_ref() == t)
            {
                matches.0[emotion.index()].push(Span::new(start, end - 1));
            }
        }
    }
    for spans in &mut matches.0 {
        spans.sort_unstable();
        spans.dedup();
    }
    matches
}

/// Remove every word covered by any span, keeping the order of the rest.
pub fn remove_lexicon_terms<S: AsRef<str>>(words: &[S], matches: &LexiconMatches) -> Vec<String> {
    let mut covered = vec![false; words.len()];
    for span in matches.0.iter().flatten() {
        for flag in covered.iter_mut().take(span.end + 1).skip(span.start) {
            *flag = true;
        }
    }
    words
        .iter()
        .zip(covered)
        .filter(|(_, c)| !c)
        .map(|(w, _)| w.as_ref().to_string())
        .collect()
}

/// Repeat match-and-remove until no term matches.
///
/// A single pass can join the neighbours of a removed word into a new
/// multi-word match; this loop guarantees the result is lexicon-free.
pub fn strip_lexicon<S: AsRef<str>>(words: &[S], lexicon: &Lexicon) -> Vec<String> {
    let mut current: Vec<String> = words.iter().map(|w| w.as_ref().to_string()).collect();
    loop {
        let matches = match_lexicon(&current, lexicon);
        if matches.is_empty() {
            return current;
        }
        current = remove_lexicon_terms(&current, &matches);
    }
}
