use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Punctuation marks that survive normalization and become standalone words.
pub const KEPT_MARKS: [char; 4] = ['!', '?', '¡', '¿'];

const COMBINING_TILDE: char = '\u{0303}';

/// Text restricted to `[a-z 0-9 ñ ! ? ¡ ¿ space]`, single-spaced and trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NormalizedText(String);

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<str> for NormalizedText {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// True for characters of the normalized alphabet other than the space.
pub fn is_normalized_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c == 'ñ' || KEPT_MARKS.contains(&c)
}

fn url_or_mention() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S*|@\w+").expect("static regex"))
}

/// Normalize tweet text.
///
/// Steps run in a fixed order: URLs and `@mentions` are dropped, `#` is
/// stripped while its word is kept, diacritics are folded (ñ survives),
/// everything is lowercased, characters outside the alphabet are removed, and
/// whitespace is collapsed.
pub fn normalize(text: &str) -> NormalizedText {
    let without_links = url_or_mention().replace_all(text, " ");
    let without_hash = without_links.replace('#', "");

    let mut folded = String::with_capacity(without_hash.len());
    let mut chars = without_hash.nfd().peekable();
    while let Some(c) = chars.next() {
        if (c == 'n' || c == 'N') && chars.peek() == Some(&COMBINING_TILDE) {
            chars.next();
            folded.push('ñ');
        } else if c.is_whitespace() {
            folded.push(' ');
        } else if !is_combining_mark(c) {
            for lower in c.to_lowercase() {
                if is_normalized_char(lower) {
                    folded.push(lower);
                }
            }
        }
    }

    let mut out = String::with_capacity(folded.len());
    for word in folded.split(' ').filter(|w| !w.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    NormalizedText(out)
}

/// Split normalized text into words; each kept punctuation mark becomes its
/// own word.
pub fn split_words(text: &NormalizedText) -> Vec<String> {
    let mut words = Vec::new();
    for chunk in text.as_str().split(' ').filter(|c| !c.is_empty()) {
        let mut current = String::new();
        for c in chunk.chars() {
            if KEPT_MARKS.contains(&c) {
                if !current.is_empty() {
                    words.push(std::mem::take(&mut current));
                }
                words.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            words.push(current);
        }
    }
    words
}

/// `split_words(&normalize(text))`.
pub fn normalize_words(text: &str) -> Vec<String> {
    split_words(&normalize(text))
}
