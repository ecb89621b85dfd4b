//! Spanish tweet normalization, word splitting, lexicon matching and
//! WordPiece tokenization. Everything here is a pure function.

mod lexicon_match;
mod normalize;
mod wordpiece;

pub use lexicon_match::{match_lexicon, remove_lexicon_terms, strip_lexicon, LexiconMatches, Span};
pub use normalize::{
    is_normalized_char, normalize, normalize_words, split_words, NormalizedText, KEPT_MARKS,
};
pub use wordpiece::{TokenizerError, WordPieceTokenizer, CONTINUATION_PREFIX, DEFAULT_MAX_LEN};
