//! Tweet archive ingestion: parse, pseudonymize, filter, deduplicate, persist.

mod keywords;
mod record;
mod store;

use std::io::BufRead;
use std::path::Path;

use serde::Serialize;

pub use keywords::{filter_by_keywords, text_has_keyword, KeywordError, KeywordList};
pub use record::{
    is_valid_scope, parse_tweet_record, pseudonymize, RawTweet, RecordError, MENTION_PLACEHOLDER,
};
pub(crate) use store::write_atomic;
pub use store::{CorpusStore, Manifest, PartitionEntry, StoreError, StoreWriter};

/// Only Spanish is accepted when a record declares its language.
pub const ACCEPTED_LANG: &str = "es";

/// Per-run counts; `read = accepted + rejected_parse + rejected_filter + duplicates`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct IngestReport {
    pub read: usize,
    pub accepted: usize,
    pub rejected_parse: usize,
    pub rejected_filter: usize,
    pub duplicates: usize,
}

impl IngestReport {
    pub fn is_consistent(&self) -> bool {
        self.read == self.accepted + self.rejected_parse + self.rejected_filter + self.duplicates
    }
}

/// Language and keyword filter applied to parsed records.
pub fn passes_filter(tweet: &RawTweet, keywords: &KeywordList) -> bool {
    let lang_ok = tweet.lang.as_deref().is_none_or(|l| l == ACCEPTED_LANG);
    lang_ok && filter_by_keywords(tweet, keywords)
}

/// Ingest newline-delimited records into the store at `store_root`.
///
/// Per-record failures are counted, never propagated. Blank lines are skipped
/// without being counted. The first record seen for an id wins.
pub fn ingest_corpus<R: BufRead>(
    source: R,
    keywords: &KeywordList,
    store_root: impl AsRef<Path>,
    salt: &[u8],
) -> Result<IngestReport, StoreError> {
    let mut writer = CorpusStore::writer(store_root.as_ref())?;
    let mut report = IngestReport::default();
    for line in source.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        report.read += 1;
        let tweet = match parse_tweet_record(&line, salt) {
            Ok(t) => t,
            Err(_) => {
                report.rejected_parse += 1;
                continue;
            }
        };
        if !passes_filter(&tweet, keywords) {
            report.rejected_filter += 1;
        } else if writer.insert(tweet) {
            report.accepted += 1;
        } else {
            report.duplicates += 1;
        }
    }
    writer.commit()?;
    debug_assert!(report.is_consistent());
    Ok(report)
}
