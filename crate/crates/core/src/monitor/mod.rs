//! Daily per-scope emotion counts and percentages.

mod store;

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::calendar::local_date;
use crate::classify::{threshold, ClassifyError, ClassifyInput, EmotionClassifier};
use crate::emotion::{EmotionLabels, NUM_EMOTIONS};
use crate::ingest::{CorpusStore, RawTweet, StoreError};
use crate::textprep::normalize;

pub use store::{
    answer_series, export_series_csv, parse_series_csv, render_series_csv, render_series_json,
    series_csv_string, series_query, write_series_store, EmotionValue, ProjectedPoint,
    QueryError, SeriesFormat, SeriesMeta, SeriesRequest, SeriesStore, SeriesStoreError,
};

/// One local calendar day.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub date: NaiveDate,
    pub counts: [u64; NUM_EMOTIONS],
    pub total: u64,
    pub pct: [f64; NUM_EMOTIONS],
}

impl SeriesPoint {
    /// `pct_e = 100 · counts_e / total`, 0 when `total` is 0.
    pub fn new(date: NaiveDate, counts: [u64; NUM_EMOTIONS], total: u64) -> Self {
        let pct = counts.map(|c| if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 });
        Self { date, counts, total, pct }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionSeries {
    pub scope: String,
    /// Strictly increasing by date.
    pub points: Vec<SeriesPoint>,
}

/// Bucket labeled tweets of `scope` by local day. Days without tweets are
/// omitted; every tweet counts toward `total` whatever its labels.
pub fn aggregate_daily<'a, I>(labeled: I, scope: &str) -> EmotionSeries
where
    I: IntoIterator<Item = (&'a RawTweet, EmotionLabels)>,
{
    let mut days: BTreeMap<NaiveDate, ([u64; NUM_EMOTIONS], u64)> = BTreeMap::new();
    for (tweet, labels) in labeled {
        if tweet.scope != scope {
            continue;
        }
        let (counts, total) = days.entry(local_date(tweet.created_at)).or_default();
        *total += 1;
        for e in labels.emotions() {
            counts[e.index()] += 1;
        }
    }
    EmotionSeries {
        scope: scope.to_string(),
        points: days
            .into_iter()
            .map(|(date, (counts, total))| SeriesPoint::new(date, counts, total))
            .collect(),
    }
}

/// Chunk size for classifier calls while labeling a corpus.
const LABEL_CHUNK: usize = 512;

/// Label tweets with `classifier` at `tau`. Text-based backends see the
/// normalized text.
pub fn label_with_classifier(
    tweets: &[RawTweet],
    classifier: &dyn EmotionClassifier,
    tau: f64,
) -> Result<Vec<EmotionLabels>, ClassifyError> {
    let mut out = Vec::with_capacity(tweets.len());
    for chunk in tweets.chunks(LABEL_CHUNK) {
        let texts: Vec<String> = chunk.iter().map(|t| normalize(&t.text).into_string()).collect();
        let inputs: Vec<ClassifyInput<'_>> = chunk
            .iter()
            .zip(&texts)
            .map(|(t, text)| ClassifyInput { tweet_id: &t.id, text })
            .collect();
        out.extend(classifier.classify(&inputs)?.iter().map(|s| threshold(s, tau)));
    }
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum BuildSeriesError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Read one scope from the corpus store, classify it and aggregate.
pub fn build_series(
    store: &CorpusStore,
    scope: &str,
    classifier: &dyn EmotionClassifier,
    tau: f64,
) -> Result<EmotionSeries, BuildSeriesError> {
    let tweets = store.read_scope(scope)?;
    let labels = label_with_classifier(&tweets, classifier, tau)?;
    Ok(aggregate_daily(tweets.iter().zip(labels), scope))
}
