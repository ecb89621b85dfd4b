//! Weak labels from lexicons, gold labels from survey agreement, and
//! training sets built from the corpus store.

mod dataset;
mod lexicon;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::emotion::{Emotion, EmotionLabels, NUM_EMOTIONS};
use crate::textprep::match_lexicon;

pub use dataset::{
    build_training_set, label_tweets, read_dataset, write_dataset, DatasetError, DatasetExample,
    TrainingSet,
};
pub use lexicon::{Lexicon, LexiconError};

/// A label needs at least two agreeing annotators by default.
pub const DEFAULT_MIN_AGREEMENT: usize = 2;

/// Emotion `e` is set iff some lexicon term of `e` occurs in `words`.
pub fn weak_label<S: AsRef<str>>(words: &[S], lexicon: &Lexicon) -> EmotionLabels {
    let matches = match_lexicon(words, lexicon);
    EmotionLabels::from_emotions(Emotion::ALL.into_iter().filter(|e| matches.matched(*e)))
}

/// One annotator's selection for one tweet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub tweet_id: String,
    pub annotator_id: String,
    pub selected: EmotionLabels,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AggregationError {
    #[error("annotator {annotator_id:?} gave conflicting answers for tweet {tweet_id:?}")]
    ConflictingDuplicate { tweet_id: String, annotator_id: String },
    #[error("min_agreement must be at least 1")]
    ZeroAgreement,
}

/// Agreement vote: emotion `e` is set for a tweet iff at least
/// `min_agreement` distinct annotators selected it. Tweets whose result is
/// empty are kept with empty labels. Identical repeated records count once.
pub fn aggregate_annotations(
    records: &[AnnotationRecord],
    min_agreement: usize,
) -> Result<BTreeMap<String, EmotionLabels>, AggregationError> {
    if min_agreement == 0 {
        return Err(AggregationError::ZeroAgreement);
    }
    let mut seen: HashMap<(&str, &str), EmotionLabels> = HashMap::new();
    let mut votes: BTreeMap<String, [usize; NUM_EMOTIONS]> = BTreeMap::new();
    let mut annotators: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        match seen.get(&(r.tweet_id.as_str(), r.annotator_id.as_str())) {
            Some(prev) if *prev == r.selected => continue,
            Some(_) => {
                return Err(AggregationError::ConflictingDuplicate {
                    tweet_id: r.tweet_id.clone(),
                    annotator_id: r.annotator_id.clone(),
                })
            }
            None => {}
        }
        seen.insert((&r.tweet_id, &r.annotator_id), r.selected);
        annotators.entry(&r.tweet_id).or_default().insert(&r.annotator_id);
        let counts = votes.entry(r.tweet_id.clone()).or_default();
        for e in r.selected.emotions() {
            counts[e.index()] += 1;
        }
    }
    Ok(votes
        .into_iter()
        .map(|(id, counts)| (id, EmotionLabels(counts.map(|c| c >= min_agreement))))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use Emotion::*;

    fn lex() -> Lexicon {
        Lexicon::from_entries([(Joy, "alegria"), (Joy, "feliz"), (Fear, "miedo")]).unwrap()
    }

    fn rec(tweet: &str, annotator: &str, emotions: &[Emotion]) -> AnnotationRecord {
        AnnotationRecord {
            tweet_id: tweet.into(),
            annotator_id: annotator.into(),
            selected: EmotionLabels::from_emotions(emotions.iter().copied()),
        }
    }

    #[test]
    fn weak_label_examples() {
        assert_eq!(weak_label(&["que", "alegria"], &lex()), EmotionLabels::from_emotions([Joy]));
        assert!(weak_label(&["hola"], &lex()).is_empty());
        assert_eq!(
            weak_label(&["miedo", "feliz"], &lex()),
            EmotionLabels::from_emotions([Joy, Fear])
        );
    }

    #[test]
    fn aggregation_examples() {
        let out = aggregate_annotations(
            &[rec("t", "a", &[Joy]), rec("t", "b", &[Joy]), rec("t", "c", &[Fear])],
            2,
        )
        .unwrap();
        assert_eq!(out["t"], EmotionLabels::from_emotions([Joy]));

        let out = aggregate_annotations(&[rec("t", "a", &[Joy])], 2).unwrap();
        assert!(out["t"].is_empty());

        let out =
            aggregate_annotations(&[rec("t", "a", &[Joy, Fear]), rec("t", "b", &[Fear])], 2)
                .unwrap();
        assert_eq!(out["t"], EmotionLabels::from_emotions([Fear]));
    }

    #[test]
    fn duplicates() {
        // a repeated identical submission does not count as a second vote
        let out = aggregate_annotations(&[rec("t", "a", &[Joy]), rec("t", "a", &[Joy])], 2).unwrap();
        assert!(out["t"].is_empty());
        let err = aggregate_annotations(&[rec("t", "a", &[Joy]), rec("t", "a", &[Fear])], 2);
        assert!(matches!(err, Err(AggregationError::ConflictingDuplicate { .. })));
        assert!(matches!(aggregate_annotations(&[], 0), Err(AggregationError::ZeroAgreement)));
    }
}
