use std::sync::OnceLock;

use chrono::{DateTime, SubsecRound, Utc};
use hmac::{Hmac, Mac};
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::calendar::timestamp_serde;

/// A validated, pseudonymized tweet as persisted in the corpus store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTweet {
    pub id: String,
    #[serde(with = "timestamp_serde")]
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub author_key: String,
    pub scope: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("record text is blank")]
    EmptyText,
}

#[derive(Deserialize)]
struct InputRecord {
    id: Option<String>,
    created_at: Option<String>,
    text: Option<String>,
    user: Option<String>,
    scope: Option<String>,
    #[serde(default)]
    lang: Option<String>,
}

/// Placeholder written in place of every `@handle` inside stored text.
pub const MENTION_PLACEHOLDER: &str = "@user";

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@\w+").expect("static regex"))
}

/// Keyed pseudonym: HMAC-SHA256(salt, handle), first 16 hex characters.
/// Handles compare case-insensitively and without a leading `@`.
pub fn pseudonymize(handle: &str, salt: &[u8]) -> String {
    let canonical = handle.trim().trim_start_matches('@').to_lowercase();
    let mut mac = Hmac::<Sha256>::new_from_slice(salt).expect("HMAC accepts any key length");
    mac.update(canonical.as_bytes());
    let digest = mac.finalize().into_bytes();
    hex::encode(&digest[..8])
}

/// Scope tags become directory names, so only a safe alphabet is accepted.
pub fn is_valid_scope(scope: &str) -> bool {
    !scope.is_empty()
        && !scope.starts_with('.')
        && scope.len() <= 128
        && scope
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn required(field: Option<String>, name: &str) -> Result<String, RecordError> {
    match field {
        Some(v) if !v.trim().is_empty() => Ok(v),
        Some(_) => Err(RecordError::MalformedRecord(format!("field `{name}` is empty"))),
        None => Err(RecordError::MalformedRecord(format!("missing field `{name}`"))),
    }
}

/// Parse one input line into a [`RawTweet`].
///
/// The author handle is replaced by its pseudonym and `@mentions` inside the
/// text are replaced by [`MENTION_PLACEHOLDER`]; unknown fields are dropped.
pub fn parse_tweet_record(line: &str, salt: &[u8]) -> Result<RawTweet, RecordError> {
    let input: InputRecord =
        serde_json::from_str(line).map_err(|e| RecordError::MalformedRecord(e.to_string()))?;

    let id = required(input.id, "id")?;
    let created_raw = required(input.created_at, "created_at")?;
    let text = input
        .text
        .ok_or_else(|| RecordError::MalformedRecord("missing field `text`".into()))?;
    let user = required(input.user, "user")?;
    let scope = required(input.scope, "scope")?;

    let created_at = DateTime::parse_from_rfc3339(&created_raw)
        .map_err(|e| RecordError::MalformedRecord(format!("created_at: {e}")))?
        .with_timezone(&Utc)
        .trunc_subsecs(0);
    if !is_valid_scope(&scope) {
        return Err(RecordError::MalformedRecord(format!("invalid scope {scope:?}")));
    }
    if text.trim().is_empty() {
        return Err(RecordError::EmptyText);
    }
    let lang = input.lang.map(|l| l.trim().to_lowercase()).filter(|l| !l.is_empty());

    Ok(RawTweet {
        id,
        created_at,
        text: mention_re().replace_all(&text, MENTION_PLACEHOLDER).into_owned(),
        author_key: pseudonymize(&user, salt),
        scope,
        lang,
    })
}
