#![allow(dead_code)]

pub mod oracle;
pub mod stub;
pub mod synth;

use std::path::PathBuf;

use emomon_core::labeling::Lexicon;
use emomon_core::textprep::WordPieceTokenizer;

/// Fixture files live with the core crate; this module is also compiled
/// into the cli crate's tests, whose manifest dir is a sibling.
pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

pub fn demo_lexicon() -> Lexicon {
    Lexicon::from_csv_path(data_path("demo_lexicon.csv")).unwrap()
}

pub fn demo_tokenizer() -> WordPieceTokenizer {
    WordPieceTokenizer::from_vocab_file(data_path("demo_vocab.txt"), "[UNK]", 65).unwrap()
}

/// `(text, expected tokens)` rows of the tokenizer golden file.
pub fn golden_cases() -> Vec<(String, Vec<String>)> {
    std::fs::read_to_string(data_path("tokenizer_golden.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (text, tokens) = l.split_once('\t').expect("tab-separated row");
            (text.to_string(), tokens.split_whitespace().map(str::to_string).collect())
        })
        .collect()
}

/// Strings biased toward what tweets contain: Spanish letters with and
/// without accents, marks, digits, URLs, mentions, hashtags, odd spacing.
pub fn tweetish() -> impl proptest::strategy::Strategy<Value = String> {
    use proptest::prelude::*;
    let piece = prop_oneof![
        "[a-zA-Z]{1,8}",
        "[áéíóúüñÁÉÍÓÚÜÑ]{1,3}",
        Just("¡".to_string()),
        Just("¿".to_string()),
        Just("!".to_string()),
        Just("?".to_string()),
        "[0-9]{1,4}",
        "https?://[a-z./]{1,12}",
        "@[a-z_]{1,8}",
        "#[a-zA-Z]{1,8}",
        "[ \t\n\u{a0}]{1,3}",
        "\\PC{1,3}",
    ];
    proptest::collection::vec(piece, 0..16).prop_map(|v| v.concat())
}

pub const SALT: &[u8] = b"test-salt";

/// Ingest `lines` into `store`, then label every scope with the demo
/// lexicon and write its series under `series_dir`. Returns the ingest
/// report and `(scope, csv bytes)` per scope.
pub fn run_pipeline(
    lines: &[String],
    store: &std::path::Path,
    series_dir: &std::path::Path,
) -> (emomon_core::ingest::IngestReport, Vec<(String, Vec<u8>)>) {
    use emomon_core::classify::LexiconClassifier;
    use emomon_core::ingest::{ingest_corpus, CorpusStore, KeywordList};
    use emomon_core::monitor::{build_series, write_series_store, SeriesMeta};

    let keywords = KeywordList::new(synth::KEYWORDS.lines().filter(|l| !l.starts_with('#'))).unwrap();
    let report = ingest_corpus(lines.join("\n").as_bytes(), &keywords, store, SALT).unwrap();
    let corpus = CorpusStore::open(store).unwrap();
    let classifier = LexiconClassifier::new(demo_lexicon());
    let mut out = Vec::new();
    for scope in corpus.scopes().unwrap() {
        let series = build_series(&corpus, &scope, &classifier, 0.5).unwrap();
        let meta = SeriesMeta { classifier: "lexicon".into(), tau: 0.5, built_at: "fixed".into() };
        let path = write_series_store(series_dir, &series, &meta).unwrap();
        out.push((scope, std::fs::read(path).unwrap()));
    }
    (report, out)
}

/// A small series store: scope `med` with days 1, 2, 4 and 9 of August,
/// scope `bog` with one day.
pub fn series_fixture(dir: &std::path::Path) {
    use emomon_core::calendar::parse_date;
    use emomon_core::monitor::{write_series_store, EmotionSeries, SeriesMeta, SeriesPoint};
    let d = |s: &str| parse_date(s).unwrap();
    let med = EmotionSeries {
        scope: "med".into(),
        points: vec![
            SeriesPoint::new(d("2020-08-01"), [1, 0, 2, 0, 0, 0], 3),
            SeriesPoint::new(d("2020-08-02"), [0, 0, 0, 0, 0, 0], 1),
            SeriesPoint::new(d("2020-08-04"), [2, 1, 1, 0, 1, 1], 4),
            SeriesPoint::new(d("2020-08-09"), [5, 0, 1, 0, 0, 0], 6),
        ],
    };
    let bog = EmotionSeries { scope: "bog".into(), points: vec![SeriesPoint::new(d("2020-08-28"), [0, 0, 3, 1, 0, 0], 3)] };
    let meta = SeriesMeta { classifier: "lexicon".into(), tau: 0.5, built_at: "fixed".into() };
    write_series_store(dir, &med, &meta).unwrap();
    write_series_store(dir, &bog, &meta).unwrap();
}

/// Content hash of every file under `dir`, with relative paths and
/// modification times, for detecting writes.
pub fn tree_snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>, std::time::SystemTime)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                let modified = std::fs::metadata(&path).unwrap().modified().unwrap();
                out.push((rel, std::fs::read(&path).unwrap(), modified));
            }
        }
    }
    out.sort();
    out
}

/// Make every file and directory under `dir` read-only.
pub fn make_read_only(dir: &std::path::Path) {
    use std::os::unix::fs::PermissionsExt;
    let mut stack = vec![dir.to_path_buf()];
    let mut dirs = Vec::new();
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o444)).unwrap();
            }
        }
        dirs.push(d);
    }
    for d in dirs {
        std::fs::set_permissions(&d, std::fs::Permissions::from_mode(0o555)).unwrap();
    }
}

/// Undo [`make_read_only`] so the temp directory can be removed.
pub fn make_writable(dir: &std::path::Path) {
    use std::os::unix::fs::PermissionsExt;
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        std::fs::set_permissions(&d, std::fs::Permissions::from_mode(0o755)).unwrap();
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o644)).unwrap();
            }
        }
    }
}

/// A running API server over `store` with the demo lexicon backend.
pub struct ApiServer {
    pub url: String,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl ApiServer {
    pub fn start(state: emomon_core::service::AppState) -> Self {
        let (url, tx, handle) = stub::spawn_router(emomon_core::service::router(state));
        Self { url, shutdown: Some(tx), handle: Some(handle) }
    }

    pub fn lexicon(store: &std::path::Path) -> Self {
        let classifier = std::sync::Arc::new(emomon_core::classify::LexiconClassifier::new(demo_lexicon()));
        Self::start(emomon_core::service::AppState::new(store, classifier, 0.5, 8192))
    }

    pub fn get(&self, path: &str) -> (u16, String) {
        stub::http("GET", &format!("{}{path}", self.url), None)
    }

    pub fn post(&self, path: &str, body: &str) -> (u16, String) {
        stub::http("POST", &format!("{}{path}", self.url), Some(body))
    }
}

impl Drop for ApiServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
