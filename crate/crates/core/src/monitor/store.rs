//! Series store: `<dir>/series/<scope>.csv` plus `<dir>/meta.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::parse_date;
use crate::emotion::{parse_emotion_list, Emotion, NUM_EMOTIONS};
use crate::ingest::{is_valid_scope, write_atomic};
use crate::monitor::{EmotionSeries, SeriesPoint};

const SERIES_DIR: &str = "series";
const META: &str = "meta.json";

#[derive(Debug, thiserror::Error)]
pub enum SeriesStoreError {
    #[error("series file {path}: line {line}: {reason}")]
    Malformed { path: PathBuf, line: usize, reason: String },
    #[error("series store I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("series metadata: {0}")]
    Meta(#[from] serde_json::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error("unknown scope {0:?}")]
    UnknownScope(String),
    #[error("invalid range: from {from} is after to {to}")]
    InvalidRange { from: NaiveDate, to: NaiveDate },
    #[error("bad query parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Store(#[from] SeriesStoreError),
}

fn csv_header() -> String {
    let names = Emotion::names();
    let mut h = String::from("date,total");
    for n in names {
        let _ = write!(h, ",{n}");
    }
    for n in names {
        let _ = write!(h, ",{n}_pct");
    }
    h
}

/// CSV text for a series; identical series give identical bytes.
pub fn series_csv_string(series: &EmotionSeries) -> String {
    let mut out = csv_header();
    out.push('\n');
    for p in &series.points {
        let _ = write!(out, "{},{}", p.date.format("%Y-%m-%d"), p.total);
        for c in p.counts {
            let _ = write!(out, ",{c}");
        }
        for pct in p.pct {
            let _ = write!(out, ",{pct}");
        }
        out.push('\n');
    }
    out
}

pub fn export_series_csv(series: &EmotionSeries, path: impl AsRef<Path>) -> Result<(), std::io::Error> {
    write_atomic(path.as_ref(), series_csv_string(series).as_bytes())
}

/// Parse the CSV produced by [`series_csv_string`]. Percentages are
/// recomputed from counts and must agree with the file.
pub fn parse_series_csv(scope: &str, text: &str, path: &Path) -> Result<EmotionSeries, SeriesStoreError> {
    let bad = |line: usize, reason: String| SeriesStoreError::Malformed {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines();
    if lines.next() != Some(csv_header().as_str()) {
        return Err(bad(1, "unexpected header".into()));
    }
    let mut points: Vec<SeriesPoint> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 2 + 2 * NUM_EMOTIONS {
            return Err(bad(line_no, format!("expected {} cells", 2 + 2 * NUM_EMOTIONS)));
        }
        let date = parse_date(cells[0]).map_err(|e| bad(line_no, e.to_string()))?;
        let total: u64 = cells[1].parse().map_err(|_| bad(line_no, "bad total".into()))?;
        let mut counts = [0u64; NUM_EMOTIONS];
        for (c, slot) in counts.iter_mut().enumerate() {
            *slot = cells[2 + c].parse().map_err(|_| bad(line_no, "bad count".into()))?;
            if *slot > total {
                return Err(bad(line_no, "count exceeds total".into()));
            }
        }
        let point = SeriesPoint::new(date, counts, total);
        for (c, pct) in point.pct.iter().enumerate() {
            let stored: f64 = cells[2 + NUM_EMOTIONS + c]
                .parse()
                .map_err(|_| bad(line_no, "bad percentage".into()))?;
            if (stored - pct).abs() > 1e-9 {
                return Err(bad(line_no, "percentage disagrees with counts".into()));
            }
        }
        if points.last().is_some_and(|p| p.date >= date) {
            return Err(bad(line_no, "dates must strictly increase".into()));
        }
        points.push(point);
    }
    Ok(EmotionSeries { scope: scope.to_string(), points })
}

/// Provenance for one scope's series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub classifier: String,
    pub tau: f64,
    pub built_at: String,
}

/// Write `series/<scope>.csv` and merge `meta` into `meta.json`.
pub fn write_series_store(
    dir: impl AsRef<Path>,
    series: &EmotionSeries,
    meta: &SeriesMeta,
) -> Result<PathBuf, SeriesStoreError> {
    let dir = dir.as_ref();
    let csv_path = dir.join(SERIES_DIR).join(format!("{}.csv", series.scope));
    export_series_csv(series, &csv_path)?;

    let meta_path = dir.join(META);
    let mut all: BTreeMap<String, SeriesMeta> = if meta_path.exists() {
        serde_json::from_slice(&fs::read(&meta_path)?)?
    } else {
        BTreeMap::new()
    };
    all.insert(series.scope.clone(), meta.clone());
    let mut bytes = serde_json::to_vec_pretty(&all)?;
    bytes.push(b'\n');
    write_atomic(&meta_path, &bytes)?;
    Ok(csv_path)
}

/// One emotion's value in a projected point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionValue {
    pub emotion: Emotion,
    pub count: u64,
    pub pct: f64,
}

/// A series point restricted to the requested emotions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedPoint {
    pub date: NaiveDate,
    pub total: u64,
    pub emotions: Vec<EmotionValue>,
}

/// Immutable in-memory snapshot of every series under a store directory.
#[derive(Debug, Clone, Default)]
pub struct SeriesStore {
    root: PathBuf,
    series: BTreeMap<String, EmotionSeries>,
    meta: BTreeMap<String, SeriesMeta>,
}

impl SeriesStore {
    /// Load every `series/*.csv`. A missing directory gives an empty store.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, SeriesStoreError> {
        let root = root.into();
        let mut series = BTreeMap::new();
        let dir = root.join(SERIES_DIR);
        if dir.is_dir() {
            for entry in fs::read_dir(&dir)? {
                let path = entry?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("csv") {
                    continue;
                }
                let Some(scope) = path.file_stem().and_then(|s| s.to_str()) else { continue };
                if !is_valid_scope(scope) {
                    continue;
                }
                let text = fs::read_to_string(&path)?;
                series.insert(scope.to_string(), parse_series_csv(scope, &text, &path)?);
            }
        }
        let meta_path = root.join(META);
        let meta = if meta_path.is_file() {
            serde_json::from_slice(&fs::read(meta_path)?)?
        } else {
            BTreeMap::new()
        };
        Ok(Self { root, series, meta })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn scopes(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    pub fn series(&self, scope: &str) -> Option<&EmotionSeries> {
        self.series.get(scope)
    }

    pub fn meta(&self, scope: &str) -> Option<&SeriesMeta> {
        self.meta.get(scope)
    }

    /// Points of `scope` with `from <= date <= to`, projected to `emotions`.
    pub fn query(
        &self,
        scope: &str,
        emotions: &[Emotion],
        from: NaiveDate,
        to: NaiveDate,
    ) -> Result<Vec<ProjectedPoint>, QueryError> {
        if from > to {
            return Err(QueryError::InvalidRange { from, to });
        }
        let series = self.series(scope).ok_or_else(|| QueryError::UnknownScope(scope.to_string()))?;
        Ok(series
            .points
            .iter()
            .filter(|p| p.date >= from && p.date <= to)
            .map(|p| ProjectedPoint {
                date: p.date,
                total: p.total,
                emotions: emotions
                    .iter()
                    .map(|&e| EmotionValue { emotion: e, count: p.counts[e.index()], pct: p.pct[e.index()] })
                    .collect(),
            })
            .collect())
    }
}

/// Load the store at `dir` and run one query.
pub fn series_query(
    dir: impl Into<PathBuf>,
    scope: &str,
    emotions: &[Emotion],
    from: NaiveDate,
    to: NaiveDate,
) -> Result<Vec<ProjectedPoint>, QueryError> {
    SeriesStore::open(dir)?.query(scope, emotions, from, to)
}

/// Canonical JSON for query results, shared by the CLI and the HTTP API.
pub fn render_series_json(points: &[ProjectedPoint]) -> String {
    serde_json::to_string(points).expect("points serialize")
}

/// CSV for query results: `date,total,<e>,<e>_pct,...` for the requested emotions.
pub fn render_series_csv(points: &[ProjectedPoint], emotions: &[Emotion]) -> String {
    let mut out = String::from("date,total");
    for e in emotions {
        let _ = write!(out, ",{e},{e}_pct");
    }
    out.push('\n');
    for p in points {
        let _ = write!(out, "{},{}", p.date.format("%Y-%m-%d"), p.total);
        for v in &p.emotions {
            let _ = write!(out, ",{},{}", v.count, v.pct);
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    Json,
    Csv,
}

impl std::str::FromStr for SeriesFormat {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(QueryError::BadParameter(format!("format must be csv or json, got {other:?}"))),
        }
    }
}

/// A parsed series query. `emotions = None` selects all six; an empty
/// string selects none.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRequest {
    pub scope: String,
    pub emotions: Vec<Emotion>,
    pub from: NaiveDate,
    pub to: NaiveDate,
}

impl SeriesRequest {
    pub fn parse(scope: &str, emotions: Option<&str>, from: &str, to: &str) -> Result<Self, QueryError> {
        let date = |name: &str, v: &str| {
            parse_date(v).map_err(|_| QueryError::BadParameter(format!("{name} must be YYYY-MM-DD, got {v:?}")))
        };
        let emotions = match emotions {
            None => Emotion::ALL.to_vec(),
            Some(list) => parse_emotion_list(list).map_err(|e| QueryError::BadParameter(e.to_string()))?,
        };
        if scope.is_empty() {
            return Err(QueryError::BadParameter("scope is required".into()));
        }
        Ok(Self { scope: scope.to_string(), emotions, from: date("from", from)?, to: date("to", to)? })
    }
}

/// Run `req` against `store` and render it. The `series` subcommand and
/// `GET /v1/series` both go through here.
pub fn answer_series(store: &SeriesStore, req: &SeriesRequest, format: SeriesFormat) -> Result<String, QueryError> {
    let points = store.query(&req.scope, &req.emotions, req.from, req.to)?;
    Ok(match format {
        SeriesFormat::Json => render_series_json(&points),
        SeriesFormat::Csv => render_series_csv(&points, &req.emotions),
    })
}
