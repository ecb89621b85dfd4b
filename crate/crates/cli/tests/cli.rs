#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::{Command, Output};

fn emomon(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emomon"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "off")
        .env("EMOMON_SALT", std::str::from_utf8(common::SALT).unwrap())
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn lexicon() -> String {
    common::data_path("demo_lexicon.csv").display().to_string()
}

fn setup(dir: &Path, n: usize) -> Vec<String> {
    let lines = common::synth::tweet_lines(n, 42);
    std::fs::write(dir.join("tweets.ndjson"), lines.join("\n")).unwrap();
    std::fs::write(dir.join("keywords.txt"), common::synth::KEYWORDS).unwrap();
    lines
}

const INGEST: [&str; 9] = [
    "ingest", "--input", "tweets.ndjson", "--keywords", "keywords.txt", "--store", "store", "--salt-env", "EMOMON_SALT",
];

#[test]
fn binary_pipeline_matches_library() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let lines = setup(dir, 1500);

    let report: serde_json::Value = serde_json::from_str(&ok(&emomon(&INGEST, dir))).unwrap();
    assert!(report["accepted"].as_u64().unwrap() > 0);
    let again: serde_json::Value = serde_json::from_str(&ok(&emomon(&INGEST, dir))).unwrap();
    assert_eq!(again["accepted"], 0);

    let lib = tempfile::tempdir().unwrap();
    let (_, expected) = common::run_pipeline(&lines, &lib.path().join("store"), &lib.path().join("series"));
    let stored = emomon_core::ingest::CorpusStore::open(dir.join("store")).unwrap().read_all().unwrap();
    assert_eq!(report["accepted"].as_u64().unwrap() as usize, stored.len());

    for (scope, csv) in &expected {
        ok(&emomon(
            &["aggregate", "--store", "store", "--scope", scope, "--lexicon", &lexicon(), "--out", "series"],
            dir,
        ));
        let written = std::fs::read(dir.join("series/series").join(format!("{scope}.csv"))).unwrap();
        assert_eq!(&written, csv, "scope {scope}");
    }
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("series/meta.json")).unwrap()).unwrap();
    assert_eq!(meta.as_object().unwrap().len(), expected.len());

    let (scope, _) = &expected[0];
    let csv = ok(&emomon(
        &["series", "--store", "series", "--scope", scope, "--from", "2020-01-01", "--to", "2021-12-31", "--format", "csv"],
        dir,
    ));
    assert!(csv.starts_with("date,total,joy,joy_pct,"));
    let json = ok(&emomon(
        &["series", "--store", "series", "--scope", scope, "--from", "2020-01-01", "--to", "2021-12-31", "--emotions", "fear"],
        dir,
    ));
    let points: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(points.as_array().unwrap().len(), csv.lines().count() - 1);
    assert_eq!(points[0]["emotions"].as_array().unwrap().len(), 1);

    let out = emomon(&["label", "--store", "store", "--lexicon", &lexicon(), "--out", "train.jsonl"], dir);
    ok(&out);
    assert!(dir.join("train.jsonl").metadata().unwrap().len() > 0);
}

#[test]
fn failures_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir, 20);
    let mut no_salt = Command::new(env!("CARGO_BIN_EXE_emomon"));
    let out = no_salt.args(INGEST).current_dir(dir).env_remove("EMOMON_SALT").output().unwrap();
    assert!(!out.status.success());
    assert!(!dir.join("store").exists());

    common::series_fixture(&dir.join("series"));
    for args in [
        ["series", "--store", "series", "--scope", "med", "--from", "2020-8-1", "--to", "2020-08-09"],
        ["series", "--store", "series", "--scope", "med", "--from", "2020-08-09", "--to", "2020-08-01"],
        ["series", "--store", "series", "--scope", "cali", "--from", "2020-08-01", "--to", "2020-08-09"],
        ["series", "--store", "nowhere", "--scope", "med", "--from", "2020-08-01", "--to", "2020-08-09"],
    ] {
        let out = emomon(&args, dir);
        assert!(!out.status.success(), "{args:?}");
        assert!(out.stdout.is_empty());
    }
    let out = emomon(
        &["series", "--store", "series", "--scope", "med", "--from", "2020-08-01", "--to", "2020-08-09", "--emotions", "hope"],
        dir,
    );
    assert!(!out.status.success());
}

#[test]
fn gold_from_survey() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("survey.csv"),
        "tweet_id,annotator_id,joy,sadness,fear,anger,surprise,disgust\n\
         t1,a,1,0,0,0,0,0\nt1,b,1,0,1,0,0,0\nt1,c,0,0,1,0,0,0\n\
         t2,a,0,1,0,0,0,0\nt2,b,0,0,0,0,0,0\n",
    )
    .unwrap();
    std::fs::write(dir.join("texts.csv"), "tweet_id,text\nt1,que alegria\nt2,\"triste, muy triste\"\n").unwrap();
    ok(&emomon(&["gold", "--survey", "survey.csv", "--texts", "texts.csv", "--out", "gold.csv"], dir));
    let gold = std::fs::read_to_string(dir.join("gold.csv")).unwrap();
    let rows: Vec<&str> = gold.lines().collect();
    assert_eq!(rows[0], "tweet_id,text,joy,sadness,fear,anger,surprise,disgust");
    assert_eq!(&rows[1..], ["t1,que alegria,1,0,1,0,0,0", "t2,\"triste, muy triste\",0,0,0,0,0,0"]);

    std::fs::write(dir.join("texts.csv"), "tweet_id,text\nt1,que alegria\n").unwrap();
    let out = emomon(&["gold", "--survey", "survey.csv", "--texts", "texts.csv", "--out", "gold2.csv"], dir);
    assert!(!out.status.success());
}
