use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use emomon_core::annotate::{emit_gold, load_texts, validate_survey_export};
use emomon_core::classify::{ClassifierSpec, EmbeddingTable, ExternalBackendConfig, DEFAULT_TAU};
use emomon_core::ingest::{ingest_corpus, CorpusStore, KeywordList};
use emomon_core::labeling::{build_training_set, write_dataset, read_dataset, Lexicon, DEFAULT_MIN_AGREEMENT};
use emomon_core::metrics::{read_gold_csv, run_experiment, ExperimentBackends, ExperimentId, ReportFile};
use emomon_core::monitor::{answer_series, build_series, write_series_store, SeriesFormat, SeriesMeta, SeriesRequest, SeriesStore};
use emomon_core::service::{serve, ServiceConfig};
use emomon_core::train::{join_dataset, join_embeddings, train, Checkpoint, TrainConfig};

#[derive(Parser)]
#[command(name = "emomon", version, about = "Emotion monitoring for Spanish tweets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, pseudonymize, filter and store a tweet archive.
    Ingest {
        /// ndjson file, or `-` for stdin.
        #[arg(long)]
        input: String,
        #[arg(long)]
        keywords: PathBuf,
        #[arg(long)]
        store: PathBuf,
        /// Environment variable holding the pseudonymization salt.
        #[arg(long)]
        salt_env: String,
    },
    /// Weakly label the corpus store with a lexicon and write a training dataset.
    Label {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        /// Drop matched lexicon terms from the stored words.
        #[arg(long)]
        remove_lexicons: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the linear baseline over sentence embeddings.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        /// Embeddings for both the dataset and the eval tweets.
        #[arg(long)]
        embeddings: PathBuf,
        /// Gold CSV used for checkpoint selection.
        #[arg(long)]
        eval: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score one experiment against a gold file.
    Evaluate {
        #[arg(long)]
        experiment: ExperimentId,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        server: Option<String>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn a survey export into a gold CSV.
    Gold {
        #[arg(long)]
        survey: PathBuf,
        /// Corpus store directory or `tweet_id,text` CSV.
        #[arg(long)]
        texts: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MIN_AGREEMENT)]
        min_agreement: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify one scope of the corpus store and write its daily series.
    Aggregate {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        scope: String,
        /// `lexicon`, `model:<checkpoint>` or `server:<url>`.
        #[arg(long, default_value = "lexicon")]
        classifier: ClassifierSpec,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Query a series store.
    Series {
        /// Series store directory (the `aggregate --out` directory).
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        scope: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Comma-separated emotions; all six when omitted.
        #[arg(long)]
        emotions: Option<String>,
        #[arg(long, default_value = "json")]
        format: SeriesFormat,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    run(Cli::parse().command)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn load_lexicon(path: &Path) -> Result<Lexicon> {
    Lexicon::from_csv_path(path).with_context(|| format!("lexicon {}", path.display()))
}

fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    EmbeddingTable::from_path(path).with_context(|| format!("embeddings {}", path.display()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { input, keywords, store, salt_env } => {
            let salt = std::env::var(&salt_env).with_context(|| format!("salt variable {salt_env} is not set"))?;
            if salt.is_empty() {
                bail!("salt variable {salt_env} is empty");
            }
            let keywords = KeywordList::from_file(&keywords).context("keywords")?;
            let report = if input == "-" {
                ingest_corpus(io::stdin().lock(), &keywords, &store, salt.as_bytes())?
            } else {
                let file = File::open(&input).with_context(|| format!("opening {input}"))?;
                ingest_corpus(BufReader::new(file), &keywords, &store, salt.as_bytes())?
            };
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::Label { store, lexicon, remove_lexicons, out } => {
            let lexicon = load_lexicon(&lexicon)?;
            let set = build_training_set(&CorpusStore::open(&store)?, &lexicon, remove_lexicons)?;
            write_dataset(&out, &set.examples)?;
            eprintln!("{} examples, positives per class {:?}", set.examples.len(), set.pos_counts);
        }
        Command::Train { dataset, embeddings, eval, out, lr, epochs, batch_size, seed } => {
            let mut cfg = TrainConfig::default();
            if let Some(v) = lr {
                cfg.learning_rate = v;
            }
            if let Some(v) = epochs {
                cfg.epochs = v;
            }
            if let Some(v) = batch_size {
                cfg.batch_size = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            let table = load_embeddings(&embeddings)?;
            let data = join_dataset(&read_dataset(&dataset)?, &table)?;
            let gold = read_gold_csv(&eval)?;
            let eval = join_embeddings(gold.iter().map(|g| (g.tweet_id.as_str(), g.labels)), &table)?;
            let artifacts = train(&data, &eval, &cfg)?;
            artifacts.write_to(&out)?;
            eprintln!(
                "loss {:.6} -> {:.6}, best epoch {}",
                artifacts.initial_loss,
                artifacts.final_loss(),
                artifacts.best_epoch
            );
        }
        Command::Evaluate { experiment, gold, server, embeddings, model, lexicon, tau, out } => {
            let lexicon = load_lexicon(&lexicon)?;
            let gold = read_gold_csv(&gold)?;
            let model = match model {
                Some(p) => {
                    let m = Checkpoint::load(&p).and_then(|c| c.to_model());
                    Some((m.with_context(|| format!("checkpoint {}", p.display()))?, p.display().to_string()))
                }
                None => None,
            };
            let backends = ExperimentBackends {
                server: server.map(ExternalBackendConfig::new),
                embeddings: embeddings.as_deref().map(load_embeddings).transpose()?,
                model,
            };
            let outcome = run_experiment(experiment, &gold, &backends, &lexicon, tau)?;
            let mut w = create(&out)?;
            serde_json::to_writer_pretty(&mut w, &ReportFile::new(&outcome, &lexicon))?;
            writeln!(w)?;
            w.flush()?;
            let r = &outcome.report;
            eprintln!("mAP {:.3}  hamming {:.3}  macro-F1 {:.3}  (n = {})", r.map, r.hamming, r.macro_f1, r.n);
        }
        Command::Gold { survey, texts, min_agreement, out } => {
            let records = validate_survey_export(&survey)?;
            let texts = load_texts(&texts)?;
            let mut w = create(&out)?;
            let rows = emit_gold(&records, &texts, min_agreement, &mut w)?;
            w.flush()?;
            eprintln!("{rows} gold rows");
        }
        Command::Aggregate { store, scope, classifier, lexicon, embeddings, tau, out } => {
            if !(tau > 0.0 && tau < 1.0) {
                bail!("tau must be in (0, 1)");
            }
            let lexicon = lexicon.as_deref().map(load_lexicon).transpose()?;
            let embeddings = embeddings.as_deref().map(load_embeddings).transpose()?;
            let backend = classifier.build(lexicon.as_ref(), embeddings.as_ref())?;
            let series = build_series(&CorpusStore::open(&store)?, &scope, backend.as_ref(), tau)?;
            let meta = SeriesMeta {
                classifier: backend.identity(),
                tau,
                built_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            };
            let path = write_series_store(&out, &series, &meta)?;
            eprintln!("{} days written to {}", series.points.len(), path.display());
        }
        Command::Series { store, scope, from, to, emotions, format } => {
            let req = SeriesRequest::parse(&scope, emotions.as_deref(), &from, &to)?;
            if !store.is_dir() {
                bail!("series store {} does not exist", store.display());
            }
            let body = answer_series(&SeriesStore::open(&store)?, &req, format)?;
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            if format == SeriesFormat::Json {
                writeln!(stdout)?;
            }
        }
        Command::Serve { config } => {
            let cfg = ServiceConfig::load(&config).with_context(|| format!("config {}", config.display()))?;
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(serve(&cfg, async {
                let _ = tokio::signal::ctrl_c().await;
            }))?;
        }
    }
    Ok(())
}
