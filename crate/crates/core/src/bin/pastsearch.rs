use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use pastsearch::config::ServiceConfig;
use pastsearch::corpus::{load_corpus, CorpusConfig};
use pastsearch::kg::{load_graph, GraphConfig};
use pastsearch::sample::{generate_toy_corpus, generate_toy_graph};
use pastsearch::session::{SessionStore, DEFAULT_SESSION_DIR};

#[derive(Parser)]
#[command(name = "pastsearch", version, about = "Period-aware search over entity-linked corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an N-Triples category network and report what was loaded.
    IngestKg {
        file: PathBuf,
        #[arg(long, default_value = "en")]
        language: String,
    },
    /// Parse and index a JSON Lines corpus and report what was loaded.
    IngestCorpus {
        file: PathBuf,
        /// Graph whose owl:sameAs aliases apply to the links.
        #[arg(long)]
        kg: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a session's export document.
    Export {
        session_id: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        store: StoreArgs,
    },
    /// Write the toy graph, toy corpus and a matching config.
    GenSample {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 50)]
        n_docs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct StoreArgs {
    /// Service config naming the session directory.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    session_dir: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::IngestKg { file, language } => {
            let config = GraphConfig { preferred_language: language, ..GraphConfig::default() };
            let (graph, warnings) =
                load_graph(&file, &config).with_context(|| format!("loading {}", file.display()))?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            println!("categories:     {}", graph.categories().len());
            println!("entities:       {}", graph.entities().len());
            println!("broader edges:  {}", graph.broader_edges().len());
            println!("subject edges:  {}", graph.subject_edges().len());
            println!("aliases:        {}", graph.aliases().len());
            println!("warnings:       {}", warnings.len());
        }
        Command::IngestCorpus { file, kg } => {
            let aliases = match kg {
                Some(path) => load_graph(&path, &GraphConfig::default())
                    .with_context(|| format!("loading {}", path.display()))?
                    .0
                    .aliases()
                    .clone(),
                None => Default::default(),
            };
            let index = load_corpus(&file, CorpusConfig::default(), aliases)
                .with_context(|| format!("loading {}", file.display()))?;
            let sentences: usize = index.documents().iter().map(|d| d.sentences.len()).sum();
            println!("documents:      {}", index.len());
            println!("sentences:      {sentences}");
            println!("postings:       {}", index.total_postings());
            println!("entities:       {}", index.indexed_entities().count());
            if let (Some(first), Some(last)) = (index.documents().first(), index.documents().last()) {
                println!("date range:     {} .. {}", first.date, last.date);
            }
        }
        Command::Serve { config } => {
            let config = ServiceConfig::load(&config)?;
            tokio::runtime::Runtime::new()?.block_on(pastsearch::service::serve(config))?;
        }
        Command::Export { session_id, output, store } => {
            let dir = match (store.config, store.session_dir) {
                (Some(config), _) => ServiceConfig::load(config)?.session_dir,
                (None, Some(dir)) => dir,
                (None, None) => PathBuf::from(DEFAULT_SESSION_DIR),
            };
            if !dir.is_dir() {
                bail!("session directory {} does not exist", dir.display());
            }
            let doc = SessionStore::open(dir)?.load(&session_id)?;
            let bytes = doc.to_bytes();
            match output {
                Some(path) => std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?,
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(&bytes)?;
                }
            }
        }
        Command::GenSample { out_dir, n_docs, seed } => {
            std::fs::create_dir_all(&out_dir)?;
            let kg = out_dir.join("toy_graph.nt");
            let corpus = out_dir.join("toy_corpus.jsonl");
            let config_path = out_dir.join("pastsearch.json");
            std::fs::write(&kg, generate_toy_graph())?;
            std::fs::write(&corpus, generate_toy_corpus(n_docs, seed))?;
            let mut config = ServiceConfig::with_paths("toy_graph.nt", "toy_corpus.jsonl", DEFAULT_SESSION_DIR);
            config.cors_origins = vec!["http://localhost:5173".into()];
            let mut json = serde_json::to_vec_pretty(&config)?;
            json.push(b'\n');
            std::fs::write(&config_path, json)?;
            for p in [&kg, &corpus, &config_path] {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
