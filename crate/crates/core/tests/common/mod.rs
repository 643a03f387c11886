#![allow(dead_code)]

use std::path::PathBuf;

use pastsearch::config::ServiceConfig;
use pastsearch::engine::Engine;
use pastsearch::sample::{generate_toy_corpus, generate_toy_graph};
use pastsearch::session::SteppingClock;
use tempfile::TempDir;

pub const T0: i64 = 1_700_000_000_000;

/// Toy graph and corpus written to a temporary directory.
pub struct Toy {
    pub dir: TempDir,
    pub config: ServiceConfig,
}

impl Toy {
    pub fn new(n_docs: usize, seed: u64) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let kg = dir.path().join("toy_graph.nt");
        let corpus = dir.path().join("toy_corpus.jsonl");
        std::fs::write(&kg, generate_toy_graph()).unwrap();
        std::fs::write(&corpus, generate_toy_corpus(n_docs, seed)).unwrap();
        let config = ServiceConfig::with_paths(kg, corpus, dir.path().join("sessions"));
        Toy { dir, config }
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.config.corpus_path.clone()
    }

    pub fn engine(&self) -> Engine {
        Engine::from_config(&self.config).unwrap().with_clock(SteppingClock::new(T0, 1))
    }
}
