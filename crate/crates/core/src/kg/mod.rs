//! Category network: N-Triples ingestion, the in-memory graph and the
//! traversal and lookup queries run against it.

mod graph;
mod iri;
mod ntriples;
mod traverse;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub use graph::{build_graph, GraphConfig, GraphWarning, KnowledgeGraph, LangMap, Vocabulary};
pub use iri::{Iri, IriError};
pub use ntriples::{parse_line, parse_triples, write_triples, Term, Triple, TripleReader};
pub use traverse::{
    label_search, member_entities, narrower_categories, CategoryTree, LabelMatch, TreeNode, DEFAULT_MAX_DEPTH,
};

#[derive(Debug, thiserror::Error)]
pub enum KgError {
    #[error("malformed triple on line {line_number}: {reason}")]
    MalformedTriple { line_number: usize, reason: String },
    #[error("invalid UTF-8 on line {line_number}")]
    InvalidUtf8 { line_number: usize },
    #[error("unknown category {0}")]
    UnknownCategory(Iri),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads an `.nt` file and builds the graph from it.
pub fn load_graph(
    path: impl AsRef<Path>,
    config: &GraphConfig,
) -> Result<(KnowledgeGraph, Vec<GraphWarning>), KgError> {
    let file = File::open(path)?;
    let triples = parse_triples(BufReader::new(file))?;
    Ok(build_graph(&triples, config))
}
