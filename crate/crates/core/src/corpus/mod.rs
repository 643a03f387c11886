//! Sentence-granular index over an entity-linked corpus.
//!
//! Documents arrive as JSON Lines records carrying standoff entity links
//! with code-point offsets. Ingestion is a separate write phase
//! ([`CorpusIndexBuilder`]); the finished [`CorpusIndex`] is read-only.

mod index;
mod segment;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::kg::Iri;

pub use index::{CorpusIndex, Fragment, FragmentView, Highlight, Posting};
pub use segment::{Segmenter, SegmenterError, DEFAULT_SENTENCE_PATTERN};

/// Meta value used for documents that lack the grouping key.
pub const MISSING_META: &str = "(none)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub sentence_pattern: String,
    /// Links below this confidence are kept but not indexed.
    pub min_confidence: f64,
    /// Sentences of context on each side of a retrieved fragment.
    pub context: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { sentence_pattern: DEFAULT_SENTENCE_PATTERN.into(), min_confidence: 0.0, context: 1 }
    }
}

fn default_confidence() -> f64 {
    1.0
}

/// One line of the corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub date: NaiveDate,
    pub text: String,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    #[serde(default)]
    pub links: Vec<LinkRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub start: usize,
    pub end: usize,
    pub iri: Iri,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityLink {
    pub start: usize,
    pub end: usize,
    /// Alias-resolved target.
    pub entity: Iri,
    pub confidence: f64,
    pub surface: String,
    pub sentence: usize,
}

#[derive(Debug, Clone)]
pub struct Document {
    pub doc_id: String,
    pub date: NaiveDate,
    pub text: String,
    pub meta: BTreeMap<String, String>,
    /// Code-point spans, ordered and non-overlapping.
    pub sentences: Vec<(usize, usize)>,
    pub links: Vec<EntityLink>,
    /// Byte offset of every code point, plus one past the end.
    char_bytes: Vec<usize>,
}

impl Document {
    pub fn char_len(&self) -> usize {
        self.char_bytes.len() - 1
    }

    /// Text between two code-point offsets.
    pub fn slice(&self, start: usize, end: usize) -> &str {
        &self.text[self.char_bytes[start]..self.char_bytes[end]]
    }

    pub fn sentence_text(&self, index: usize) -> Option<&str> {
        let &(s, e) = self.sentences.get(index)?;
        Some(self.slice(s, e))
    }

    pub fn year(&self) -> i32 {
        chrono::Datelike::year(&self.date)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate doc_id `{0}`")]
    DuplicateDocId(String),
    #[error("document `{doc_id}`: link {link_index} has offsets outside the text")]
    OffsetOutOfBounds { doc_id: String, link_index: usize },
    #[error("document `{doc_id}`: link {link_index} surface does not match the text")]
    SurfaceMismatch { doc_id: String, link_index: usize },
    #[error("document `{doc_id}`: link {link_index} confidence outside [0, 1]")]
    InvalidConfidence { doc_id: String, link_index: usize },
    #[error(transparent)]
    Segmenter(#[from] SegmenterError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub struct CorpusIndexBuilder {
    config: CorpusConfig,
    segmenter: Segmenter,
    aliases: BTreeMap<Iri, Iri>,
    docs: Vec<Document>,
    ids: HashSet<String>,
}

impl CorpusIndexBuilder {
    pub fn new(config: CorpusConfig) -> Result<Self, CorpusError> {
        let segmenter = Segmenter::new(&config.sentence_pattern)?;
        Ok(CorpusIndexBuilder { config, segmenter, aliases: BTreeMap::new(), docs: Vec::new(), ids: HashSet::new() })
    }

    /// Link targets are rewritten through this table before indexing.
    pub fn with_aliases(mut self, aliases: BTreeMap<Iri, Iri>) -> Self {
        self.aliases = aliases;
        self
    }

    /// Validates and adds one document. Nothing is added on error.
    pub fn ingest(&mut self, record: DocumentRecord) -> Result<(), CorpusError> {
        if self.ids.contains(&record.doc_id) {
            return Err(CorpusError::DuplicateDocId(record.doc_id));
        }
        let mut char_bytes: Vec<usize> = record.text.char_indices().map(|(b, _)| b).collect();
        char_bytes.push(record.text.len());
        let char_len = char_bytes.len() - 1;
        let to_char = |byte: usize| char_bytes.binary_search(&byte).expect("char boundary");

        let sentences: Vec<(usize, usize)> =
            self.segmenter.segment_bytes(&record.text).into_iter().map(|(s, e)| (to_char(s), to_char(e))).collect();

        let mut links = Vec::with_capacity(record.links.len());
        for (link_index, link) in record.links.into_iter().enumerate() {
            let err_ctx = || (record.doc_id.clone(), link_index);
            if link.start >= link.end || link.end > char_len {
                let (doc_id, link_index) = err_ctx();
                return Err(CorpusError::OffsetOutOfBounds { doc_id, link_index });
            }
            if record.text[char_bytes[link.start]..char_bytes[link.end]] != link.surface {
                let (doc_id, link_index) = err_ctx();
                return Err(CorpusError::SurfaceMismatch { doc_id, link_index });
            }
            if !(0.0..=1.0).contains(&link.confidence) {
                let (doc_id, link_index) = err_ctx();
                return Err(CorpusError::InvalidConfidence { doc_id, link_index });
            }
            let sentence = sentences.partition_point(|&(s, _)| s <= link.start).saturating_sub(1);
            let entity = self.aliases.get(&link.iri).cloned().unwrap_or(link.iri);
            links.push(EntityLink {
                start: link.start,
                end: link.end,
                entity,
                confidence: link.confidence,
                surface: link.surface,
                sentence,
            });
        }
        links.sort_by_key(|l| (l.start, l.end));

        self.ids.insert(record.doc_id.clone());
        self.docs.push(Document {
            doc_id: record.doc_id,
            date: record.date,
            text: record.text,
            meta: record.meta,
            sentences,
            links,
            char_bytes,
        });
        Ok(())
    }

    /// Ingests every non-blank line of a JSON Lines stream. Returns the
    /// number of documents added.
    pub fn ingest_jsonl<R: BufRead>(&mut self, reader: R) -> Result<usize, CorpusError> {
        let mut n = 0;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: DocumentRecord =
                serde_json::from_str(&line).map_err(|source| CorpusError::Json { line: i + 1, source })?;
            self.ingest(record)?;
            n += 1;
        }
        Ok(n)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn finish(mut self) -> CorpusIndex {
        self.docs.sort_by(|a, b| (a.date, &a.doc_id).cmp(&(b.date, &b.doc_id)));
        let mut postings: HashMap<Iri, Vec<Posting>> = HashMap::new();
        for (d, doc) in self.docs.iter().enumerate() {
            for (l, link) in doc.links.iter().enumerate() {
                if link.confidence < self.config.min_confidence {
                    continue;
                }
                postings.entry(link.entity.clone()).or_default().push(Posting {
                    doc: d as u32,
                    sentence: link.sentence as u32,
                    link: l as u32,
                });
            }
        }
        CorpusIndex::new(self.config, self.docs, postings)
    }
}

/// Reads a corpus file into a finished index.
pub fn load_corpus(
    path: impl AsRef<Path>,
    config: CorpusConfig,
    aliases: BTreeMap<Iri, Iri>,
) -> Result<CorpusIndex, CorpusError> {
    let mut builder = CorpusIndexBuilder::new(config)?.with_aliases(aliases);
    builder.ingest_jsonl(BufReader::new(File::open(path)?))?;
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(super) fn iri(local: &str) -> Iri {
        Iri::new(&format!("http://dbpedia.org/resource/{local}")).unwrap()
    }

    fn record(doc_id: &str, text: &str, links: Vec<(usize, usize, &str)>) -> DocumentRecord {
        DocumentRecord {
            doc_id: doc_id.into(),
            date: NaiveDate::from_ymd_opt(1950, 1, 1).unwrap(),
            text: text.into(),
            meta: BTreeMap::new(),
            links: links
                .into_iter()
                .map(|(start, end, e)| LinkRecord {
                    start,
                    end,
                    iri: iri(e),
                    confidence: 1.0,
                    surface: text.chars().skip(start).take(end.saturating_sub(start)).collect(),
                })
                .collect(),
        }
    }

    fn builder() -> CorpusIndexBuilder {
        CorpusIndexBuilder::new(CorpusConfig::default()).unwrap()
    }

    #[test]
    fn link_lands_in_first_sentence() {
        let mut b = builder();
        b.ingest(record("d1", "Robespierre fell. The Terror ended.", vec![(0, 11, "Maximilien_Robespierre")])).unwrap();
        let idx = b.finish();
        let doc = idx.document("d1").unwrap();
        assert_eq!(doc.sentences, vec![(0, 17), (18, 35)]);
        assert_eq!(idx.postings(&iri("Maximilien_Robespierre")), &[Posting { doc: 0, sentence: 0, link: 0 }]);
    }

    #[test]
    fn doc_without_links_has_no_postings() {
        let mut b = builder();
        b.ingest(record("d1", "Nothing to see. Move on.", vec![])).unwrap();
        let idx = b.finish();
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.total_postings(), 0);
    }

    #[test]
    fn rejects_bad_links() {
        let mut b = builder();
        let err = b.ingest(record("d1", "short", vec![(0, 9, "X")])).unwrap_err();
        assert!(matches!(err, CorpusError::OffsetOutOfBounds { link_index: 0, .. }));
        let err = b.ingest(record("d1", "short", vec![(2, 2, "X")])).unwrap_err();
        assert!(matches!(err, CorpusError::OffsetOutOfBounds { .. }));

        let mut bad = record("d1", "Robespierre fell.", vec![(0, 11, "X")]);
        bad.links[0].surface = "Danton".into();
        assert!(matches!(b.ingest(bad).unwrap_err(), CorpusError::SurfaceMismatch { .. }));

        let mut bad = record("d1", "Robespierre fell.", vec![(0, 11, "X")]);
        bad.links[0].confidence = 1.5;
        assert!(matches!(b.ingest(bad).unwrap_err(), CorpusError::InvalidConfidence { .. }));
        assert!(b.is_empty());
    }

    #[test]
    fn duplicate_doc_id() {
        let mut b = builder();
        b.ingest(record("d1", "A.", vec![])).unwrap();
        assert!(matches!(
            b.ingest(record("d1", "B.", vec![])).unwrap_err(),
            CorpusError::DuplicateDocId(id) if id == "d1"
        ));
    }

    #[test]
    fn offsets_are_code_points() {
        let text = "Émile saw the Bastille. Ça va.";
        let mut b = builder();
        b.ingest(record("d1", text, vec![(10, 22, "Bastille"), (0, 5, "Emile")])).unwrap();
        let idx = b.finish();
        let doc = idx.document("d1").unwrap();
        assert_eq!(doc.slice(10, 22), "the Bastille");
        assert_eq!(doc.sentence_text(1), Some("Ça va."));
        assert!(idx.verify_offsets());
    }

    #[test]
    fn aliases_rewrite_targets() {
        let mut b = builder().with_aliases(BTreeMap::from([(iri("Robespierre"), iri("Maximilien_Robespierre"))]));
        b.ingest(record("d1", "Robespierre fell.", vec![(0, 11, "Robespierre")])).unwrap();
        let idx = b.finish();
        assert_eq!(idx.postings(&iri("Maximilien_Robespierre")).len(), 1);
        assert!(idx.postings(&iri("Robespierre")).is_empty());
    }

    #[test]
    fn jsonl_defaults_and_errors() {
        let text = r#"{"doc_id":"a","date":"1950-03-01","text":"Robespierre fell.","links":[{"start":0,"end":11,"iri":"http://dbpedia.org/resource/Maximilien_Robespierre","surface":"Robespierre"}]}

{"doc_id":"b","date":"1951-03-01","text":"Quiet."}
"#;
        let mut b = builder();
        assert_eq!(b.ingest_jsonl(text.as_bytes()).unwrap(), 2);
        let idx = b.finish();
        let doc = idx.document("a").unwrap();
        assert_eq!(doc.links[0].confidence, 1.0);
        assert!(doc.meta.is_empty());

        let mut b = builder();
        let err = b.ingest_jsonl("{\"doc_id\":\"a\"}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::Json { line: 1, .. }));
    }

    #[test]
    fn low_confidence_links_are_not_indexed() {
        let cfg = CorpusConfig { min_confidence: 0.5, ..Default::default() };
        let mut b = CorpusIndexBuilder::new(cfg).unwrap();
        let mut r = record("d1", "Robespierre fell.", vec![(0, 11, "R")]);
        r.links[0].confidence = 0.4;
        b.ingest(r).unwrap();
        let idx = b.finish();
        assert!(idx.postings(&iri("R")).is_empty());
        assert_eq!(idx.document("d1").unwrap().links.len(), 1);
    }
}
