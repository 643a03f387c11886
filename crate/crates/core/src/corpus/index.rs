use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{CorpusConfig, Document, EntityLink, MISSING_META};
use crate::kg::Iri;

/// One indexed link occurrence. `doc` is the position in date order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Posting {
    pub doc: u32,
    pub sentence: u32,
    pub link: u32,
}

impl Posting {
    fn key(&self) -> (u32, u32) {
        (self.doc, self.sentence)
    }
}

/// A sentence plus how much surrounding context to show with it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fragment {
    pub doc_id: String,
    pub sentence_index: usize,
    pub context_before: usize,
    pub context_after: usize,
}

/// Span inside a [`FragmentView::text`], in code points relative to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Highlight {
    pub start: usize,
    pub end: usize,
    pub entity: Iri,
    pub surface: String,
    pub confidence: f64,
}

/// A fragment rendered for display: the matched sentence with context,
/// highlighted links and the document metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentView {
    pub doc_id: String,
    pub date: NaiveDate,
    pub meta: BTreeMap<String, String>,
    pub sentence_index: usize,
    /// Code-point span of the matched sentence in the document.
    pub sentence_start: usize,
    pub sentence_end: usize,
    /// Code-point offset of `text` in the document.
    pub text_start: usize,
    pub text: String,
    pub highlights: Vec<Highlight>,
}

pub struct CorpusIndex {
    config: CorpusConfig,
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
    postings: HashMap<Iri, Vec<Posting>>,
}

impl CorpusIndex {
    pub(super) fn new(config: CorpusConfig, docs: Vec<Document>, postings: HashMap<Iri, Vec<Posting>>) -> Self {
        let by_id = docs.iter().enumerate().map(|(i, d)| (d.doc_id.clone(), i)).collect();
        CorpusIndex { config, docs, by_id, postings }
    }

    pub fn config(&self) -> &CorpusConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Documents in (date, doc_id) order.
    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    /// Postings of `entity`, sorted by document order, sentence and link.
    pub fn postings(&self, entity: &Iri) -> &[Posting] {
        self.postings.get(entity).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn total_postings(&self) -> usize {
        self.postings.values().map(Vec::len).sum()
    }

    pub fn indexed_entities(&self) -> impl Iterator<Item = &Iri> {
        self.postings.keys()
    }

    fn link(&self, p: &Posting) -> &EntityLink {
        &self.docs[p.doc as usize].links[p.link as usize]
    }

    fn is_indexed(&self, link: &EntityLink) -> bool {
        link.confidence >= self.config.min_confidence
    }

    /// Indexed links of one sentence.
    pub fn sentence_links(&self, doc_id: &str, sentence_index: usize) -> Option<Vec<&EntityLink>> {
        let doc = self.document(doc_id)?;
        if sentence_index >= doc.sentences.len() {
            return None;
        }
        Some(doc.links.iter().filter(|l| l.sentence == sentence_index && self.is_indexed(l)).collect())
    }

    /// Index of the sentence with exactly this code-point span.
    pub fn locate_sentence(&self, doc_id: &str, start: usize, end: usize) -> Option<usize> {
        self.document(doc_id)?.sentences.iter().position(|&s| s == (start, end))
    }

    /// Re-checks that every link surface equals the text at its offsets.
    pub fn verify_offsets(&self) -> bool {
        self.docs.iter().all(|d| d.links.iter().all(|l| l.end <= d.char_len() && d.slice(l.start, l.end) == l.surface))
    }

    /// Number of indexed link occurrences per entity, including zeros.
    pub fn entity_counts(&self, entities: &[Iri]) -> BTreeMap<Iri, usize> {
        entities.iter().map(|e| (e.clone(), self.postings(e).len())).collect()
    }

    fn fragment(&self, (doc, sentence): (u32, u32)) -> Fragment {
        Fragment {
            doc_id: self.docs[doc as usize].doc_id.clone(),
            sentence_index: sentence as usize,
            context_before: self.config.context,
            context_after: self.config.context,
        }
    }

    /// Distinct (doc, sentence) keys of one entity, in document order.
    fn fragment_keys(&self, entity: &Iri) -> Vec<(u32, u32)> {
        let mut keys: Vec<(u32, u32)> = self.postings(entity).iter().map(Posting::key).collect();
        keys.dedup();
        keys
    }

    /// Up to `k` snippets for a quick relevance check, taken round-robin
    /// over `entities` starting with the most mentioned one, and returned
    /// in document order.
    pub fn preview(&self, entities: &[Iri], k: usize, context: usize) -> Vec<FragmentView> {
        let mut ordered: Vec<&Iri> = entities.iter().collect::<BTreeSet<_>>().into_iter().collect();
        ordered.sort_by_key(|e| std::cmp::Reverse(self.postings(e).len()));
        let mut queues: Vec<std::vec::IntoIter<(u32, u32)>> =
            ordered.iter().map(|e| self.fragment_keys(e).into_iter()).collect();

        let mut taken: BTreeSet<(u32, u32)> = BTreeSet::new();
        'rounds: loop {
            let mut progressed = false;
            for queue in queues.iter_mut() {
                if taken.len() >= k {
                    break 'rounds;
                }
                if let Some(key) = queue.find(|key| !taken.contains(key)) {
                    taken.insert(key);
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }

        let selected: BTreeSet<&Iri> = ordered.into_iter().collect();
        taken
            .into_iter()
            .map(|(doc, sentence)| self.render(doc as usize, sentence as usize, context, context, &selected))
            .collect()
    }

    /// Every sentence with at least one indexed link to an entity in
    /// `entities \ excluded`, once, in (date, doc_id, sentence) order.
    pub fn fetch_fragments(&self, entities: &BTreeSet<Iri>, excluded: &BTreeSet<Iri>) -> Vec<Fragment> {
        let keys: BTreeSet<(u32, u32)> =
            entities.difference(excluded).flat_map(|e| self.postings(e).iter().map(Posting::key)).collect();
        keys.into_iter().map(|key| self.fragment(key)).collect()
    }

    /// Renders a fragment with the links of `selected` highlighted.
    pub fn view(&self, fragment: &Fragment, selected: &BTreeSet<&Iri>) -> Option<FragmentView> {
        let &doc = self.by_id.get(&fragment.doc_id)?;
        if fragment.sentence_index >= self.docs[doc].sentences.len() {
            return None;
        }
        Some(self.render(doc, fragment.sentence_index, fragment.context_before, fragment.context_after, selected))
    }

    fn render(
        &self,
        doc: usize,
        sentence: usize,
        before: usize,
        after: usize,
        selected: &BTreeSet<&Iri>,
    ) -> FragmentView {
        let d = &self.docs[doc];
        let first = sentence.saturating_sub(before);
        let last = (sentence + after).min(d.sentences.len() - 1);
        let text_start = d.sentences[first].0;
        let text_end = d.sentences[last].1;
        let highlights = d
            .links
            .iter()
            .filter(|l| {
                (first..=last).contains(&l.sentence)
                    && l.end <= text_end
                    && self.is_indexed(l)
                    && selected.contains(&l.entity)
            })
            .map(|l| Highlight {
                start: l.start - text_start,
                end: l.end - text_start,
                entity: l.entity.clone(),
                surface: l.surface.clone(),
                confidence: l.confidence,
            })
            .collect();
        let (sentence_start, sentence_end) = d.sentences[sentence];
        FragmentView {
            doc_id: d.doc_id.clone(),
            date: d.date,
            meta: d.meta.clone(),
            sentence_index: sentence,
            sentence_start,
            sentence_end,
            text_start,
            text: d.slice(text_start, text_end).to_owned(),
            highlights,
        }
    }

    fn matching_links<'a>(
        &'a self,
        entities: &'a BTreeSet<Iri>,
    ) -> impl Iterator<Item = (&'a Document, &'a EntityLink)> + 'a {
        entities
            .iter()
            .flat_map(move |e| self.postings(e).iter().map(move |p| (&self.docs[p.doc as usize], self.link(p))))
    }

    /// Link occurrences of `entities` per document year.
    pub fn timeline_counts(&self, entities: &BTreeSet<Iri>) -> BTreeMap<i32, usize> {
        let mut counts = BTreeMap::new();
        for (doc, _) in self.matching_links(entities) {
            *counts.entry(doc.year()).or_default() += 1;
        }
        counts
    }

    /// Link occurrences of `entities` grouped by a document meta value.
    /// Documents without `meta_key` are grouped under `(none)`.
    pub fn facet_counts(&self, entities: &BTreeSet<Iri>, meta_key: &str) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for (doc, _) in self.matching_links(entities) {
            let value = doc.meta.get(meta_key).map(String::as_str).unwrap_or(MISSING_META);
            *counts.entry(value.to_owned()).or_default() += 1;
        }
        counts
    }

    /// Total link occurrences of `entities`.
    pub fn link_count(&self, entities: &BTreeSet<Iri>) -> usize {
        entities.iter().map(|e| self.postings(e).len()).sum()
    }
}
