use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Iri, Term, Triple};

/// Predicate IRIs recognised by [`build_graph`]. Matching is by full string
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Vocabulary {
    pub broader: String,
    pub subject: String,
    pub label: String,
    pub comment: String,
    pub same_as: String,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary {
            broader: "http://www.w3.org/2004/02/skos/core#broader".into(),
            subject: "http://purl.org/dc/terms/subject".into(),
            label: "http://www.w3.org/2000/01/rdf-schema#label".into(),
            comment: "http://www.w3.org/2000/01/rdf-schema#comment".into(),
            same_as: "http://www.w3.org/2002/07/owl#sameAs".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    pub vocabulary: Vocabulary,
    /// Language tag preferred for labels and descriptions. Untagged literals
    /// are the first fallback, then the smallest remaining tag.
    pub preferred_language: String,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { vocabulary: Vocabulary::default(), preferred_language: "en".into() }
    }
}

/// Non-fatal problems found while building a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphWarning {
    /// The IRI is both a category and the subject of `dct:subject` edges;
    /// those edges were dropped.
    CategoryUsedAsEntity { iri: Iri, dropped_edges: usize },
    /// `owl:sameAs` links form a cycle or give one IRI several targets.
    /// `canonical` is the lexicographically smallest candidate.
    ConflictingAlias { members: Vec<Iri>, canonical: Iri },
    /// A structural predicate had a literal object, or a text predicate had
    /// an IRI object.
    UnexpectedObject { subject: Iri, predicate: Iri },
}

impl std::fmt::Display for GraphWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GraphWarning::CategoryUsedAsEntity { iri, dropped_edges } => write!(
                f,
                "{iri} is a category but has {dropped_edges} subject edge(s); treated as category, edges dropped"
            ),
            GraphWarning::ConflictingAlias { members, canonical } => {
                let names: Vec<&str> = members.iter().map(Iri::as_str).collect();
                write!(f, "conflicting sameAs among [{}]; canonical {canonical}", names.join(", "))
            }
            GraphWarning::UnexpectedObject { subject, predicate } => {
                write!(f, "ignored {predicate} on {subject}: unexpected object kind")
            }
        }
    }
}

/// Literal values of one IRI keyed by language tag (`""` for untagged).
pub type LangMap = BTreeMap<String, String>;

/// In-memory category network. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    categories: BTreeSet<Iri>,
    entities: BTreeSet<Iri>,
    broader_edges: BTreeSet<(Iri, Iri)>,
    subject_edges: BTreeSet<(Iri, Iri)>,
    /// broader -> narrower categories, sorted.
    narrower: BTreeMap<Iri, Vec<Iri>>,
    /// category -> member entities, sorted.
    members: BTreeMap<Iri, Vec<Iri>>,
    labels: BTreeMap<Iri, LangMap>,
    descriptions: BTreeMap<Iri, LangMap>,
    aliases: BTreeMap<Iri, Iri>,
    preferred_language: String,
}

impl KnowledgeGraph {
    pub fn categories(&self) -> &BTreeSet<Iri> {
        &self.categories
    }

    pub fn entities(&self) -> &BTreeSet<Iri> {
        &self.entities
    }

    pub fn broader_edges(&self) -> &BTreeSet<(Iri, Iri)> {
        &self.broader_edges
    }

    pub fn subject_edges(&self) -> &BTreeSet<(Iri, Iri)> {
        &self.subject_edges
    }

    pub fn aliases(&self) -> &BTreeMap<Iri, Iri> {
        &self.aliases
    }

    pub fn is_category(&self, iri: &str) -> bool {
        self.categories.contains(iri)
    }

    pub fn is_entity(&self, iri: &str) -> bool {
        self.entities.contains(iri)
    }

    /// Direct narrower categories of `category`, i.e. the reverse of
    /// `skos:broader`.
    pub fn narrower(&self, category: &str) -> &[Iri] {
        self.narrower.get(category).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Entities whose `dct:subject` is `category`, unresolved.
    pub fn direct_members(&self, category: &str) -> &[Iri] {
        self.members.get(category).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Follows the alias table. Canonical IRIs resolve to themselves.
    pub fn resolve<'a>(&'a self, iri: &'a Iri) -> &'a Iri {
        self.aliases.get(iri).unwrap_or(iri)
    }

    pub fn label(&self, iri: &str) -> Option<&str> {
        pick_language(self.labels.get(iri)?, &self.preferred_language)
    }

    /// Label, or the IRI's local name when no label is known.
    pub fn display_label(&self, iri: &Iri) -> String {
        self.label(iri.as_str()).map(str::to_owned).unwrap_or_else(|| iri.local_name())
    }

    pub fn description(&self, iri: &str) -> Option<&str> {
        pick_language(self.descriptions.get(iri)?, &self.preferred_language)
    }

    pub fn labels_of(&self, iri: &str) -> Option<&LangMap> {
        self.labels.get(iri)
    }
}

fn pick_language<'a>(values: &'a LangMap, preferred: &str) -> Option<&'a str> {
    values.get(preferred).or_else(|| values.get("")).or_else(|| values.values().next()).map(String::as_str)
}

/// Builds the graph from parsed triples. The result does not depend on the
/// order of `triples`.
pub fn build_graph<'a>(
    triples: impl IntoIterator<Item = &'a Triple>,
    config: &GraphConfig,
) -> (KnowledgeGraph, Vec<GraphWarning>) {
    let vocab = &config.vocabulary;
    let mut warnings = Vec::new();
    let mut g = KnowledgeGraph { preferred_language: config.preferred_language.clone(), ..Default::default() };
    let mut raw_subject_edges = BTreeSet::new();
    let mut same_as: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    let mut unexpected = BTreeSet::new();

    for t in triples {
        let p = t.predicate.as_str();
        if p == vocab.broader || p == vocab.subject || p == vocab.same_as {
            let Some(object) = t.object.as_iri() else {
                unexpected.insert((t.subject.clone(), t.predicate.clone()));
                continue;
            };
            if p == vocab.broader {
                g.categories.insert(t.subject.clone());
                g.categories.insert(object.clone());
                g.broader_edges.insert((t.subject.clone(), object.clone()));
            } else if p == vocab.subject {
                raw_subject_edges.insert((t.subject.clone(), object.clone()));
            } else if t.subject != *object {
                same_as.entry(t.subject.clone()).or_default().insert(object.clone());
            }
        } else if p == vocab.label || p == vocab.comment {
            let Term::Literal { value, lang } = &t.object else {
                unexpected.insert((t.subject.clone(), t.predicate.clone()));
                continue;
            };
            let target = if p == vocab.label { &mut g.labels } else { &mut g.descriptions };
            let slot = target
                .entry(t.subject.clone())
                .or_default()
                .entry(lang.clone().unwrap_or_default().to_ascii_lowercase());
            // Keep the smallest value so duplicates resolve independently of
            // input order.
            slot.and_modify(|v| {
                if value < v {
                    *v = value.clone();
                }
            })
            .or_insert_with(|| value.clone());
        }
    }

    for (_, category) in &raw_subject_edges {
        g.categories.insert(category.clone());
    }
    let mut dropped: BTreeMap<Iri, usize> = BTreeMap::new();
    for (entity, category) in raw_subject_edges {
        if g.categories.contains(&entity) {
            *dropped.entry(entity).or_default() += 1;
            continue;
        }
        g.entities.insert(entity.clone());
        g.subject_edges.insert((entity, category));
    }
    warnings.extend(
        dropped.into_iter().map(|(iri, dropped_edges)| GraphWarning::CategoryUsedAsEntity { iri, dropped_edges }),
    );

    for (narrower, broader) in &g.broader_edges {
        g.narrower.entry(broader.clone()).or_default().push(narrower.clone());
    }
    for (entity, category) in &g.subject_edges {
        g.members.entry(category.clone()).or_default().push(entity.clone());
    }

    let (aliases, alias_warnings) = resolve_aliases(same_as);
    g.aliases = aliases;
    warnings.extend(alias_warnings);
    warnings.extend(
        unexpected.into_iter().map(|(subject, predicate)| GraphWarning::UnexpectedObject { subject, predicate }),
    );
    (g, warnings)
}

/// Turns `alias -> {targets}` into a flat `alias -> canonical` table.
///
/// Chains are followed to their end. An IRI with several targets keeps the
/// smallest one; a cycle is collapsed onto its smallest member. Both cases
/// are reported.
fn resolve_aliases(same_as: BTreeMap<Iri, BTreeSet<Iri>>) -> (BTreeMap<Iri, Iri>, Vec<GraphWarning>) {
    let mut warnings = Vec::new();
    let mut next: BTreeMap<Iri, Iri> = BTreeMap::new();
    for (alias, targets) in same_as {
        let canonical = targets.iter().next().cloned().expect("non-empty target set");
        if targets.len() > 1 {
            let mut members: Vec<Iri> = targets.into_iter().collect();
            members.insert(0, alias.clone());
            warnings.push(GraphWarning::ConflictingAlias { members, canonical: canonical.clone() });
        }
        next.insert(alias, canonical);
    }

    let mut resolved: BTreeMap<Iri, Iri> = BTreeMap::new();
    for start in next.keys() {
        if resolved.contains_key(start) {
            continue;
        }
        let mut path: Vec<Iri> = vec![start.clone()];
        let mut cur = start.clone();
        let canonical = loop {
            match next.get(&cur) {
                None => break cur,
                Some(n) => {
                    if let Some(done) = resolved.get(n) {
                        break done.clone();
                    }
                    if let Some(pos) = path.iter().position(|p| p == n) {
                        let cycle: Vec<Iri> = path[pos..].to_vec();
                        let min = cycle.iter().min().cloned().expect("non-empty cycle");
                        let mut members = cycle;
                        members.sort();
                        warnings.push(GraphWarning::ConflictingAlias { members, canonical: min.clone() });
                        break min;
                    }
                    path.push(n.clone());
                    cur = n.clone();
                }
            }
        };
        for p in path {
            resolved.insert(p, canonical.clone());
        }
    }
    resolved.retain(|alias, canonical| alias != canonical);
    (resolved, warnings)
}
