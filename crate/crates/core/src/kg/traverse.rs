use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Iri, KgError, KnowledgeGraph};

pub const DEFAULT_MAX_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub category: Iri,
    pub depth: usize,
    pub parent: Option<Iri>,
}

/// Narrower-category network below a root, in breadth-first order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryTree {
    pub root: Iri,
    pub nodes: Vec<TreeNode>,
}

impl CategoryTree {
    pub fn categories(&self) -> impl Iterator<Item = &Iri> {
        self.nodes.iter().map(|n| &n.category)
    }

    pub fn contains(&self, category: &str) -> bool {
        self.nodes.iter().any(|n| n.category.as_str() == category)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Breadth-first walk against `skos:broader`, starting at `root` and going
/// at most `max_depth` levels down. Each category is kept once, at the
/// depth it was first reached.
pub fn narrower_categories(graph: &KnowledgeGraph, root: &Iri, max_depth: usize) -> Result<CategoryTree, KgError> {
    if !graph.is_category(root.as_str()) {
        return Err(KgError::UnknownCategory(root.clone()));
    }
    let mut seen: HashSet<&Iri> = HashSet::from([root]);
    let mut nodes = vec![TreeNode { category: root.clone(), depth: 0, parent: None }];
    let mut queue = VecDeque::from([(root, 0usize)]);
    while let Some((cat, depth)) = queue.pop_front() {
        if depth == max_depth {
            continue;
        }
        for child in graph.narrower(cat.as_str()) {
            if seen.insert(child) {
                nodes.push(TreeNode { category: child.clone(), depth: depth + 1, parent: Some(cat.clone()) });
                queue.push_back((child, depth + 1));
            }
        }
    }
    Ok(CategoryTree { root: root.clone(), nodes })
}

/// Alias-resolved member entities per tree category. Every tree category
/// gets a key, possibly with an empty list.
pub fn member_entities(graph: &KnowledgeGraph, tree: &CategoryTree) -> BTreeMap<Iri, Vec<Iri>> {
    tree.categories()
        .map(|cat| {
            let mut members: Vec<Iri> =
                graph.direct_members(cat.as_str()).iter().map(|e| graph.resolve(e).clone()).collect();
            members.sort();
            members.dedup();
            (cat.clone(), members)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMatch {
    pub iri: Iri,
    pub label: String,
}

/// Case-insensitive substring search over category labels for typeahead.
///
/// Results are ordered by match position, then label length, then IRI.
pub fn label_search(graph: &KnowledgeGraph, query: &str, k: usize) -> Vec<LabelMatch> {
    if query.is_empty() || k == 0 {
        return Vec::new();
    }
    let needle = query.to_lowercase();
    let mut hits: Vec<(usize, usize, LabelMatch)> = graph
        .categories()
        .iter()
        .filter_map(|iri| {
            let label = graph.display_label(iri);
            let hay = label.to_lowercase();
            let byte_pos = hay.find(&needle)?;
            let pos = hay[..byte_pos].chars().count();
            let len = label.chars().count();
            Some((pos, len, LabelMatch { iri: iri.clone(), label }))
        })
        .collect();
    hits.sort_by(|a, b| (a.0, a.1, &a.2.iri).cmp(&(b.0, b.1, &b.2.iri)));
    hits.truncate(k);
    hits.into_iter().map(|(_, _, m)| m).collect()
}
