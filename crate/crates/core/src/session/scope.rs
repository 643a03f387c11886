use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::SessionError;
use crate::kg::{member_entities, narrower_categories, CategoryTree, Iri, KgError, KnowledgeGraph, TreeNode};
use crate::temporal::{
    classify_entity, extract_temporal_profile, prune_categories, Period, PruneState, RelevanceClass, TemporalConfig,
    TemporalProfile,
};

/// Everything the system derives for a session from the graph: the
/// category trees below the roots, their member entities, the entities'
/// temporal classes and the default pruning. Recomputed, never persisted.
#[derive(Debug, Clone, Serialize)]
pub struct Scope {
    pub trees: Vec<CategoryTree>,
    /// Tree nodes across all roots, first occurrence wins, in BFS order.
    pub nodes: Vec<TreeNode>,
    pub members: BTreeMap<Iri, Vec<Iri>>,
    /// Inverse of `members`.
    pub entity_categories: BTreeMap<Iri, Vec<Iri>>,
    pub profiles: BTreeMap<Iri, TemporalProfile>,
    pub classes: BTreeMap<Iri, RelevanceClass>,
    pub pruning: BTreeMap<Iri, PruneState>,
}

impl Scope {
    pub fn compute(
        graph: &KnowledgeGraph,
        roots: &[Iri],
        max_depth: usize,
        period: &Period,
        temporal: &TemporalConfig,
    ) -> Result<Self, SessionError> {
        let mut trees = Vec::with_capacity(roots.len());
        for root in roots {
            let tree = narrower_categories(graph, root, max_depth).map_err(|e| match e {
                KgError::UnknownCategory(iri) => SessionError::UnknownCategory(iri),
                other => SessionError::Graph(other.to_string()),
            })?;
            trees.push(tree);
        }

        let mut seen = BTreeSet::new();
        let nodes: Vec<TreeNode> =
            trees.iter().flat_map(|t| t.nodes.iter()).filter(|n| seen.insert(n.category.clone())).cloned().collect();

        let mut members = BTreeMap::new();
        for tree in &trees {
            members.extend(member_entities(graph, tree));
        }

        let mut entity_categories: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
        for (cat, entities) in &members {
            for e in entities {
                entity_categories.entry(e.clone()).or_default().push(cat.clone());
            }
        }

        let profiles: BTreeMap<Iri, TemporalProfile> = entity_categories
            .keys()
            .map(|e| {
                let text = graph.description(e.as_str()).unwrap_or("");
                (e.clone(), extract_temporal_profile(text, temporal))
            })
            .collect();
        let classes: BTreeMap<Iri, RelevanceClass> =
            profiles.iter().map(|(e, p)| (e.clone(), classify_entity(p, period, temporal))).collect();

        let mut pruning = BTreeMap::new();
        for tree in &trees {
            pruning.extend(prune_categories(tree, &members, &classes));
        }

        Ok(Scope { trees, nodes, members, entity_categories, profiles, classes, pruning })
    }

    pub fn has_category(&self, iri: &Iri) -> bool {
        self.members.contains_key(iri)
    }

    pub fn has_entity(&self, iri: &Iri) -> bool {
        self.entity_categories.contains_key(iri)
    }

    pub fn categories_of(&self, entity: &Iri) -> &[Iri] {
        self.entity_categories.get(entity).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn members_of(&self, category: &Iri) -> &[Iri] {
        self.members.get(category).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn class_of(&self, entity: &Iri) -> RelevanceClass {
        self.classes.get(entity).copied().unwrap_or(RelevanceClass::Undated)
    }

    pub fn entities(&self) -> impl Iterator<Item = &Iri> {
        self.entity_categories.keys()
    }
}
