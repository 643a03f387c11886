//! Application layer shared by the HTTP service and the C ABI: the loaded
//! graph and corpus, the session store, and one lock per live session.
//!
//! Every operation that changes a session writes the session file before
//! it returns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, EngineSettings, ServiceConfig};
use crate::corpus::{load_corpus, CorpusError, CorpusIndex, FragmentView};
use crate::kg::{label_search, load_graph, Iri, KgError, KnowledgeGraph, LabelMatch};
use crate::session::{
    Action, AssertionRecord, Clock, Decision, NewSession, Scope, SearchSession, Selection, SessionError, SessionStore,
    SystemClock, TargetKind, Timestamp,
};
use crate::temporal::{Period, PruneState, RelevanceClass};

pub const DEFAULT_SEARCH_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Invalid,
    NotFound,
    Conflict,
    Internal,
}

/// An error with a stable machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct EngineError {
    pub kind: ErrorKind,
    pub code: &'static str,
    pub message: String,
}

impl EngineError {
    pub fn new(kind: ErrorKind, code: &'static str, message: impl Into<String>) -> Self {
        EngineError { kind, code, message: message.into() }
    }

    pub fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Invalid, code, message)
    }
}

impl From<SessionError> for EngineError {
    fn from(e: SessionError) -> Self {
        let (kind, code) = match &e {
            SessionError::InvalidPeriod(_) => (ErrorKind::Invalid, "invalid_period"),
            SessionError::NoRoots => (ErrorKind::Invalid, "no_roots"),
            SessionError::UnknownCategory(_) => (ErrorKind::NotFound, "unknown_category"),
            SessionError::UnknownTarget(_) => (ErrorKind::NotFound, "unknown_target"),
            SessionError::UnknownFragment { .. } => (ErrorKind::NotFound, "unknown_fragment"),
            SessionError::FragmentNotInResultSet { .. } => (ErrorKind::Conflict, "fragment_not_in_result_set"),
            SessionError::NotFound(_) | SessionError::InvalidId(_) => (ErrorKind::NotFound, "session_not_found"),
            SessionError::InvalidExport(_) | SessionError::Json(_) => (ErrorKind::Internal, "corrupt_session"),
            SessionError::Graph(_) => (ErrorKind::Internal, "graph_error"),
            SessionError::Io(_) => (ErrorKind::Internal, "io_error"),
        };
        EngineError::new(kind, code, e.to_string())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("knowledge graph: {0}")]
    Graph(#[from] KgError),
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("session store: {0}")]
    Store(#[from] SessionError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub created_at: Timestamp,
    pub motivation: String,
    pub period: Period,
    pub roots: Vec<Iri>,
    pub max_depth: usize,
    pub decision_count: usize,
    pub assertion_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityView {
    pub iri: Iri,
    pub label: String,
    pub class: RelevanceClass,
    pub count: usize,
    /// The entity's own latest decision.
    pub state: Action,
    /// Whether the entity is in the effective selection.
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryView {
    pub iri: Iri,
    pub label: String,
    pub depth: usize,
    pub parent: Option<Iri>,
    pub default_state: PruneState,
    pub selected: bool,
    /// Sum of the member counts.
    pub count: usize,
    pub entities: Vec<EntityView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preview: Option<Vec<FragmentView>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionOverview {
    pub session: SessionSummary,
    pub selection: Selection,
    pub categories: Vec<CategoryView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub action: Action,
    pub target_kind: TargetKind,
    pub target: Iri,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionResponse {
    pub decision: Decision,
    pub selection: Selection,
    pub log_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultsPage {
    pub total: usize,
    pub page: usize,
    pub page_size: usize,
    pub fragments: Vec<FragmentView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Counts {
    Year(BTreeMap<i32, usize>),
    Meta(BTreeMap<String, usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Analytics {
    pub group_by: String,
    pub total: usize,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionRequest {
    pub doc_id: String,
    pub sentence_index: usize,
}

/// What analytics are grouped by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupBy {
    Year,
    Meta(String),
}

impl std::str::FromStr for GroupBy {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "year" => Ok(GroupBy::Year),
            _ => match s.strip_prefix("meta:") {
                Some(key) if !key.is_empty() => Ok(GroupBy::Meta(key.to_owned())),
                _ => Err(EngineError::invalid(
                    "invalid_group_by",
                    format!("group_by must be `year` or `meta:<key>`, got `{s}`"),
                )),
            },
        }
    }
}

struct Live {
    session: SearchSession,
    scope: Scope,
}

pub struct Engine {
    graph: KnowledgeGraph,
    index: CorpusIndex,
    store: SessionStore,
    settings: EngineSettings,
    clock: Box<dyn Clock>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Live>>>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl Engine {
    pub fn new(graph: KnowledgeGraph, index: CorpusIndex, store: SessionStore, settings: EngineSettings) -> Self {
        Engine { graph, index, store, settings, clock: Box::new(SystemClock), sessions: Mutex::new(HashMap::new()) }
    }

    pub fn with_clock(mut self, clock: impl Clock + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    /// Validates the config, loads graph and corpus and opens the store.
    pub fn from_config(config: &ServiceConfig) -> Result<Self, StartupError> {
        config.validate()?;
        let (graph, warnings) = load_graph(&config.kg_path, &config.graph_config())?;
        for w in &warnings {
            tracing::warn!("{w}");
        }
        let index = load_corpus(&config.corpus_path, config.corpus.clone(), graph.aliases().clone())?;
        let store = SessionStore::open(&config.session_dir)?;
        tracing::info!(
            categories = graph.categories().len(),
            entities = graph.entities().len(),
            documents = index.len(),
            postings = index.total_postings(),
            "loaded"
        );
        Ok(Engine::new(graph, index, store, config.engine_settings()))
    }

    pub fn graph(&self) -> &KnowledgeGraph {
        &self.graph
    }

    pub fn index(&self) -> &CorpusIndex {
        &self.index
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    pub fn settings(&self) -> &EngineSettings {
        &self.settings
    }

    pub fn search_categories(&self, query: &str, k: Option<usize>) -> Vec<LabelMatch> {
        label_search(&self.graph, query, k.unwrap_or(DEFAULT_SEARCH_K))
    }

    pub fn create_session(&self, request: NewSession) -> Result<SessionOverview, EngineError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let (session, scope) = SearchSession::create(
            id.clone(),
            request,
            self.settings.max_depth,
            &self.graph,
            &self.settings.temporal,
            self.clock.as_ref(),
        )?;
        self.store.save(&session.export())?;
        let live = Live { session, scope };
        let overview = self.overview(&live, false);
        lock(&self.sessions).insert(id, Arc::new(Mutex::new(live)));
        Ok(overview)
    }

    /// The live session, loaded from the store on first use.
    fn live(&self, id: &str) -> Result<Arc<Mutex<Live>>, EngineError> {
        let mut sessions = lock(&self.sessions);
        if let Some(live) = sessions.get(id) {
            return Ok(Arc::clone(live));
        }
        let doc = self.store.load(id)?;
        let session = SearchSession::import(doc, &self.index)?;
        let scope =
            Scope::compute(&self.graph, &session.roots, session.max_depth, &session.period, &self.settings.temporal)?;
        let live = Arc::new(Mutex::new(Live { session, scope }));
        sessions.insert(id.to_owned(), Arc::clone(&live));
        Ok(live)
    }

    /// Runs `f` on a copy of the session and commits the copy only once it
    /// has been written to the store.
    fn mutate<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut SearchSession, &Scope) -> Result<T, SessionError>,
    ) -> Result<(T, Selection, usize), EngineError> {
        let live = self.live(id)?;
        let mut live = lock(&live);
        let mut draft = live.session.clone();
        let out = f(&mut draft, &live.scope)?;
        self.store.save(&draft.export())?;
        live.session = draft;
        let selection = live.session.effective_selection(&live.scope);
        Ok((out, selection, live.session.decisions().len()))
    }

    pub fn summary(&self, id: &str) -> Result<SessionSummary, EngineError> {
        let live = self.live(id)?;
        let live = lock(&live);
        Ok(summary(&live.session))
    }

    pub fn assessment(&self, id: &str) -> Result<SessionOverview, EngineError> {
        let live = self.live(id)?;
        let live = lock(&live);
        Ok(self.overview(&live, true))
    }

    fn overview(&self, live: &Live, with_preview: bool) -> SessionOverview {
        let Live { session, scope } = live;
        let selection = session.effective_selection(scope);
        let mut entity_state: BTreeMap<&Iri, Action> = BTreeMap::new();
        for d in session.decisions() {
            if d.target_kind == TargetKind::Entity {
                entity_state.insert(&d.target, d.action);
            }
        }
        let all_entities: Vec<Iri> = scope.entities().cloned().collect();
        let counts = self.index.entity_counts(&all_entities);

        let mut categories: Vec<CategoryView> = scope
            .nodes
            .iter()
            .map(|node| {
                let cat = &node.category;
                let entities: Vec<EntityView> = scope
                    .members_of(cat)
                    .iter()
                    .map(|e| EntityView {
                        iri: e.clone(),
                        label: self.graph.display_label(e),
                        class: scope.class_of(e),
                        count: counts.get(e).copied().unwrap_or(0),
                        state: entity_state.get(e).copied().unwrap_or(Action::Select),
                        selected: selection.entities.contains(e),
                    })
                    .collect();
                // Previews follow the entity decisions only, so a pruned
                // category can still be judged from its snippets.
                let preview = with_preview.then(|| {
                    let shown: Vec<Iri> =
                        entities.iter().filter(|e| e.state == Action::Select).map(|e| e.iri.clone()).collect();
                    self.index.preview(&shown, self.settings.preview_k, self.settings.preview_context)
                });
                CategoryView {
                    iri: cat.clone(),
                    label: self.graph.display_label(cat),
                    depth: node.depth,
                    parent: node.parent.clone(),
                    default_state: scope.pruning.get(cat).copied().unwrap_or(PruneState::Included),
                    selected: selection.categories.contains(cat),
                    count: entities.iter().map(|e| e.count).sum(),
                    entities,
                    preview,
                }
            })
            .collect();
        categories.sort_by(|a, b| (a.depth, &a.label, &a.iri).cmp(&(b.depth, &b.label, &b.iri)));
        SessionOverview { session: summary(session), selection, categories }
    }

    pub fn decide(&self, id: &str, request: DecisionRequest) -> Result<DecisionResponse, EngineError> {
        let clock = self.clock.as_ref();
        let (decision, selection, log_length) = self.mutate(id, |s, scope| {
            s.record_decision(scope, request.action, request.target_kind, request.target, clock)
        })?;
        Ok(DecisionResponse { decision, selection, log_length })
    }

    /// Current selection of a session.
    pub fn selection(&self, id: &str) -> Result<Selection, EngineError> {
        let live = self.live(id)?;
        let live = lock(&live);
        Ok(live.session.effective_selection(&live.scope))
    }

    /// One page of the result set. Pages are 1-based; `page_size` is
    /// clamped to the configured maximum.
    pub fn results(&self, id: &str, page: Option<usize>, page_size: Option<usize>) -> Result<ResultsPage, EngineError> {
        let page = page.unwrap_or(1);
        if page == 0 {
            return Err(EngineError::invalid("invalid_page", "page numbers start at 1"));
        }
        let page_size = page_size.unwrap_or(self.settings.page_size);
        if page_size == 0 {
            return Err(EngineError::invalid("invalid_page_size", "page_size must be at least 1"));
        }
        let page_size = page_size.min(self.settings.max_page_size);

        let (selection, excluded) = {
            let live = self.live(id)?;
            let live = lock(&live);
            let selection = live.session.effective_selection(&live.scope);
            let excluded: BTreeSet<Iri> =
                live.scope.entities().filter(|e| !selection.entities.contains(*e)).cloned().collect();
            (selection, excluded)
        };
        let fragments = self.index.fetch_fragments(&selection.entities, &excluded);
        let highlighted: BTreeSet<&Iri> = selection.entities.iter().collect();
        let views = fragments
            .iter()
            .skip((page - 1).saturating_mul(page_size))
            .take(page_size)
            .filter_map(|f| self.index.view(f, &highlighted))
            .collect();
        Ok(ResultsPage { total: fragments.len(), page, page_size, fragments: views })
    }

    pub fn analytics(&self, id: &str, group_by: &str) -> Result<Analytics, EngineError> {
        let grouping: GroupBy = group_by.parse()?;
        let selection = self.selection(id)?;
        let counts = match &grouping {
            GroupBy::Year => Counts::Year(self.index.timeline_counts(&selection.entities)),
            GroupBy::Meta(key) => Counts::Meta(self.index.facet_counts(&selection.entities, key)),
        };
        Ok(Analytics { group_by: group_by.to_owned(), total: self.index.link_count(&selection.entities), counts })
    }

    pub fn assert_relevance(&self, id: &str, request: &AssertionRequest) -> Result<AssertionRecord, EngineError> {
        let clock = self.clock.as_ref();
        let index = &self.index;
        let (assertion, _, _) = self.mutate(id, |s, scope| {
            s.assert_fragment_relevance(scope, index, &request.doc_id, request.sentence_index, clock)
        })?;
        Ok(AssertionRecord::from(&assertion))
    }

    /// The export document as written to disk.
    pub fn export(&self, id: &str) -> Result<Vec<u8>, EngineError> {
        let live = self.live(id)?;
        let live = lock(&live);
        Ok(live.session.export().to_bytes())
    }
}

fn summary(session: &SearchSession) -> SessionSummary {
    SessionSummary {
        session_id: session.session_id.clone(),
        created_at: session.created_at,
        motivation: session.motivation.clone(),
        period: session.period.clone(),
        roots: session.roots.clone(),
        max_depth: session.max_depth,
        decision_count: session.decisions().len(),
        assertion_count: session.assertions().len(),
    }
}
