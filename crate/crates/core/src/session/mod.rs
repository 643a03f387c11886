//! Search sessions: the researcher's operationalisation of a period kept as
//! an append-only log of selection decisions, plus relevance assertions on
//! retrieved fragments that point back into that log.

mod scope;
mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicI64, Ordering};

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{CorpusIndex, Fragment};
use crate::kg::{Iri, KnowledgeGraph};
use crate::temporal::{InvalidPeriod, Period, PruneState, RelevanceClass, TemporalConfig};

pub use scope::Scope;
pub use store::{valid_session_id, SessionStore};

/// Session directory used when none is configured.
pub const DEFAULT_SESSION_DIR: &str = "sessions";

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    InvalidPeriod(#[from] InvalidPeriod),
    #[error("at least one root category is required")]
    NoRoots,
    #[error("unknown category {0}")]
    UnknownCategory(Iri),
    #[error("{0} is not part of this session's categories or entities")]
    UnknownTarget(Iri),
    #[error("no sentence {sentence_index} in document `{doc_id}`")]
    UnknownFragment { doc_id: String, sentence_index: usize },
    #[error("sentence {sentence_index} of `{doc_id}` is not in the current result set")]
    FragmentNotInResultSet { doc_id: String, sentence_index: usize },
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("invalid session id `{0}`")]
    InvalidId(String),
    #[error("invalid session document: {0}")]
    InvalidExport(String),
    #[error("graph error: {0}")]
    Graph(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// UTC instant with millisecond precision, serialised as
/// `YYYY-MM-DDTHH:MM:SS.mmmZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.3fZ";

impl Timestamp {
    pub fn from_millis(ms: i64) -> Self {
        Timestamp(Utc.timestamp_millis_opt(ms).single().expect("timestamp in range"))
    }

    pub fn millis(&self) -> i64 {
        self.0.timestamp_millis()
    }

    pub fn parse(s: &str) -> Result<Self, chrono::ParseError> {
        let dt = chrono::NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)?;
        Ok(Timestamp::from_millis(dt.and_utc().timestamp_millis()))
    }
}

impl std::fmt::Display for Timestamp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0.format(TIMESTAMP_FORMAT))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Timestamp::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Timestamp::from_millis(Utc::now().timestamp_millis())
    }
}

/// Deterministic clock for tests: starts at a fixed instant and advances
/// by `step_ms` on every reading.
pub struct SteppingClock {
    next: AtomicI64,
    step_ms: i64,
}

impl SteppingClock {
    pub fn new(start_ms: i64, step_ms: i64) -> Self {
        SteppingClock { next: AtomicI64::new(start_ms), step_ms }
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> Timestamp {
        Timestamp::from_millis(self.next.fetch_add(self.step_ms, Ordering::SeqCst))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Select,
    Deselect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Category,
    Entity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    SystemDefault,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub action: Action,
    pub target_kind: TargetKind,
    pub target: Iri,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceAssertion {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub fragment: Fragment,
    /// Code-point span of the asserted sentence.
    pub sentence_start: usize,
    pub sentence_end: usize,
    pub entities: Vec<Iri>,
    pub period_subjects: Vec<Iri>,
    pub supporting_decisions: Vec<u64>,
}

/// Parameters of a new session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewSession {
    #[serde(default)]
    pub motivation: String,
    pub period: Period,
    pub roots: Vec<Iri>,
    #[serde(default)]
    pub max_depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSession {
    pub session_id: String,
    pub created_at: Timestamp,
    pub motivation: String,
    pub period: Period,
    pub roots: Vec<Iri>,
    pub max_depth: usize,
    decisions: Vec<Decision>,
    assertions: Vec<RelevanceAssertion>,
    next_seq: u64,
}

/// Effective selection derived from the log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub categories: BTreeSet<Iri>,
    pub entities: BTreeSet<Iri>,
}

impl SearchSession {
    /// Validates the request, derives the scope and seeds the log with one
    /// system default decision per category and per entity.
    pub fn create(
        session_id: impl Into<String>,
        request: NewSession,
        default_max_depth: usize,
        graph: &KnowledgeGraph,
        temporal: &TemporalConfig,
        clock: &dyn Clock,
    ) -> Result<(SearchSession, Scope), SessionError> {
        request.period.validate()?;
        if request.roots.is_empty() {
            return Err(SessionError::NoRoots);
        }
        let max_depth = request.max_depth.unwrap_or(default_max_depth);
        let scope = Scope::compute(graph, &request.roots, max_depth, &request.period, temporal)?;
        let created_at = clock.now();
        let mut session = SearchSession {
            session_id: session_id.into(),
            created_at,
            motivation: request.motivation,
            period: request.period,
            roots: request.roots,
            max_depth,
            decisions: Vec::new(),
            assertions: Vec::new(),
            next_seq: 1,
        };
        for node in &scope.nodes {
            let action = match scope.pruning.get(&node.category) {
                Some(PruneState::Excluded) => Action::Deselect,
                _ => Action::Select,
            };
            session.push_decision(
                created_at,
                action,
                TargetKind::Category,
                node.category.clone(),
                Origin::SystemDefault,
            );
        }
        for entity in scope.entities() {
            let action = match scope.class_of(entity) {
                RelevanceClass::OutOfPeriod => Action::Deselect,
                _ => Action::Select,
            };
            session.push_decision(created_at, action, TargetKind::Entity, entity.clone(), Origin::SystemDefault);
        }
        Ok((session, scope))
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn assertions(&self) -> &[RelevanceAssertion] {
        &self.assertions
    }

    fn last_timestamp(&self) -> Timestamp {
        let last_decision = self.decisions.last().map(|d| d.timestamp);
        let last_assertion = self.assertions.last().map(|a| a.timestamp);
        last_decision.max(last_assertion).unwrap_or(self.created_at)
    }

    /// Clock reading clamped so the log never goes back in time.
    fn stamp(&self, clock: &dyn Clock) -> Timestamp {
        clock.now().max(self.last_timestamp())
    }

    fn take_seq(&mut self) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        seq
    }

    fn push_decision(
        &mut self,
        timestamp: Timestamp,
        action: Action,
        target_kind: TargetKind,
        target: Iri,
        origin: Origin,
    ) -> &Decision {
        let seq = self.take_seq();
        self.decisions.push(Decision { seq, timestamp, action, target_kind, target, origin });
        self.decisions.last().expect("just pushed")
    }

    /// Appends a user decision. Earlier decisions are kept.
    pub fn record_decision(
        &mut self,
        scope: &Scope,
        action: Action,
        target_kind: TargetKind,
        target: Iri,
        clock: &dyn Clock,
    ) -> Result<Decision, SessionError> {
        let known = match target_kind {
            TargetKind::Category => scope.has_category(&target),
            TargetKind::Entity => scope.has_entity(&target),
        };
        if !known {
            return Err(SessionError::UnknownTarget(target));
        }
        let ts = self.stamp(clock);
        Ok(self.push_decision(ts, action, target_kind, target, Origin::User).clone())
    }

    pub fn effective_selection(&self, scope: &Scope) -> Selection {
        effective_selection(&self.decisions, scope)
    }

    /// Records that a retrieved sentence is relevant. The assertion carries
    /// the selected entities linked in the sentence and the seq numbers of
    /// every decision about those entities or their categories.
    pub fn assert_fragment_relevance(
        &mut self,
        scope: &Scope,
        index: &CorpusIndex,
        doc_id: &str,
        sentence_index: usize,
        clock: &dyn Clock,
    ) -> Result<RelevanceAssertion, SessionError> {
        let unknown = || SessionError::UnknownFragment { doc_id: doc_id.to_owned(), sentence_index };
        let links = index.sentence_links(doc_id, sentence_index).ok_or_else(unknown)?;
        let selection = self.effective_selection(scope);
        let entities: BTreeSet<Iri> =
            links.into_iter().map(|l| &l.entity).filter(|e| selection.entities.contains(*e)).cloned().collect();
        if entities.is_empty() {
            return Err(SessionError::FragmentNotInResultSet { doc_id: doc_id.to_owned(), sentence_index });
        }
        let categories: BTreeSet<&Iri> = entities.iter().flat_map(|e| scope.categories_of(e)).collect();
        let supporting_decisions = self
            .decisions
            .iter()
            .filter(|d| match d.target_kind {
                TargetKind::Entity => entities.contains(&d.target),
                TargetKind::Category => categories.contains(&d.target),
            })
            .map(|d| d.seq)
            .collect();
        let doc = index.document(doc_id).ok_or_else(unknown)?;
        let (sentence_start, sentence_end) = doc.sentences[sentence_index];
        let timestamp = self.stamp(clock);
        let assertion = RelevanceAssertion {
            seq: self.take_seq(),
            timestamp,
            fragment: Fragment { doc_id: doc_id.to_owned(), sentence_index, context_before: 0, context_after: 0 },
            sentence_start,
            sentence_end,
            entities: entities.into_iter().collect(),
            period_subjects: self.roots.clone(),
            supporting_decisions,
        };
        self.assertions.push(assertion.clone());
        Ok(assertion)
    }

    pub fn export(&self) -> ExportDocument {
        ExportDocument {
            session_id: self.session_id.clone(),
            created_at: self.created_at,
            motivation: self.motivation.clone(),
            period: self.period.clone(),
            roots: self.roots.clone(),
            max_depth: self.max_depth,
            decisions: self.decisions.clone(),
            assertions: self.assertions.iter().map(AssertionRecord::from).collect(),
        }
    }

    /// Rebuilds a session from its export. Sentence indices are recovered
    /// from the corpus by span.
    pub fn import(doc: ExportDocument, index: &CorpusIndex) -> Result<SearchSession, SessionError> {
        doc.period.validate()?;
        if doc.roots.is_empty() {
            return Err(SessionError::NoRoots);
        }
        let mut seqs: Vec<(u64, Timestamp)> = doc
            .decisions
            .iter()
            .map(|d| (d.seq, d.timestamp))
            .chain(doc.assertions.iter().map(|a| (a.seq, a.timestamp)))
            .collect();
        seqs.sort();
        if seqs.windows(2).any(|w| w[0].0 == w[1].0 || w[0].1 > w[1].1) {
            return Err(SessionError::InvalidExport(
                "seq numbers must be unique and timestamps non-decreasing in seq order".into(),
            ));
        }
        if doc.decisions.windows(2).any(|w| w[0].seq >= w[1].seq) {
            return Err(SessionError::InvalidExport("decisions out of seq order".into()));
        }
        let first_user = doc.decisions.iter().position(|d| d.origin == Origin::User);
        if let Some(pos) = first_user {
            if doc.decisions[pos..].iter().any(|d| d.origin == Origin::SystemDefault) {
                return Err(SessionError::InvalidExport("system defaults after user decisions".into()));
            }
        }
        let known: BTreeSet<u64> = doc.decisions.iter().map(|d| d.seq).collect();
        let mut assertions = Vec::with_capacity(doc.assertions.len());
        for a in doc.assertions {
            if a.entities.is_empty() || !a.supporting_decisions.iter().all(|s| known.contains(s)) {
                return Err(SessionError::InvalidExport(format!("assertion {} is inconsistent", a.seq)));
            }
            let sentence_index =
                index.locate_sentence(&a.doc_id, a.sentence_start, a.sentence_end).ok_or_else(|| {
                    SessionError::InvalidExport(format!(
                        "assertion {}: no sentence [{}, {}) in `{}`",
                        a.seq, a.sentence_start, a.sentence_end, a.doc_id
                    ))
                })?;
            assertions.push(RelevanceAssertion {
                seq: a.seq,
                timestamp: a.timestamp,
                fragment: Fragment { doc_id: a.doc_id, sentence_index, context_before: 0, context_after: 0 },
                sentence_start: a.sentence_start,
                sentence_end: a.sentence_end,
                entities: a.entities,
                period_subjects: a.period_subjects,
                supporting_decisions: a.supporting_decisions,
            });
        }
        let next_seq = seqs.last().map_or(1, |(s, _)| s + 1);
        Ok(SearchSession {
            session_id: doc.session_id,
            created_at: doc.created_at,
            motivation: doc.motivation,
            period: doc.period,
            roots: doc.roots,
            max_depth: doc.max_depth,
            decisions: doc.decisions,
            assertions,
            next_seq,
        })
    }
}

/// Left fold of a decision log: the last decision per target wins, and an
/// entity counts only if at least one of its categories is selected too.
pub fn effective_selection(decisions: &[Decision], scope: &Scope) -> Selection {
    let mut categories: BTreeMap<&Iri, Action> = BTreeMap::new();
    let mut entities: BTreeMap<&Iri, Action> = BTreeMap::new();
    for d in decisions {
        let map = match d.target_kind {
            TargetKind::Category => &mut categories,
            TargetKind::Entity => &mut entities,
        };
        map.insert(&d.target, d.action);
    }
    let categories: BTreeSet<Iri> =
        categories.into_iter().filter(|(_, a)| *a == Action::Select).map(|(c, _)| c.clone()).collect();
    let entities = entities
        .into_iter()
        .filter(|(e, a)| *a == Action::Select && scope.categories_of(e).iter().any(|c| categories.contains(c)))
        .map(|(e, _)| e.clone())
        .collect();
    Selection { categories, entities }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertionRecord {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub doc_id: String,
    pub sentence_start: usize,
    pub sentence_end: usize,
    pub entities: Vec<Iri>,
    pub period_subjects: Vec<Iri>,
    pub supporting_decisions: Vec<u64>,
}

impl From<&RelevanceAssertion> for AssertionRecord {
    fn from(a: &RelevanceAssertion) -> Self {
        AssertionRecord {
            seq: a.seq,
            timestamp: a.timestamp,
            doc_id: a.fragment.doc_id.clone(),
            sentence_start: a.sentence_start,
            sentence_end: a.sentence_end,
            entities: a.entities.clone(),
            period_subjects: a.period_subjects.clone(),
            supporting_decisions: a.supporting_decisions.clone(),
        }
    }
}

/// The session export and on-disk format. Field order is the serialised
/// key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportDocument {
    pub session_id: String,
    pub created_at: Timestamp,
    pub motivation: String,
    pub period: Period,
    pub roots: Vec<Iri>,
    pub max_depth: usize,
    pub decisions: Vec<Decision>,
    pub assertions: Vec<AssertionRecord>,
}

impl ExportDocument {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("export serialises");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SessionError> {
        Ok(serde_json::from_slice(bytes)?)
    }
}
