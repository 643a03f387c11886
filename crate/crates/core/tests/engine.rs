mod common;

use std::collections::BTreeSet;

use common::Toy;
use pastsearch::corpus::FragmentView;
use pastsearch::engine::{AssertionRequest, Counts, DecisionRequest, ErrorKind};
use pastsearch::kg::Iri;
use pastsearch::sample::*;
use pastsearch::session::{Action, NewSession, TargetKind};
use pastsearch::temporal::{PruneState, RelevanceClass};

fn request(start: i32, end: i32, roots: &[&str]) -> NewSession {
    serde_json::from_value(serde_json::json!({
        "motivation": "How was the revolutionary terror remembered?",
        "period": {"label": "French Revolution", "start_year": start, "end_year": end},
        "roots": roots,
    }))
    .unwrap()
}

/// Highlights inside the matched sentence, ignoring the context around it.
fn in_sentence(f: &FragmentView) -> Vec<&Iri> {
    f.highlights
        .iter()
        .filter(|h| f.text_start + h.start >= f.sentence_start && f.text_start + h.end <= f.sentence_end)
        .map(|h| &h.entity)
        .collect()
}

fn toggle(action: Action, kind: TargetKind, target: &str) -> DecisionRequest {
    DecisionRequest { action, target_kind: kind, target: iri(target) }
}

#[test]
fn new_session_tree_and_defaults() {
    let toy = Toy::new(20, 3);
    let engine = toy.engine();
    let o = engine.create_session(request(1789, 1799, &[FRENCH_REVOLUTION])).unwrap();
    assert_eq!(o.session.decision_count, 7);
    let labels: Vec<(usize, &str)> = o.categories.iter().map(|c| (c.depth, c.label.as_str())).collect();
    assert_eq!(labels, [(0, "French Revolution"), (1, "French First Republic"), (1, "Montagnards")]);
    assert!(o.categories.iter().all(|c| c.default_state == PruneState::Included && c.selected));
    assert!(o.categories.iter().all(|c| c.preview.is_none()));

    let ffr = &o.categories[1];
    let drownings = ffr.entities.iter().find(|e| e.iri.as_str() == DROWNINGS_AT_NANTES).unwrap();
    assert_eq!(drownings.count, 0);
    assert!(drownings.selected);
    let bastille = &o.categories[0].entities[0];
    assert_eq!(bastille.class, RelevanceClass::Borderline);
    for c in &o.categories {
        for e in &c.entities {
            assert_eq!(e.count, engine.index().postings(&e.iri).len());
        }
        assert_eq!(c.count, c.entities.iter().map(|e| e.count).sum::<usize>());
    }
}

#[test]
fn pruned_defaults_for_an_unrelated_period() {
    let toy = Toy::new(5, 1);
    let engine = toy.engine();
    let o = engine.create_session(request(1900, 1950, &[FRENCH_REVOLUTION])).unwrap();
    let ffr = o.categories.iter().find(|c| c.iri.as_str() == FRENCH_FIRST_REPUBLIC).unwrap();
    assert_eq!(ffr.default_state, PruneState::Excluded);
    assert!(!ffr.selected);
    assert!(ffr.entities.iter().all(|e| !e.selected));
}

#[test]
fn request_validation() {
    let toy = Toy::new(5, 1);
    let engine = toy.engine();
    let e = engine.create_session(request(1800, 1700, &[FRENCH_REVOLUTION])).unwrap_err();
    assert_eq!((e.kind, e.code), (ErrorKind::Invalid, "invalid_period"));
    let e = engine.create_session(request(1789, 1799, &[])).unwrap_err();
    assert_eq!(e.kind, ErrorKind::Invalid);
    let e = engine.create_session(request(1789, 1799, &["http://dbpedia.org/resource/Category:Nope"])).unwrap_err();
    assert_eq!((e.kind, e.code), (ErrorKind::NotFound, "unknown_category"));
    assert!(engine.store().list().unwrap().is_empty());
    assert_eq!(engine.assessment("missing").unwrap_err().kind, ErrorKind::NotFound);
    assert_eq!(engine.assessment("../etc").unwrap_err().kind, ErrorKind::NotFound);
}

#[test]
fn deselect_and_reselect() {
    let toy = Toy::new(30, 11);
    let engine = toy.engine();
    let id = engine.create_session(request(1789, 1799, &[FRENCH_REVOLUTION])).unwrap().session.session_id;
    let before = engine.results(&id, None, Some(200)).unwrap();

    let r = engine.decide(&id, toggle(Action::Deselect, TargetKind::Entity, ROBESPIERRE)).unwrap();
    assert_eq!(r.log_length, 8);
    assert_eq!(r.decision.seq, 8);
    assert!(!r.selection.entities.contains(&iri(ROBESPIERRE)));
    let without = engine.results(&id, None, Some(200)).unwrap();
    assert!(without.total < before.total);
    for f in &without.fragments {
        assert!(f.highlights.iter().all(|h| h.entity.as_str() != ROBESPIERRE));
        assert!(!in_sentence(f).is_empty());
    }
    let a = engine.assessment(&id).unwrap();
    for c in &a.categories {
        for p in c.preview.as_ref().unwrap() {
            assert!(p.highlights.iter().all(|h| h.entity.as_str() != ROBESPIERRE));
        }
    }

    let r = engine.decide(&id, toggle(Action::Select, TargetKind::Entity, ROBESPIERRE)).unwrap();
    assert_eq!(r.log_length, 9);
    assert!(r.selection.entities.contains(&iri(ROBESPIERRE)));
    assert_eq!(engine.results(&id, None, Some(200)).unwrap(), before);

    let e = engine
        .decide(&id, toggle(Action::Deselect, TargetKind::Entity, "http://dbpedia.org/resource/Napoleon"))
        .unwrap_err();
    assert_eq!((e.kind, e.code), (ErrorKind::NotFound, "unknown_target"));
    assert_eq!(engine.summary(&id).unwrap().decision_count, 9);
}

#[test]
fn pagination() {
    let toy = Toy::new(50, 5);
    let engine = toy.engine();
    let id = engine.create_session(request(1789, 1799, &[FRENCH_REVOLUTION])).unwrap().session.session_id;
    let all = engine.results(&id, Some(1), Some(1000)).unwrap();
    assert_eq!(all.page_size, 200);
    assert!(all.total > 20 && all.total <= 200);
    assert_eq!(all.fragments.len(), all.total);

    let first = engine.results(&id, None, None).unwrap();
    assert_eq!((first.page, first.page_size, first.fragments.len()), (1, 20, 20));
    let mut paged = Vec::new();
    for page in 1.. {
        let p = engine.results(&id, Some(page), Some(7)).unwrap();
        assert_eq!(p.total, all.total);
        if p.fragments.is_empty() {
            break;
        }
        paged.extend(p.fragments);
    }
    assert_eq!(paged, all.fragments);

    let order: Vec<_> = all.fragments.iter().map(|f| (f.date, f.doc_id.clone(), f.sentence_index)).collect();
    let mut sorted = order.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(order, sorted);

    assert_eq!(engine.results(&id, Some(0), None).unwrap_err().kind, ErrorKind::Invalid);
    assert_eq!(engine.results(&id, None, Some(0)).unwrap_err().kind, ErrorKind::Invalid);
}

#[test]
fn empty_selection_has_no_results() {
    let toy = Toy::new(10, 2);
    let engine = toy.engine();
    let id = engine.create_session(request(1789, 1799, &[FRENCH_REVOLUTION])).unwrap().session.session_id;
    for c in [FRENCH_REVOLUTION, MONTAGNARDS, FRENCH_FIRST_REPUBLIC] {
        engine.decide(&id, toggle(Action::Deselect, TargetKind::Category, c)).unwrap();
    }
    let page = engine.results(&id, None, None).unwrap();
    assert_eq!(page.total, 0);
    assert!(page.fragments.is_empty());
    let a = engine.analytics(&id, "year").unwrap();
    assert_eq!(a.total, 0);
}

#[test]
fn analytics_conserve_counts() {
    let toy = Toy::new(50, 9);
    let engine = toy.engine();
    let id = engine.create_session(request(1789, 1799, &[FRENCH_REVOLUTION])).unwrap().session.session_id;
    engine.decide(&id, toggle(Action::Deselect, TargetKind::Entity, BASTILLE)).unwrap();
    let years = engine.analytics(&id, "year").unwrap();
    let parties = engine.analytics(&id, "meta:party").unwrap();
    let missing = engine.analytics(&id, "meta:nope").unwrap();
    let sum = |c: &Counts| match c {
        Counts::Year(m) => m.values().sum::<usize>(),
        Counts::Meta(m) => m.values().sum::<usize>(),
    };
    assert!(years.total > 0);
    assert_eq!(sum(&years.counts), years.total);
    assert_eq!(sum(&parties.counts), years.total);
    match &missing.counts {
        Counts::Meta(m) => assert_eq!(m.keys().collect::<Vec<_>>(), ["(none)"]),
        other => panic!("{other:?}"),
    }
    for bad in ["", "month", "meta:", "Year"] {
        let e = engine.analytics(&id, bad).unwrap_err();
        assert_eq!((e.kind, e.code), (ErrorKind::Invalid, "invalid_group_by"));
    }
}

#[test]
fn assertions_and_conflicts() {
    let toy = Toy::new(30, 4);
    let engine = toy.engine();
    let id = engine.create_session(request(1789, 1799, &[FRENCH_REVOLUTION])).unwrap().session.session_id;
    let page = engine.results(&id, None, Some(200)).unwrap();
    let f = &page.fragments[0];
    let record = engine
        .assert_relevance(&id, &AssertionRequest { doc_id: f.doc_id.clone(), sentence_index: f.sentence_index })
        .unwrap();
    assert_eq!(record.seq, 8);
    assert_eq!((record.sentence_start, record.sentence_end), (f.sentence_start, f.sentence_end));
    let linked: BTreeSet<&Iri> = in_sentence(f).into_iter().collect();
    assert_eq!(record.entities.iter().collect::<BTreeSet<_>>(), linked);
    assert_eq!(record.period_subjects, [iri(FRENCH_REVOLUTION)]);
    assert!(!record.supporting_decisions.is_empty());

    // A sentence whose only link is to a deselected entity.
    let only_bastille = page
        .fragments
        .iter()
        .find(|f| in_sentence(f).iter().all(|e| e.as_str() == BASTILLE))
        .expect("toy corpus has a Bastille-only sentence");
    engine.decide(&id, toggle(Action::Deselect, TargetKind::Entity, BASTILLE)).unwrap();
    let e = engine
        .assert_relevance(
            &id,
            &AssertionRequest { doc_id: only_bastille.doc_id.clone(), sentence_index: only_bastille.sentence_index },
        )
        .unwrap_err();
    assert_eq!((e.kind, e.code), (ErrorKind::Conflict, "fragment_not_in_result_set"));
    let e = engine.assert_relevance(&id, &AssertionRequest { doc_id: "nope".into(), sentence_index: 0 }).unwrap_err();
    assert_eq!(e.kind, ErrorKind::NotFound);
    let s = engine.summary(&id).unwrap();
    assert_eq!((s.decision_count, s.assertion_count), (8, 1));
}

#[test]
fn sessions_survive_restart() {
    let toy = Toy::new(20, 8);
    let (id, assessment, results, export) = {
        let engine = toy.engine();
        let id = engine.create_session(request(1789, 1799, &[FRENCH_REVOLUTION])).unwrap().session.session_id;
        engine.decide(&id, toggle(Action::Deselect, TargetKind::Category, MONTAGNARDS)).unwrap();
        let page = engine.results(&id, None, None).unwrap();
        let f = &page.fragments[0];
        engine
            .assert_relevance(&id, &AssertionRequest { doc_id: f.doc_id.clone(), sentence_index: f.sentence_index })
            .unwrap();
        let export = engine.export(&id).unwrap();
        let file = std::fs::read(toy.config.session_dir.join(format!("{id}.json"))).unwrap();
        assert_eq!(export, file);
        (
            id.clone(),
            serde_json::to_vec(&engine.assessment(&id).unwrap()).unwrap(),
            serde_json::to_vec(&engine.results(&id, None, None).unwrap()).unwrap(),
            export,
        )
    };
    let engine = toy.engine();
    assert_eq!(engine.store().list().unwrap(), std::slice::from_ref(&id));
    assert_eq!(serde_json::to_vec(&engine.assessment(&id).unwrap()).unwrap(), assessment);
    assert_eq!(serde_json::to_vec(&engine.results(&id, None, None).unwrap()).unwrap(), results);
    assert_eq!(engine.export(&id).unwrap(), export);
}

#[test]
fn category_search() {
    let toy = Toy::new(3, 1);
    let engine = toy.engine();
    let hits = engine.search_categories("french", None);
    let labels: Vec<&str> = hits.iter().map(|h| h.label.as_str()).collect();
    assert_eq!(labels, ["French Revolution", "French First Republic"]);
    assert_eq!(engine.search_categories("french", Some(1)).len(), 1);
    assert!(engine.search_categories("", None).is_empty());
}
