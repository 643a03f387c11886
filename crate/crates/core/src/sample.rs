//! Deterministic toy data: a small French Revolution category network and a
//! synthetic parliamentary-style corpus that links into it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{DocumentRecord, LinkRecord};
use crate::kg::{write_triples, Iri, Term, Triple, Vocabulary};

pub const DBR: &str = "http://dbpedia.org/resource/";
pub const DBC: &str = "http://dbpedia.org/resource/Category:";

pub const FRENCH_REVOLUTION: &str = "http://dbpedia.org/resource/Category:French_Revolution";
pub const MONTAGNARDS: &str = "http://dbpedia.org/resource/Category:Montagnards";
pub const FRENCH_FIRST_REPUBLIC: &str = "http://dbpedia.org/resource/Category:French_First_Republic";
pub const REIGN_OF_TERROR: &str = "http://dbpedia.org/resource/Reign_of_Terror";
pub const ROBESPIERRE: &str = "http://dbpedia.org/resource/Maximilien_Robespierre";
pub const BASTILLE: &str = "http://dbpedia.org/resource/Bastille";
pub const DROWNINGS_AT_NANTES: &str = "http://dbpedia.org/resource/Drownings_at_Nantes";
/// Alias of [`ROBESPIERRE`] via `owl:sameAs`.
pub const ROBESPIERRE_ALIAS: &str = "http://dbpedia.org/resource/Robespierre";

pub fn iri(s: &str) -> Iri {
    Iri::new(s).expect("constant IRI")
}

/// The toy graph as N-Triples. Output is fixed.
pub fn generate_toy_graph() -> Vec<u8> {
    let v = Vocabulary::default();
    let p = |s: &str| iri(s);
    let rel = |s: &str, pred: &str, o: &str| Triple { subject: iri(s), predicate: p(pred), object: Term::Iri(iri(o)) };
    let text = |s: &str, pred: &str, value: &str, lang: &str| Triple {
        subject: iri(s),
        predicate: p(pred),
        object: Term::Literal { value: value.into(), lang: Some(lang.into()) },
    };

    let triples = vec![
        text(FRENCH_REVOLUTION, &v.label, "French Revolution", "en"),
        text(FRENCH_REVOLUTION, &v.label, "Franse Revolutie", "nl"),
        rel(MONTAGNARDS, &v.broader, FRENCH_REVOLUTION),
        text(MONTAGNARDS, &v.label, "Montagnards", "en"),
        rel(FRENCH_FIRST_REPUBLIC, &v.broader, FRENCH_REVOLUTION),
        text(FRENCH_FIRST_REPUBLIC, &v.label, "French First Republic", "en"),
        rel(REIGN_OF_TERROR, &v.subject, FRENCH_FIRST_REPUBLIC),
        text(REIGN_OF_TERROR, &v.label, "Reign of Terror", "en"),
        text(
            REIGN_OF_TERROR,
            &v.comment,
            "The Reign of Terror (5 September 1793 – 28 July 1794) was a period of the French Revolution marked by mass executions.",
            "en",
        ),
        text(REIGN_OF_TERROR, &v.comment, "Het Schrikbewind (1793-1794) was een periode van de Franse Revolutie.", "nl"),
        rel(ROBESPIERRE, &v.subject, MONTAGNARDS),
        rel(ROBESPIERRE, &v.subject, FRENCH_FIRST_REPUBLIC),
        text(ROBESPIERRE, &v.label, "Maximilien Robespierre", "en"),
        text(
            ROBESPIERRE,
            &v.comment,
            "Maximilien Robespierre (6 May 1758 – 28 July 1794) was a French lawyer and statesman.",
            "en",
        ),
        rel(ROBESPIERRE_ALIAS, &v.same_as, ROBESPIERRE),
        rel(BASTILLE, &v.subject, FRENCH_REVOLUTION),
        text(BASTILLE, &v.label, "Bastille", "en"),
        text(
            BASTILLE,
            &v.comment,
            "The Bastille was a fortress in Paris, built between 1370 and 1383 and stormed by a crowd on 14 July 1789.",
            "en",
        ),
        rel(DROWNINGS_AT_NANTES, &v.subject, FRENCH_FIRST_REPUBLIC),
        text(DROWNINGS_AT_NANTES, &v.label, "Drownings at Nantes", "en"),
        text(
            DROWNINGS_AT_NANTES,
            &v.comment,
            "The drownings at Nantes were a series of mass executions between November 1793 and February 1794.",
            "en",
        ),
    ];
    let mut out = String::from("# Toy category network: the French Revolution\n");
    out.push_str(&write_triples(&triples));
    out.into_bytes()
}

const DATES: [&str; 8] =
    ["1950-02-14", "1951-04-19", "1952-03-12", "1953-01-20", "1954-06-15", "1950-11-03", "1951-09-27", "1953-10-08"];
const PARTIES: [&str; 3] = ["Labour", "Liberal", "Christian Democrat"];
const SPEAKERS: [&str; 4] = ["J. de Vries", "A. Jansen", "M. Bakker", "P. Visser"];
const CONFIDENCES: [f64; 4] = [1.0, 0.97, 0.88, 0.74];

/// Mentionable entities and their surface forms. Drownings at Nantes is
/// deliberately absent.
const MENTIONS: [(&str, &str); 3] =
    [(REIGN_OF_TERROR, "the Reign of Terror"), (ROBESPIERRE, "Robespierre"), (BASTILLE, "the Bastille")];

const SINGLE: [(&str, &str); 4] = [
    ("The honourable member compared this bill to ", "."),
    ("Nobody in this chamber wishes to return to ", "."),
    ("The minister spoke of ", " as a warning from history."),
    ("Some speakers invoked ", " to make their point."),
];
const PAIR: (&str, &str, &str) = ("Both ", " and ", " were cited in the debate.");
const FILLER: [&str; 5] = [
    "The sitting was opened at ten o'clock.",
    "The chairman thanked the members for their contributions.",
    "The debate on the budget continued.",
    "Several amendments were tabled.",
    "The house adjourned until the following day.",
];

struct DocWriter {
    text: String,
    chars: usize,
    links: Vec<LinkRecord>,
}

impl DocWriter {
    fn push(&mut self, s: &str) {
        self.text.push_str(s);
        self.chars += s.chars().count();
    }

    fn mention(&mut self, entity: usize, confidence: f64) {
        let (iri_str, surface) = MENTIONS[entity];
        let start = self.chars;
        self.push(surface);
        self.links.push(LinkRecord { start, end: self.chars, iri: iri(iri_str), confidence, surface: surface.into() });
    }
}

/// `n_docs` synthetic debate excerpts as JSON Lines. Dates, parties and
/// sentence templates come from fixed lists; `seed` only decides which
/// document gets which. With three or more documents the corpus spans at
/// least three years and two parties.
pub fn generate_toy_corpus(n_docs: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let date_offset = rng.random_range(0..DATES.len());
    let party_offset = rng.random_range(0..PARTIES.len());
    let mut out = Vec::new();
    for i in 0..n_docs {
        let mut w = DocWriter { text: String::new(), chars: 0, links: Vec::new() };
        let n_sentences = rng.random_range(2..=4);
        for s in 0..n_sentences {
            if s > 0 {
                w.push(" ");
            }
            let kind = if i == 0 && s == 0 { 1 } else { rng.random_range(0..4) };
            match kind {
                0 => {
                    let f = FILLER[rng.random_range(0..FILLER.len())];
                    w.push(f);
                }
                1 | 2 => {
                    let (pre, post) = SINGLE[rng.random_range(0..SINGLE.len())];
                    let e = rng.random_range(0..MENTIONS.len());
                    let c = CONFIDENCES[rng.random_range(0..CONFIDENCES.len())];
                    w.push(pre);
                    w.mention(e, c);
                    w.push(post);
                }
                _ => {
                    let a = rng.random_range(0..MENTIONS.len());
                    let b = (a + rng.random_range(1..MENTIONS.len())) % MENTIONS.len();
                    let ca = CONFIDENCES[rng.random_range(0..CONFIDENCES.len())];
                    let cb = CONFIDENCES[rng.random_range(0..CONFIDENCES.len())];
                    w.push(PAIR.0);
                    w.mention(a, ca);
                    w.push(PAIR.1);
                    w.mention(b, cb);
                    w.push(PAIR.2);
                }
            }
        }
        let mut meta = BTreeMap::new();
        meta.insert("party".to_string(), PARTIES[(i + party_offset) % PARTIES.len()].to_string());
        meta.insert("speaker".to_string(), SPEAKERS[rng.random_range(0..SPEAKERS.len())].to_string());
        let record = DocumentRecord {
            doc_id: format!("doc-{i:04}"),
            date: DATES[(i + date_offset) % DATES.len()].parse().expect("valid date"),
            text: w.text,
            meta,
            links: w.links,
        };
        serde_json::to_writer(&mut out, &record).expect("record serialises");
        out.push(b'\n');
    }
    out
}
