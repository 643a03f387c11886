//! Line-oriented reader for the N-Triples subset the graph loader accepts.
//!
//! Each non-blank, non-comment line must hold exactly one triple whose
//! subject and predicate are IRIs and whose object is an IRI or a plain
//! string literal with an optional language tag. Blank nodes and datatyped
//! literals are rejected.

use std::fmt::{self, Write as _};
use std::io::BufRead;

use super::{Iri, KgError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    Literal { value: String, lang: Option<String> },
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal { value, lang } => {
                f.write_char('"')?;
                for c in value.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c => f.write_char(c)?,
                    }
                }
                f.write_char('"')?;
                if let Some(lang) = lang {
                    write!(f, "@{lang}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> <{}> {} .", self.subject, self.predicate, self.object)
    }
}

/// Streaming iterator over the triples of a reader.
pub struct TripleReader<R> {
    reader: R,
    line_number: usize,
    buf: Vec<u8>,
}

impl<R: BufRead> TripleReader<R> {
    pub fn new(reader: R) -> Self {
        TripleReader { reader, line_number: 0, buf: Vec::new() }
    }
}

impl<R: BufRead> Iterator for TripleReader<R> {
    type Item = Result<Triple, KgError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(KgError::Io(e))),
            }
            self.line_number += 1;
            let line = match std::str::from_utf8(&self.buf) {
                Ok(line) => line,
                Err(_) => return Some(Err(KgError::InvalidUtf8 { line_number: self.line_number })),
            };
            match parse_line(line) {
                Ok(Some(triple)) => return Some(Ok(triple)),
                Ok(None) => continue,
                Err(reason) => return Some(Err(KgError::MalformedTriple { line_number: self.line_number, reason })),
            }
        }
    }
}

/// Parses every triple in `reader`, failing on the first bad line.
pub fn parse_triples<R: BufRead>(reader: R) -> Result<Vec<Triple>, KgError> {
    TripleReader::new(reader).collect()
}

/// Writes triples in the same subset, one per line.
pub fn write_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        let _ = writeln!(out, "{t}");
    }
    out
}

/// Returns `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut cur = Cursor::new(line.trim_end_matches(['\n', '\r']));
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = cur.iri().map_err(|e| format!("subject: {e}"))?;
    cur.skip_ws();
    let predicate = cur.iri().map_err(|e| format!("predicate: {e}"))?;
    cur.skip_ws();
    let object = match cur.peek() {
        Some('<') => Term::Iri(cur.iri().map_err(|e| format!("object: {e}"))?),
        Some('"') => cur.literal()?,
        Some('_') => return Err("blank nodes are not supported".into()),
        Some(c) => return Err(format!("unexpected character `{c}` in object position")),
        None => return Err("missing object".into()),
    };
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err("expected `.` after object".into());
    }
    cur.bump();
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err("trailing content after `.`".into());
    }
    Ok(Some(Triple { subject, predicate, object }))
}

struct Cursor<'a> {
    rest: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor { rest: s }
    }

    fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.rest = &self.rest[c.len_utf8()..];
        Some(c)
    }

    fn at_end(&self) -> bool {
        self.rest.is_empty()
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn iri(&mut self) -> Result<Iri, String> {
        if self.bump() != Some('<') {
            return Err("expected `<`".into());
        }
        let end = self.rest.find('>').ok_or("unterminated IRI")?;
        let raw = &self.rest[..end];
        self.rest = &self.rest[end + 1..];
        Iri::new(raw).map_err(|e| e.to_string())
    }

    fn literal(&mut self) -> Result<Term, String> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated literal".into()),
                Some('"') => break,
                Some('\\') => value.push(self.escape()?),
                Some(c) => value.push(c),
            }
        }
        let lang = match self.peek() {
            Some('@') => {
                self.bump();
                let end = self.rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '-')).unwrap_or(self.rest.len());
                let tag = &self.rest[..end];
                if !valid_lang(tag) {
                    return Err(format!("invalid language tag `{tag}`"));
                }
                self.rest = &self.rest[end..];
                Some(tag.to_owned())
            }
            Some('^') => return Err("datatyped literals are not supported".into()),
            _ => None,
        };
        Ok(Term::Literal { value, lang })
    }

    fn escape(&mut self) -> Result<char, String> {
        match self.bump() {
            Some('t') => Ok('\t'),
            Some('b') => Ok('\u{8}'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('f') => Ok('\u{c}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.hex_escape(4),
            Some('U') => self.hex_escape(8),
            Some(c) => Err(format!("unknown escape `\\{c}`")),
            None => Err("dangling escape".into()),
        }
    }

    fn hex_escape(&mut self, len: usize) -> Result<char, String> {
        let digits = self.rest.get(..len).ok_or("short unicode escape")?;
        let code = u32::from_str_radix(digits, 16).map_err(|_| "bad unicode escape")?;
        self.rest = &self.rest[len..];
        char::from_u32(code).ok_or_else(|| "escape is not a scalar value".into())
    }
}

fn valid_lang(tag: &str) -> bool {
    let mut parts = tag.split('-');
    let Some(primary) = parts.next() else {
        return false;
    };
    !primary.is_empty()
        && primary.chars().all(|c| c.is_ascii_alphabetic())
        && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    #[test]
    fn parses_iri_triple() {
        let t =
            parse_triples("<http://ex/e/A> <http://purl.org/dc/terms/subject> <http://ex/c/X> .\n".as_bytes()).unwrap();
        assert_eq!(
            t,
            vec![Triple {
                subject: iri("http://ex/e/A"),
                predicate: iri("http://purl.org/dc/terms/subject"),
                object: Term::Iri(iri("http://ex/c/X")),
            }]
        );
    }

    #[test]
    fn blank_and_comment_lines_yield_nothing() {
        assert!(parse_triples("".as_bytes()).unwrap().is_empty());
        assert!(parse_triples("\n   \n# comment\n\t# indented\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn literal_with_language_and_escapes() {
        let t = parse_line(r#"<http://ex/a> <http://ex/p> "say \"hi\"\né"@en-GB . # trailing"#).unwrap().unwrap();
        assert_eq!(t.object, Term::Literal { value: "say \"hi\"\né".into(), lang: Some("en-GB".into()) });
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = parse_triples("<http://ex/c/X <bad".as_bytes()).unwrap_err();
        assert!(matches!(err, KgError::MalformedTriple { line_number: 1, .. }));

        let input = "<http://ex/a> <http://ex/p> <http://ex/b> .\n\n<http://ex/a> <http://ex/p> .\n";
        let err = parse_triples(input.as_bytes()).unwrap_err();
        assert!(matches!(err, KgError::MalformedTriple { line_number: 3, .. }));
    }

    #[test]
    fn unsupported_constructs_are_malformed() {
        for line in [
            "_:b0 <http://ex/p> <http://ex/b> .",
            "<http://ex/a> <http://ex/p> _:b1 .",
            r#"<http://ex/a> <http://ex/p> "1"^^<http://www.w3.org/2001/XMLSchema#int> ."#,
            "<http://ex/a> <http://ex/p> <http://ex/b>",
            "<http://ex/a> <http://ex/p> <http://ex/b> . extra",
            r#"<http://ex/a> <http://ex/p> "open ."#,
            r#"<http://ex/a> <http://ex/p> "x"@ ."#,
        ] {
            assert!(parse_line(line).is_err(), "accepted: {line}");
        }
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let mut bytes = b"<http://ex/a> <http://ex/p> <http://ex/b> .\n".to_vec();
        bytes.extend_from_slice(b"<http://ex/a> <http://ex/p> \"\xff\" .\n");
        let err = parse_triples(bytes.as_slice()).unwrap_err();
        assert!(matches!(err, KgError::InvalidUtf8 { line_number: 2 }));
    }

    fn arb_iri() -> impl Strategy<Value = Iri> {
        "[a-z]{1,6}".prop_map(|s| Iri::new(&format!("http://ex.org/{s}")).unwrap())
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            arb_iri().prop_map(Term::Iri),
            (any::<String>(), proptest::option::of("[a-z]{2}(-[A-Z]{2})?"))
                .prop_map(|(value, lang)| Term::Literal { value, lang }),
        ]
    }

    proptest! {
        #[test]
        fn serialize_then_parse_round_trips(
            triples in proptest::collection::vec((arb_iri(), arb_iri(), arb_term()), 0..20)
        ) {
            let triples: Vec<Triple> = triples
                .into_iter()
                .map(|(subject, predicate, object)| Triple { subject, predicate, object })
                .collect();
            let text = write_triples(&triples);
            prop_assert_eq!(parse_triples(text.as_bytes()).unwrap(), triples);
        }
    }
}
