use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An absolute IRI without its surrounding angle brackets.
///
/// Cloning is cheap: the string is reference counted, which matters because
/// the same category and entity identifiers are shared between the graph,
/// the corpus postings and every session that refers to them.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IriError {
    #[error("IRI is empty")]
    Empty,
    #[error("IRI `{0}` has no scheme")]
    MissingScheme(String),
    #[error("IRI `{0}` contains a forbidden character")]
    ForbiddenChar(String),
}

impl Iri {
    /// Validates and wraps `value`. A single pair of enclosing angle brackets
    /// is stripped if present.
    pub fn new(value: &str) -> Result<Self, IriError> {
        let value = value.strip_prefix('<').and_then(|v| v.strip_suffix('>')).unwrap_or(value);
        if value.is_empty() {
            return Err(IriError::Empty);
        }
        if value.chars().any(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
        {
            return Err(IriError::ForbiddenChar(value.to_owned()));
        }
        if !has_scheme(value) {
            return Err(IriError::MissingScheme(value.to_owned()));
        }
        Ok(Iri(Arc::from(value)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `/` or `#`, with underscores shown as spaces
    /// and a DBpedia-style `Category:` prefix removed.
    pub fn local_name(&self) -> String {
        let tail = self.0.rsplit(['/', '#']).next().unwrap_or(&self.0);
        let tail = tail.strip_prefix("Category:").unwrap_or(tail);
        tail.replace('_', " ")
    }
}

fn has_scheme(value: &str) -> bool {
    let Some((scheme, _)) = value.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Iri {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::str::FromStr for Iri {
    type Err = IriError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Iri::new(s)
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Iri::new(&s).map_err(serde::de::Error::custom)
    }
}
