use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense handle for an interned [`Term`], issued in first-seen order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermId(pub u32);

impl TermId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Iri,
    BlankNode,
    Literal,
}

/// An RDF term in canonical text form.
///
/// * IRIs are stored without angle brackets.
/// * Blank nodes are stored as their label without the `_:` prefix.
/// * Literals are stored in canonical N-Triples form, quotes and datatype or
///   language tag included.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub kind: TermKind,
    pub lexical: String,
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Iri,
            lexical: iri.into(),
        }
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term {
            kind: TermKind::BlankNode,
            lexical: label.into(),
        }
    }

    /// Builds a plain literal (`xsd:string`) from its unescaped value.
    pub fn literal(value: &str) -> Self {
        let mut lexical = String::with_capacity(value.len() + 2);
        lexical.push('"');
        escape_literal_into(value, &mut lexical);
        lexical.push('"');
        Term {
            kind: TermKind::Literal,
            lexical,
        }
    }

    pub fn is_iri(&self) -> bool {
        self.kind == TermKind::Iri
    }

    pub fn is_blank(&self) -> bool {
        self.kind == TermKind::BlankNode
    }

    pub fn is_literal(&self) -> bool {
        self.kind == TermKind::Literal
    }

    /// N-Triples surface syntax for this term.
    pub fn to_ntriples(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.lexical),
            TermKind::BlankNode => write!(f, "_:{}", self.lexical),
            TermKind::Literal => f.write_str(&self.lexical),
        }
    }
}

/// Escapes a literal value the way canonical N-Triples does: only `"`, `\`,
/// line feed and carriage return are escaped.
pub(crate) fn escape_literal_into(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
}
