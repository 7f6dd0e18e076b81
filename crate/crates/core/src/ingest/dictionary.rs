use std::hash::BuildHasher;

use hashbrown::hash_table::Entry;
use hashbrown::{DefaultHashBuilder, HashTable};

use super::term::{Term, TermId, TermKind};
use crate::error::{Error, Result};

/// Borrowed view of an interned term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TermRef<'a> {
    pub kind: TermKind,
    pub lexical: &'a str,
}

impl TermRef<'_> {
    pub fn to_term(self) -> Term {
        Term {
            kind: self.kind,
            lexical: self.lexical.to_owned(),
        }
    }

    pub fn is_literal(self) -> bool {
        self.kind == TermKind::Literal
    }

    pub fn is_blank(self) -> bool {
        self.kind == TermKind::BlankNode
    }
}

impl std::fmt::Display for TermRef<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.lexical),
            TermKind::BlankNode => write!(f, "_:{}", self.lexical),
            TermKind::Literal => f.write_str(self.lexical),
        }
    }
}

/// Bijective `Term <-> TermId` map.
///
/// Lexical forms live back to back in one string arena, so the per-term
/// overhead is a span, a kind byte and one hash-table slot.
#[derive(Default)]
pub struct Dictionary {
    arena: String,
    spans: Vec<(usize, u32)>,
    kinds: Vec<TermKind>,
    index: HashTable<u32>,
    hasher: DefaultHashBuilder,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    fn hash(&self, kind: TermKind, lexical: &str) -> u64 {
        self.hasher.hash_one((kind as u8, lexical))
    }

    fn slice(&self, id: u32) -> &str {
        let (start, len) = self.spans[id as usize];
        &self.arena[start..start + len as usize]
    }

    /// Returns the id of `(kind, lexical)`, interning it on first sight.
    pub fn intern(&mut self, kind: TermKind, lexical: &str) -> TermId {
        let hash = self.hash(kind, lexical);
        let Dictionary {
            arena,
            spans,
            kinds,
            index,
            hasher,
        } = self;
        let eq = |&id: &u32| {
            let (start, len) = spans[id as usize];
            kinds[id as usize] == kind && &arena[start..start + len as usize] == lexical
        };
        let rehash = |&id: &u32| {
            let (start, len) = spans[id as usize];
            hasher.hash_one((kinds[id as usize] as u8, &arena[start..start + len as usize]))
        };
        match index.entry(hash, eq, rehash) {
            Entry::Occupied(e) => TermId(*e.get()),
            Entry::Vacant(e) => {
                let id = u32::try_from(kinds.len()).expect("more than u32::MAX distinct terms");
                let len = u32::try_from(lexical.len()).expect("term longer than 4 GiB");
                spans.push((arena.len(), len));
                arena.push_str(lexical);
                kinds.push(kind);
                e.insert(id);
                TermId(id)
            }
        }
    }

    pub fn resolve(&mut self, term: &Term) -> TermId {
        self.intern(term.kind, &term.lexical)
    }

    /// Looks a term up without interning it.
    pub fn find(&self, kind: TermKind, lexical: &str) -> Option<TermId> {
        let hash = self.hash(kind, lexical);
        self.index
            .find(hash, |&id| {
                self.kinds[id as usize] == kind && self.slice(id) == lexical
            })
            .map(|&id| TermId(id))
    }

    pub fn get(&self, term: &Term) -> Option<TermId> {
        self.find(term.kind, &term.lexical)
    }

    pub fn find_iri(&self, iri: &str) -> Option<TermId> {
        self.find(TermKind::Iri, iri)
    }

    pub fn lookup(&self, id: TermId) -> Result<TermRef<'_>> {
        match self.kinds.get(id.index()) {
            Some(&kind) => Ok(TermRef {
                kind,
                lexical: self.slice(id.0),
            }),
            None => Err(Error::UnissuedTermId(id)),
        }
    }

    pub fn term(&self, id: TermId) -> Result<Term> {
        self.lookup(id).map(TermRef::to_term)
    }

    /// Kind of an issued id. Panics on an unissued id.
    #[inline]
    pub fn kind(&self, id: TermId) -> TermKind {
        self.kinds[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, TermRef<'_>)> + '_ {
        (0..self.kinds.len() as u32).map(move |id| {
            (
                TermId(id),
                TermRef {
                    kind: self.kinds[id as usize],
                    lexical: self.slice(id),
                },
            )
        })
    }

    /// Approximate heap footprint in bytes.
    pub fn heap_bytes(&self) -> usize {
        self.arena.capacity()
            + self.spans.capacity() * std::mem::size_of::<(usize, u32)>()
            + self.kinds.capacity()
            + self.index.capacity() * (std::mem::size_of::<u32>() + 1)
    }
}

impl std::fmt::Debug for Dictionary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dictionary")
            .field("terms", &self.len())
            .field("arena_bytes", &self.arena.len())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_then_lookup_is_identity() {
        let mut dict = Dictionary::new();
        let terms = [
            Term::iri("http://example.org/a"),
            Term::blank("b1"),
            Term::literal("hello"),
            Term::iri("b1"),
        ];
        let ids: Vec<_> = terms.iter().map(|t| dict.resolve(t)).collect();
        for (t, id) in terms.iter().zip(&ids) {
            assert_eq!(&dict.term(*id).unwrap(), t);
        }
        assert_eq!(ids, vec![TermId(0), TermId(1), TermId(2), TermId(3)]);
    }

    #[test]
    fn same_iri_resolves_to_same_id() {
        let mut dict = Dictionary::new();
        let a = dict.resolve(&Term::iri("http://x/a"));
        let b = dict.resolve(&Term::iri("http://x/a"));
        assert_eq!(a, b);
        assert_eq!(dict.len(), 1);
        assert_eq!(dict.find_iri("http://x/a"), Some(a));
        assert_eq!(dict.find_iri("http://x/b"), None);
    }

    #[test]
    fn unissued_lookup_is_distinct_error() {
        let dict = Dictionary::new();
        assert!(matches!(
            dict.lookup(TermId(7)),
            Err(Error::UnissuedTermId(TermId(7)))
        ));
    }

    #[test]
    fn survives_growth() {
        let mut dict = Dictionary::new();
        for i in 0..10_000 {
            dict.intern(TermKind::Iri, &format!("http://x/{i}"));
        }
        for i in (0..10_000).step_by(997) {
            let id = dict.find_iri(&format!("http://x/{i}")).unwrap();
            assert_eq!(id, TermId(i));
            assert_eq!(dict.lookup(id).unwrap().lexical, format!("http://x/{i}"));
        }
    }
}
