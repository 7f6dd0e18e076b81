use std::collections::{BTreeMap, BTreeSet};

use super::{EquivalenceSetGraph, EsId};
use crate::error::Result;
use crate::ingest::{Dictionary, TermId};

/// Id-free form of an ESG: sorted blocks of members plus edges between
/// block positions. Two graphs are isomorphic iff their canonical forms
/// are equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalEsg<K: Ord> {
    pub blocks: Vec<Vec<K>>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl<K: Ord + Clone> CanonicalEsg<K> {
    /// Canonicalizes blocks keyed by any id type. Panics if an edge names a
    /// key with no block.
    pub fn from_parts<B: Ord + Copy>(
        blocks: impl IntoIterator<Item = (B, Vec<K>)>,
        edges: impl IntoIterator<Item = (B, B)>,
    ) -> Self {
        let mut keyed: Vec<(Vec<K>, B)> = blocks
            .into_iter()
            .map(|(key, mut members)| {
                members.sort();
                members.dedup();
                (members, key)
            })
            .collect();
        keyed.sort();
        let position: BTreeMap<B, usize> = keyed
            .iter()
            .enumerate()
            .map(|(i, (_, key))| (*key, i))
            .collect();
        let edges = edges
            .into_iter()
            .map(|(a, b)| {
                let at = |k: &B| *position.get(k).expect("edge endpoint without a block");
                (at(&a), at(&b))
            })
            .collect();
        CanonicalEsg {
            blocks: keyed.into_iter().map(|(members, _)| members).collect(),
            edges,
        }
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Position of the block holding `member`.
    pub fn block_of(&self, member: &K) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(member).is_ok())
    }
}

impl EquivalenceSetGraph {
    /// Canonical form over term ids; comparable across graphs built on the
    /// same dictionary.
    pub fn canonical_ids(&self) -> Result<CanonicalEsg<TermId>> {
        Ok(CanonicalEsg::from_parts::<EsId>(
            self.partition()?,
            self.edges()?,
        ))
    }

    /// Canonical form over N-Triples term strings; comparable across
    /// dictionaries.
    pub fn canonical_terms(&self, dict: &Dictionary) -> Result<CanonicalEsg<String>> {
        let mut blocks = Vec::with_capacity(self.set_count());
        for (id, members) in self.partition()? {
            let names = members
                .into_iter()
                .map(|t| dict.lookup(t).map(|r| r.to_string()))
                .collect::<Result<Vec<_>>>()?;
            blocks.push((id, names));
        }
        Ok(CanonicalEsg::from_parts(blocks, self.edges()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_renaming_does_not_matter() {
        let a = CanonicalEsg::from_parts([(7u32, vec!["b", "a"]), (3, vec!["c"])], [(3, 7)]);
        let b = CanonicalEsg::from_parts([(0u32, vec!["c"]), (1, vec!["a", "b"])], [(0, 1)]);
        assert_eq!(a, b);
        assert_eq!(a.blocks, vec![vec!["a", "b"], vec!["c"]]);
        assert_eq!(a.edges, BTreeSet::from([(1, 0)]));
        assert_eq!(a.block_of(&"c"), Some(1));
    }

    #[test]
    fn edge_direction_matters() {
        let a = CanonicalEsg::from_parts([(0u8, vec![1]), (1, vec![2])], [(0, 1)]);
        let b = CanonicalEsg::from_parts([(0u8, vec![1]), (1, vec![2])], [(1, 0)]);
        assert_ne!(a, b);
    }
}
