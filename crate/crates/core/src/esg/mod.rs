//! Equivalence Set Graph construction.
//!
//! An ESG compresses a knowledge graph into equivalence sets of terms
//! (nodes) connected by specialization edges. Construction is a fixpoint:
//! equivalence triples are folded into set merges, specialization triples
//! into `H`/`H⁻` edges, and the sets of predicates that count as
//! equivalence or specialization grow with the property hierarchy until
//! nothing new turns up.

mod build;
mod canonical;
mod io;
mod storage;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use build::{build, build_with, BuildOptions, QueueDiscipline, StorageKind};
pub use canonical::CanonicalEsg;
pub use io::{export, export_to_dir, import, import_from_dir, EsgFiles, EsgMeta, MetaCycle};
pub use storage::{Adjacency, DiskStorage, EsgStorage, MemoryStorage};

use crate::error::{Error, Result};
use crate::ingest::TermId;

/// Identifier of an equivalence set. Ids are issued from a monotone
/// counter and never reused once a set is merged away.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EsId(pub u64);

impl fmt::Display for EsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "es{}", self.0)
    }
}

/// Ground relations of an ESG.
///
/// `p_eq_seeds` / `p_sub_seeds` are the equivalence and specialization
/// relations over the observed entities; `p_e` / `p_s` are the equivalence
/// and specialization relations over properties, used to find everything
/// that implicitly means the same as (or specializes) a seed.
#[derive(Clone, Copy)]
pub struct EsgParams<'a> {
    pub p_eq_seeds: &'a [TermId],
    pub p_sub_seeds: &'a [TermId],
    pub p_e: TermId,
    pub p_s: TermId,
    /// Property ESG to take predicate closures from. Only used when the
    /// seeds are not `p_e`/`p_s` themselves.
    pub reuse_property_esg: Option<&'a EquivalenceSetGraph>,
}

impl<'a> EsgParams<'a> {
    /// Parameters for the ESG over properties, where the observed
    /// relations are `p_e` and `p_s` themselves.
    pub fn properties(p_e: &'a [TermId; 1], p_s: &'a [TermId; 1]) -> Self {
        EsgParams {
            p_eq_seeds: p_e,
            p_sub_seeds: p_s,
            p_e: p_e[0],
            p_s: p_s[0],
            reuse_property_esg: None,
        }
    }

    /// True when the ESG under construction is itself the source of its
    /// predicate closures.
    pub fn is_self_closing(&self) -> bool {
        let eq: BTreeSet<_> = self.p_eq_seeds.iter().collect();
        let sub: BTreeSet<_> = self.p_sub_seeds.iter().collect();
        eq.len() == 1 && eq.contains(&self.p_e) && sub.len() == 1 && sub.contains(&self.p_s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_eq_seeds.is_empty() || self.p_sub_seeds.is_empty() {
            return Err(Error::Config(
                "equivalence and specialization seed sets must be nonempty".into(),
            ));
        }
        let eq: HashSet<_> = self.p_eq_seeds.iter().collect();
        if self.p_sub_seeds.iter().any(|p| eq.contains(p)) {
            return Err(Error::Config(
                "equivalence and specialization seed sets must be disjoint".into(),
            ));
        }
        Ok(())
    }
}

/// Predicates processed during one fixpoint cycle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleLog {
    pub equivalence_predicates: Vec<TermId>,
    pub specialization_predicates: Vec<TermId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildLog {
    /// Iterations of the main loop.
    pub cycles: usize,
    pub cycle_details: Vec<CycleLog>,
    /// Set merges (each retires two ids and mints one).
    pub merges: usize,
    /// Distinct `H` edges inserted by specialization triples.
    pub edges_added: usize,
    /// `(triple, predicate)` pairs handled by the equivalence and
    /// specialization passes, excluding skipped literal triples.
    pub case_executions: usize,
    pub skipped_literal_triples: usize,
    /// Selected entities given a singleton set at finalization.
    pub singletons_materialized: usize,
}

/// Pending predicates for the equivalence (`P_e`) and specialization
/// (`P_s`) passes.
#[derive(Clone, Debug, Default)]
pub struct PredicateQueue {
    items: VecDeque<TermId>,
    queued: HashSet<TermId>,
}

impl PredicateQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Enqueues `p` unless it is already pending. Returns true if added.
    pub fn push(&mut self, p: TermId) -> bool {
        if self.queued.insert(p) {
            self.items.push_back(p);
            true
        } else {
            false
        }
    }

    pub fn pop(&mut self, discipline: QueueDiscipline) -> Option<TermId> {
        let p = match discipline {
            QueueDiscipline::Fifo => self.items.pop_front(),
            QueueDiscipline::Lifo => self.items.pop_back(),
            QueueDiscipline::Keyed(seed) => {
                let (pos, _) = self
                    .items
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, p)| build::mix(seed, p.0 as u64))?;
                self.items.remove(pos)
            }
        }?;
        self.queued.remove(&p);
        Some(p)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, p: TermId) -> bool {
        self.queued.contains(&p)
    }
}

/// The ID, IS, H and H⁻ maps plus the processed-predicate sets.
pub struct EquivalenceSetGraph {
    storage: Box<dyn EsgStorage>,
    next_id: u64,
    processed_eq: BTreeSet<TermId>,
    processed_sub: BTreeSet<TermId>,
    log: BuildLog,
}

impl Default for EquivalenceSetGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for EquivalenceSetGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquivalenceSetGraph")
            .field("backend", &self.storage.backend_name())
            .field("sets", &self.set_count())
            .field("terms", &self.term_count())
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl EquivalenceSetGraph {
    pub fn new() -> Self {
        Self::with_storage(Box::new(MemoryStorage::new()))
    }

    pub fn with_storage(storage: Box<dyn EsgStorage>) -> Self {
        EquivalenceSetGraph {
            storage,
            next_id: 0,
            processed_eq: BTreeSet::new(),
            processed_sub: BTreeSet::new(),
            log: BuildLog::default(),
        }
    }

    pub fn log(&self) -> &BuildLog {
        &self.log
    }

    pub(crate) fn log_mut(&mut self) -> &mut BuildLog {
        &mut self.log
    }

    pub fn backend_name(&self) -> &'static str {
        self.storage.backend_name()
    }

    /// Equivalence predicates already folded in (`P′_e`).
    pub fn processed_eq(&self) -> &BTreeSet<TermId> {
        &self.processed_eq
    }

    /// Specialization predicates already folded in (`P′_s`).
    pub fn processed_sub(&self) -> &BTreeSet<TermId> {
        &self.processed_sub
    }

    pub(crate) fn fresh_id(&mut self) -> EsId {
        let id = EsId(self.next_id);
        self.next_id += 1;
        id
    }

    /// Number of ids issued so far, live or retired.
    pub fn issued_ids(&self) -> u64 {
        self.next_id
    }

    pub fn set_of(&self, term: TermId) -> Result<Option<EsId>> {
        self.storage.set_of(term)
    }

    pub fn members(&self, set: EsId) -> Result<Vec<TermId>> {
        self.storage.members(set)
    }

    pub fn contains_set(&self, set: EsId) -> Result<bool> {
        self.storage.contains_set(set)
    }

    /// Live set ids, ascending.
    pub fn set_ids(&self) -> Result<Vec<EsId>> {
        self.storage.set_ids()
    }

    /// Explicit super sets, `H(set)`.
    pub fn supers(&self, set: EsId) -> Result<Vec<EsId>> {
        self.storage.adjacent(Adjacency::Supers, set)
    }

    /// Explicit sub sets, `H⁻(set)`.
    pub fn subs(&self, set: EsId) -> Result<Vec<EsId>> {
        self.storage.adjacent(Adjacency::Subs, set)
    }

    pub fn set_count(&self) -> usize {
        self.storage.set_count()
    }

    pub fn term_count(&self) -> usize {
        self.storage.term_count()
    }

    /// Number of `H` edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.storage.adjacency_len(Adjacency::Supers)
    }

    /// `(set, members)` for every live set, ascending by id.
    pub fn partition(&self) -> Result<Vec<(EsId, Vec<TermId>)>> {
        self.set_ids()?
            .into_iter()
            .map(|id| Ok((id, self.members(id)?)))
            .collect()
    }

    /// All `H` edges `(sub, super)`, sorted.
    pub fn edges(&self) -> Result<Vec<(EsId, EsId)>> {
        let mut edges = Vec::with_capacity(self.edge_count());
        for id in self.set_ids()? {
            for sup in self.supers(id)? {
                edges.push((id, sup));
            }
        }
        edges.sort_unstable();
        Ok(edges)
    }

    /// Creates a set with the given members (deduplicated) under a fresh id.
    pub(crate) fn new_set(&mut self, members: &[TermId]) -> Result<EsId> {
        let id = self.fresh_id();
        if members.len() == 2 && members[0] == members[1] {
            self.storage.create_set(id, &members[..1])?;
        } else {
            self.storage.create_set(id, members)?;
        }
        Ok(id)
    }

    pub(crate) fn add_member(&mut self, set: EsId, term: TermId) -> Result<()> {
        self.storage.add_member(set, term)
    }

    /// Set of `term`, creating a singleton if it has none.
    pub(crate) fn set_of_or_singleton(&mut self, term: TermId) -> Result<EsId> {
        match self.storage.set_of(term)? {
            Some(id) => Ok(id),
            None => self.new_set(&[term]),
        }
    }

    /// Adds `sub → sup` to `H` and the mirror entry to `H⁻`. Returns true if
    /// the edge was new.
    pub(crate) fn add_edge(&mut self, sub: EsId, sup: EsId) -> Result<bool> {
        let fresh = self.storage.insert_adjacent(Adjacency::Supers, sub, sup)?;
        if fresh {
            self.storage.insert_adjacent(Adjacency::Subs, sup, sub)?;
        }
        Ok(fresh)
    }

    /// Replaces sets `i1` and `i2` by `i3` in the hierarchy.
    ///
    /// `H(i3)` and `H⁻(i3)` become the unions of those of `i1` and `i2`,
    /// every neighbour's reverse entry is rewritten to name `i3`, and `i1`,
    /// `i2` disappear from both maps. An edge between `i1` and `i2` turns
    /// into a self-loop on `i3`.
    pub fn fix_hierarchy(&mut self, i1: EsId, i2: EsId, i3: EsId) -> Result<()> {
        if i1 == i2 {
            return Err(Error::SelfMerge(i1));
        }
        let merged = |x: EsId| x == i1 || x == i2;
        let rename = |x: EsId| if merged(x) { i3 } else { x };

        for (dir, back) in [
            (Adjacency::Supers, Adjacency::Subs),
            (Adjacency::Subs, Adjacency::Supers),
        ] {
            let mut neighbours = self.storage.take_adjacent(dir, i1)?;
            neighbours.extend(self.storage.take_adjacent(dir, i2)?);
            for x in neighbours {
                self.storage.insert_adjacent(dir, i3, rename(x))?;
                if !merged(x) {
                    self.storage.remove_adjacent(back, x, i1)?;
                    self.storage.remove_adjacent(back, x, i2)?;
                    self.storage.insert_adjacent(back, x, i3)?;
                }
            }
        }
        Ok(())
    }

    /// Merges two distinct sets into a fresh one and rewires the hierarchy.
    pub(crate) fn merge(&mut self, i1: EsId, i2: EsId) -> Result<EsId> {
        if i1 == i2 {
            return Err(Error::SelfMerge(i1));
        }
        let mut union = self.storage.remove_set(i1)?;
        union.extend(self.storage.remove_set(i2)?);
        let i3 = self.fresh_id();
        self.storage.create_set(i3, &union)?;
        self.fix_hierarchy(i1, i2, i3)?;
        self.log.merges += 1;
        Ok(i3)
    }

    pub(crate) fn mark_processed(&mut self, p: TermId, equivalence: bool) -> bool {
        if equivalence {
            self.processed_eq.insert(p)
        } else {
            self.processed_sub.insert(p)
        }
    }

    /// Everything implicitly equivalent to `entity` or implicitly
    /// specializing it: the members of its set plus the members of every
    /// set reachable through `H⁻`.
    pub fn closure_of(&self, entity: TermId) -> Result<BTreeSet<TermId>> {
        let start = self.set_of(entity)?.ok_or(Error::UnknownEntity(entity))?;
        let mut out = BTreeSet::new();
        for set in self.descendant_sets(start)? {
            out.extend(self.members(set)?);
        }
        Ok(out)
    }

    /// `start` plus every set reachable from it through `H⁻`, each once.
    pub fn descendant_sets(&self, start: EsId) -> Result<Vec<EsId>> {
        let mut seen = HashSet::from([start]);
        let mut order = vec![start];
        let mut next = 0;
        while next < order.len() {
            let current = order[next];
            next += 1;
            for sub in self.subs(current)? {
                if seen.insert(sub) {
                    order.push(sub);
                }
            }
        }
        Ok(order)
    }

    /// Closure of a predicate, or just the predicate when no set holds it.
    pub(crate) fn closure_or_self(&self, p: TermId) -> Result<BTreeSet<TermId>> {
        match self.closure_of(p) {
            Err(Error::UnknownEntity(_)) => Ok(BTreeSet::from([p])),
            other => other,
        }
    }

    /// Checks the partition and edge-symmetry invariants. Meant for tests
    /// and debugging; walks the whole graph.
    pub fn check_invariants(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let mut total = 0;
        for (id, members) in self.partition()? {
            if members.is_empty() {
                return Err(Error::Storage(format!("{id} is empty")));
            }
            for t in members {
                total += 1;
                if !seen.insert(t) {
                    return Err(Error::Storage(format!("{t} is in more than one set")));
                }
                if self.set_of(t)? != Some(id) {
                    return Err(Error::Storage(format!("ID({t}) does not point at {id}")));
                }
            }
            for sup in self.supers(id)? {
                if !self.contains_set(sup)? {
                    return Err(Error::Storage(format!("{id} has retired super {sup}")));
                }
                if !self.subs(sup)?.contains(&id) {
                    return Err(Error::Storage(format!("{id}->{sup} missing from H⁻")));
                }
            }
            for sub in self.subs(id)? {
                if !self.contains_set(sub)? {
                    return Err(Error::Storage(format!("{id} has retired sub {sub}")));
                }
                if !self.supers(sub)?.contains(&id) {
                    return Err(Error::Storage(format!("{sub}->{id} missing from H")));
                }
            }
        }
        if total != self.term_count() {
            return Err(Error::Storage(format!(
                "ID has {} entries but IS holds {total} terms",
                self.term_count()
            )));
        }
        if self.storage.adjacency_len(Adjacency::Supers) != self.storage.adjacency_len(Adjacency::Subs)
        {
            return Err(Error::Storage("H and H⁻ sizes differ".into()));
        }
        Ok(())
    }

    pub(crate) fn storage_mut(&mut self) -> &mut dyn EsgStorage {
        self.storage.as_mut()
    }

    pub(crate) fn set_next_id(&mut self, next: u64) {
        self.next_id = next;
    }
}
