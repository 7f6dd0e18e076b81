use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{
    CycleLog, DiskStorage, EquivalenceSetGraph, EsgParams, EsgStorage, MemoryStorage,
    PredicateQueue,
};
use crate::error::{Error, Result};
use crate::ingest::{TermId, TermKind, TripleStore};

/// Order in which pending predicates are taken off a queue. The result is
/// the same for every discipline; only logs and ids differ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueueDiscipline {
    #[default]
    Fifo,
    Lifo,
    /// Smallest hash of `(seed, predicate)` first: a reproducible shuffle.
    Keyed(u64),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "path")]
pub enum StorageKind {
    #[default]
    Memory,
    /// redb file at the given path; removed when the graph is dropped.
    Disk(PathBuf),
}

impl StorageKind {
    fn open(&self) -> Result<Box<dyn EsgStorage>> {
        Ok(match self {
            StorageKind::Memory => Box::new(MemoryStorage::new()),
            StorageKind::Disk(path) => Box::new(DiskStorage::create(path)?),
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    pub discipline: QueueDiscipline,
    pub storage: StorageKind,
}

pub(crate) fn mix(seed: u64, x: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ x.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds an ESG with default options (FIFO queues, in-memory maps).
pub fn build(
    store: &TripleStore,
    params: &EsgParams<'_>,
    selection: &BTreeSet<TermId>,
) -> Result<EquivalenceSetGraph> {
    build_with(store, params, selection, &BuildOptions::default())
}

/// Runs the fixpoint: fold equivalence triples into sets, specialization
/// triples into edges, grow the predicate queues from the property
/// hierarchy, repeat until both queues are empty. Selected entities that no
/// triple touched end up in singleton sets.
pub fn build_with(
    store: &TripleStore,
    params: &EsgParams<'_>,
    selection: &BTreeSet<TermId>,
    options: &BuildOptions,
) -> Result<EquivalenceSetGraph> {
    params.validate()?;
    let mut esg = EquivalenceSetGraph::with_storage(options.storage.open()?);
    let mut eq_queue = PredicateQueue::new();
    let mut sub_queue = PredicateQueue::new();

    let self_closing = params.is_self_closing();
    let internal;
    let closure_source = if self_closing {
        None
    } else if let Some(g) = params.reuse_property_esg {
        Some(g)
    } else {
        let p_e = [params.p_e];
        let p_s = [params.p_s];
        let property_options = BuildOptions {
            discipline: options.discipline,
            storage: StorageKind::Memory,
        };
        internal = build_with(
            store,
            &EsgParams::properties(&p_e, &p_s),
            &BTreeSet::new(),
            &property_options,
        )?;
        Some(&internal)
    };

    match closure_source {
        None => {
            for &p in params.p_eq_seeds {
                eq_queue.push(p);
            }
            for &p in params.p_sub_seeds {
                sub_queue.push(p);
            }
        }
        Some(source) => {
            for &seed in params.p_eq_seeds {
                for p in source.closure_or_self(seed)? {
                    eq_queue.push(p);
                }
            }
            for &seed in params.p_sub_seeds {
                for p in source.closure_or_self(seed)? {
                    sub_queue.push(p);
                }
            }
        }
    }

    while !eq_queue.is_empty() || !sub_queue.is_empty() {
        let cycle = esg.log.cycles + 1;
        let equivalence_predicates = esg.compute_ess(store, &mut eq_queue, options.discipline)?;
        let specialization_predicates =
            esg.compute_hierarchy(store, &mut sub_queue, options.discipline)?;
        if self_closing {
            esg.update_psets(&mut eq_queue, &mut sub_queue, None)?;
        }
        let idle = equivalence_predicates.is_empty() && specialization_predicates.is_empty();
        esg.log.cycles = cycle;
        esg.log.cycle_details.push(CycleLog {
            equivalence_predicates,
            specialization_predicates,
        });
        log::debug!(
            "cycle {cycle}: {} pending equivalence, {} pending specialization predicates",
            eq_queue.len(),
            sub_queue.len()
        );
        if idle && (!eq_queue.is_empty() || !sub_queue.is_empty()) {
            return Err(Error::Stalled { cycle });
        }
    }

    for &entity in selection {
        if store.kind(entity) == TermKind::Literal {
            continue;
        }
        if esg.set_of(entity)?.is_none() {
            esg.new_set(&[entity])?;
            esg.log.singletons_materialized += 1;
        }
    }

    log::info!(
        "ESG built in {} cycles: {} sets, {} edges, {} merges",
        esg.log.cycles,
        esg.set_count(),
        esg.edge_count(),
        esg.log.merges
    );
    Ok(esg)
}

impl EquivalenceSetGraph {
    /// Drains `queue`, folding every triple of each equivalence predicate
    /// into the partition. Returns the predicates processed.
    ///
    /// Per triple `⟨r1, p, r2⟩`: two unknown terms form a new set; one
    /// unknown term joins the other's set; two terms in different sets merge
    /// both into a fresh set and the hierarchy is rewired. Triples with a
    /// literal endpoint are skipped.
    pub fn compute_ess(
        &mut self,
        store: &TripleStore,
        queue: &mut PredicateQueue,
        discipline: QueueDiscipline,
    ) -> Result<Vec<TermId>> {
        let mut processed = Vec::new();
        while let Some(p) = queue.pop(discipline) {
            if !self.mark_processed(p, true) {
                continue;
            }
            processed.push(p);
            for &(r1, r2) in store.triples_with_predicate(p) {
                if store.kind(r1) == TermKind::Literal || store.kind(r2) == TermKind::Literal {
                    self.log.skipped_literal_triples += 1;
                    continue;
                }
                self.log.case_executions += 1;
                match (self.set_of(r1)?, self.set_of(r2)?) {
                    (None, None) => {
                        self.new_set(&[r1, r2])?;
                    }
                    (Some(i1), None) => self.add_member(i1, r2)?,
                    (None, Some(i2)) => self.add_member(i2, r1)?,
                    (Some(i1), Some(i2)) if i1 != i2 => {
                        self.merge(i1, i2)?;
                    }
                    (Some(_), Some(_)) => {}
                }
            }
        }
        Ok(processed)
    }

    /// Drains `queue`, turning every triple `⟨r1, p, r2⟩` of each
    /// specialization predicate into the edge `ID(r1) → ID(r2)`. Terms
    /// without a set get singletons first; `r1` and `r2` in one set give a
    /// self-loop.
    pub fn compute_hierarchy(
        &mut self,
        store: &TripleStore,
        queue: &mut PredicateQueue,
        discipline: QueueDiscipline,
    ) -> Result<Vec<TermId>> {
        let mut processed = Vec::new();
        while let Some(p) = queue.pop(discipline) {
            if !self.mark_processed(p, false) {
                continue;
            }
            processed.push(p);
            for &(r1, r2) in store.triples_with_predicate(p) {
                if store.kind(r1) == TermKind::Literal || store.kind(r2) == TermKind::Literal {
                    self.log.skipped_literal_triples += 1;
                    continue;
                }
                self.log.case_executions += 1;
                let i1 = self.set_of_or_singleton(r1)?;
                let i2 = self.set_of_or_singleton(r2)?;
                if self.add_edge(i1, i2)? {
                    self.log.edges_added += 1;
                }
            }
        }
        Ok(processed)
    }

    /// Enqueues every predicate in the closure of an already processed
    /// predicate that has not been processed yet. Closures come from
    /// `closure_source`, or from this graph when it is `None`.
    pub fn update_psets(
        &self,
        eq_queue: &mut PredicateQueue,
        sub_queue: &mut PredicateQueue,
        closure_source: Option<&EquivalenceSetGraph>,
    ) -> Result<()> {
        let source = closure_source.unwrap_or(self);
        for &p in &self.processed_eq {
            for q in source.closure_or_self(p)? {
                if !self.processed_eq.contains(&q) {
                    eq_queue.push(q);
                }
            }
        }
        for &p in &self.processed_sub {
            for q in source.closure_or_self(p)? {
                if !self.processed_sub.contains(&q) {
                    sub_queue.push(q);
                }
            }
        }
        Ok(())
    }
}
