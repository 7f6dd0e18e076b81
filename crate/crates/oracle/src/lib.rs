//! Slow, obviously-correct reference for equivalence set graphs.
//!
//! Everything here is recomputed from scratch on every step: blocks come
//! from label propagation over equivalence triples, closures from repeated
//! reachability sweeps. Only the triple store and the canonical form are
//! shared with the library under test.

use std::collections::{BTreeMap, BTreeSet};

use esg_core::esg::CanonicalEsg;
use esg_core::{TermId, TermKind, TripleStore};

/// Blocks and edges computed for fixed predicate sets.
#[derive(Clone, Debug, Default)]
pub struct OracleGraph {
    pub block_of: BTreeMap<TermId, usize>,
    pub blocks: Vec<BTreeSet<TermId>>,
    /// `(sub, super)` block pairs.
    pub edges: BTreeSet<(usize, usize)>,
}

impl OracleGraph {
    /// Members of `x`'s block and of every block below it; `{x}` when `x`
    /// is absent.
    pub fn closure(&self, x: TermId) -> BTreeSet<TermId> {
        let Some(&start) = self.block_of.get(&x) else {
            return BTreeSet::from([x]);
        };
        let mut below = BTreeSet::from([start]);
        loop {
            let before = below.len();
            for &(sub, sup) in &self.edges {
                if below.contains(&sup) {
                    below.insert(sub);
                }
            }
            if below.len() == before {
                break;
            }
        }
        below
            .into_iter()
            .flat_map(|b| self.blocks[b].iter().copied())
            .collect()
    }

    pub fn canonical(&self) -> CanonicalEsg<TermId> {
        CanonicalEsg::from_parts(
            self.blocks
                .iter()
                .enumerate()
                .map(|(i, b)| (i, b.iter().copied().collect())),
            self.edges.iter().copied(),
        )
    }
}

fn usable(store: &TripleStore, s: TermId, o: TermId) -> bool {
    store.kind(s) != TermKind::Literal && store.kind(o) != TermKind::Literal
}

/// Builds the graph for fixed predicate sets. `extra` terms become
/// singletons when no triple places them.
pub fn graph_for(
    store: &TripleStore,
    eq: &BTreeSet<TermId>,
    sub: &BTreeSet<TermId>,
    extra: &BTreeSet<TermId>,
) -> OracleGraph {
    let mut pairs = Vec::new();
    let mut links = Vec::new();
    let mut label: BTreeMap<TermId, TermId> = BTreeMap::new();
    for t in store.iter() {
        if !usable(store, t.s, t.o) {
            continue;
        }
        if eq.contains(&t.p) {
            pairs.push((t.s, t.o));
        }
        if sub.contains(&t.p) {
            links.push((t.s, t.o));
        }
        if eq.contains(&t.p) || sub.contains(&t.p) {
            label.insert(t.s, t.s);
            label.insert(t.o, t.o);
        }
    }
    for &x in extra {
        if store.kind(x) != TermKind::Literal {
            label.insert(x, x);
        }
    }

    // Smallest label wins until nothing changes.
    loop {
        let mut changed = false;
        for &(a, b) in &pairs {
            let m = label[&a].min(label[&b]);
            for x in [a, b] {
                if label[&x] != m {
                    label.insert(x, m);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut index: BTreeMap<TermId, usize> = BTreeMap::new();
    let mut graph = OracleGraph::default();
    for (&term, &l) in &label {
        let next = index.len();
        let b = *index.entry(l).or_insert(next);
        if b == graph.blocks.len() {
            graph.blocks.push(BTreeSet::new());
        }
        graph.blocks[b].insert(term);
        graph.block_of.insert(term, b);
    }
    for (s, o) in links {
        graph.edges.insert((graph.block_of[&s], graph.block_of[&o]));
    }
    graph
}

/// Predicates folded in as equivalence and specialization, and the
/// resulting graph.
#[derive(Clone, Debug, Default)]
pub struct OracleResult {
    pub eq_predicates: BTreeSet<TermId>,
    pub sub_predicates: BTreeSet<TermId>,
    pub graph: OracleGraph,
}

impl OracleResult {
    pub fn canonical(&self) -> CanonicalEsg<TermId> {
        self.graph.canonical()
    }
}

/// Least fixpoint of "predicates equivalent to or below `p_e`/`p_s`",
/// where "below" is read off the graph those very predicates produce.
pub fn oracle_property_closure(store: &TripleStore, p_e: TermId, p_s: TermId) -> OracleResult {
    self_closing(store, p_e, p_s, &BTreeSet::new())
}

fn self_closing(
    store: &TripleStore,
    p_e: TermId,
    p_s: TermId,
    extra: &BTreeSet<TermId>,
) -> OracleResult {
    let mut eq = BTreeSet::from([p_e]);
    let mut sub = BTreeSet::from([p_s]);
    loop {
        let graph = graph_for(store, &eq, &sub, extra);
        let next_eq: BTreeSet<TermId> = eq.iter().flat_map(|&p| graph.closure(p)).collect();
        let next_sub: BTreeSet<TermId> = sub.iter().flat_map(|&p| graph.closure(p)).collect();
        if next_eq == eq && next_sub == sub {
            return OracleResult {
                eq_predicates: eq,
                sub_predicates: sub,
                graph,
            };
        }
        eq.extend(next_eq);
        sub.extend(next_sub);
    }
}

/// Reference ESG for arbitrary seeds. Seeds equal to `{p_e}` and `{p_s}`
/// close over themselves; anything else takes its predicate closures from
/// the property graph of `p_e`/`p_s`.
pub fn oracle_esg(
    store: &TripleStore,
    eq_seeds: &[TermId],
    sub_seeds: &[TermId],
    p_e: TermId,
    p_s: TermId,
    selection: &BTreeSet<TermId>,
) -> OracleResult {
    if eq_seeds == [p_e] && sub_seeds == [p_s] {
        return self_closing(store, p_e, p_s, selection);
    }
    let properties = oracle_property_closure(store, p_e, p_s).graph;
    let eq: BTreeSet<TermId> = eq_seeds.iter().flat_map(|&p| properties.closure(p)).collect();
    let sub: BTreeSet<TermId> = sub_seeds
        .iter()
        .flat_map(|&p| properties.closure(p))
        .collect();
    let graph = graph_for(store, &eq, &sub, selection);
    OracleResult {
        eq_predicates: eq,
        sub_predicates: sub,
        graph,
    }
}
