#![allow(dead_code)]

use std::collections::BTreeSet;

use esg_core::esg::{build_with, BuildOptions, EsgParams, QueueDiscipline};
use esg_core::ingest::{BlankNodeScope, StoreBuilder, Term};
use esg_core::{EquivalenceSetGraph, TermId, TripleStore};
use esg_oracle::{oracle_esg, OracleResult};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub const EQ: &str = "http://t/eq";
pub const SUB: &str = "http://t/sub";
pub const PE: &str = "http://t/pe";
pub const PS: &str = "http://t/ps";

pub fn iri(name: &str) -> Term {
    Term::iri(format!("http://t/{name}"))
}

/// Random store over a small vocabulary. Predicates appear as subjects
/// and objects too, so property hierarchies feed back into the build.
pub fn random_triples(rng: &mut StdRng, entities: usize, triples: usize) -> Vec<[Term; 3]> {
    let preds = ["eq", "sub", "pe", "ps", "p0", "p1", "p2"];
    let node = |rng: &mut StdRng| -> Term {
        match rng.gen_range(0..10) {
            0 => iri(preds[rng.gen_range(0..preds.len())]),
            1 => Term::blank(format!("b{}", rng.gen_range(0..3))),
            _ => iri(&format!("e{}", rng.gen_range(0..entities))),
        }
    };
    (0..triples)
        .map(|_| {
            let s = node(rng);
            let p = iri(preds[rng.gen_range(0..preds.len())]);
            let o = if rng.gen_ratio(1, 15) {
                Term::literal(&format!("v{}", rng.gen_range(0..3)))
            } else {
                node(rng)
            };
            [s, p, o]
        })
        .collect()
}

pub fn store_from(triples: &[[Term; 3]]) -> TripleStore {
    let mut b = StoreBuilder::new(BlankNodeScope::Shared);
    for [s, p, o] in triples {
        b.insert(s, p, o);
    }
    for name in ["eq", "sub", "pe", "ps"] {
        b.intern(&iri(name));
    }
    b.finish().0
}

pub struct Ground {
    pub eq: TermId,
    pub sub: TermId,
    pub pe: TermId,
    pub ps: TermId,
}

pub fn ground(store: &TripleStore) -> Ground {
    let id = |s: &str| store.find_iri(s).expect("ground term interned");
    Ground {
        eq: id(EQ),
        sub: id(SUB),
        pe: id(PE),
        ps: id(PS),
    }
}

/// Builds with the library and with the oracle, for either the class-like
/// seeds (`eq`/`sub`) or the self-closing property seeds (`pe`/`ps`).
pub fn both(
    store: &TripleStore,
    self_closing: bool,
    selection: &BTreeSet<TermId>,
    discipline: QueueDiscipline,
) -> (EquivalenceSetGraph, OracleResult) {
    let g = ground(store);
    let (eq, sub) = if self_closing {
        ([g.pe], [g.ps])
    } else {
        ([g.eq], [g.sub])
    };
    let params = EsgParams {
        p_eq_seeds: &eq,
        p_sub_seeds: &sub,
        p_e: g.pe,
        p_s: g.ps,
        reuse_property_esg: None,
    };
    let options = BuildOptions {
        discipline,
        ..Default::default()
    };
    let esg = build_with(store, &params, selection, &options).expect("build");
    let oracle = oracle_esg(store, &eq, &sub, g.pe, g.ps, selection);
    (esg, oracle)
}

pub fn random_selection(rng: &mut StdRng, store: &TripleStore, entities: usize) -> BTreeSet<TermId> {
    (0..entities)
        .filter(|_| rng.gen_ratio(1, 4))
        .filter_map(|i| store.find_iri(&format!("http://t/e{i}")))
        .collect()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn shuffled(rng: &mut StdRng, triples: &[[Term; 3]]) -> Vec<[Term; 3]> {
    let mut v = triples.to_vec();
    v.shuffle(rng);
    v
}

/// Store shaped like an ontology: a property layer with hierarchies up to
/// three levels deep hanging off `eq`/`sub`/`pe`/`ps` (so every inference
/// case appears), and an entity layer using whatever predicates that
/// produced. At most 60 distinct terms and 500 triples.
pub fn layered_triples(rng: &mut StdRng) -> Vec<[Term; 3]> {
    let ground = ["eq", "sub", "pe", "ps"];
    let n_props = rng.gen_range(0..=10);
    let n_entities = rng.gen_range(1..=40);
    let mut props: Vec<String> = ground.iter().map(|s| s.to_string()).collect();
    props.extend((0..n_props).map(|i| format!("q{i}")));
    let mut out = Vec::new();

    // Property layer: each new property hangs below or beside an earlier
    // one, through pe/ps or through an earlier property, up to depth 3.
    let mut depth = vec![0usize; props.len()];
    for i in ground.len()..props.len() {
        let parent = rng.gen_range(0..i);
        if depth[parent] >= 3 {
            continue;
        }
        depth[i] = depth[parent] + 1;
        let link = match rng.gen_range(0..6) {
            0 | 1 => "ps".to_string(),
            2 => "pe".to_string(),
            _ => props[rng.gen_range(0..i)].clone(),
        };
        out.push([iri(&props[i]), iri(&link), iri(&props[parent])]);
    }
    for _ in 0..rng.gen_range(0..4) {
        let a = &props[rng.gen_range(0..props.len())];
        let b = &props[rng.gen_range(0..props.len())];
        let p = ["pe", "ps"][rng.gen_range(0..2)];
        out.push([iri(a), iri(p), iri(b)]);
    }

    // Entity layer.
    let budget = rng.gen_range(1..=500usize.saturating_sub(out.len()).min(300));
    let entity = |rng: &mut StdRng| -> Term {
        if rng.gen_ratio(1, 12) {
            Term::blank(format!("b{}", rng.gen_range(0..4)))
        } else {
            iri(&format!("e{}", rng.gen_range(0..n_entities)))
        }
    };
    for _ in 0..budget {
        let p = &props[rng.gen_range(0..props.len())];
        let s = entity(rng);
        let o = if rng.gen_ratio(1, 25) {
            Term::literal(&format!("v{}", rng.gen_range(0..2)))
        } else {
            entity(rng)
        };
        out.push([s, iri(p), o]);
    }
    out
}
