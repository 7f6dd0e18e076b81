//! Acceptance criteria. Each criterion prints one `PASS`/`FAIL` line; the
//! test fails if any criterion does. Criteria run one after another so the
//! timing checks are not disturbed by each other.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use esg_core::esg::{
    build, build_with, export, import, BuildOptions, EsgFiles, EsgParams, QueueDiscipline,
};
use esg_core::ingest::{load_paths, BlankNodeScope, StoreBuilder, Term};
use esg_core::metrics::{self, EmptinessBasis, ExtensionParams, MetricsReport};
use esg_core::pipeline::{run_entities, run_properties};
use esg_core::select::{GroundIds, GroundTerms, Mode};
use esg_core::vocab;
use esg_core::{Dictionary, EquivalenceSetGraph, TermId, TripleStore};

const DUL: &str = "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#";

/// Tolerances and limits, pinned.
const AGENTS_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_STORES: u64 = 1_000;
const ORACLE_LIMIT: Duration = Duration::from_secs(120);
const ORDER_STORES: u64 = 100;
const ORDER_LIMIT: Duration = Duration::from_secs(60);
const METRICS_MAX: usize = 10_000;
const METRICS_LIMIT: Duration = Duration::from_secs(10);
const SCALE_TRIPLES: usize = 1_000_000;
const SCALE_LIMIT: Duration = Duration::from_secs(300);
const SCALE_MEMORY_BYTES: u64 = 4 << 30;
const SCALE_DOUBLING_RATIO: f64 = 2.5;
const ROUND_TRIPS: u64 = 1_000;

fn say(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

fn check(results: &mut Vec<bool>, n: u32, title: &str, body: impl FnOnce() -> String) {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let secs = started.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            say(format!("PASS criterion {n}: {title} ({detail}; {secs:.2}s)"));
            results.push(true);
        }
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            say(format!("FAIL criterion {n}: {title} ({msg}; {secs:.2}s)"));
            results.push(false);
        }
    }
}

fn id(store: &TripleStore, iri: &str) -> TermId {
    store.find_iri(iri).unwrap_or_else(|| panic!("{iri} not in store"))
}

fn class_pipeline(store: &mut TripleStore) -> (EquivalenceSetGraph, EquivalenceSetGraph, GroundIds) {
    let ids = GroundIds::resolve(store, &GroundTerms::default());
    let options = BuildOptions::default();
    let properties = run_properties(store, &ids, &options).unwrap();
    let classes = run_entities(store, &ids, &properties.esg, Mode::Classes, &options).unwrap();
    (properties.esg, classes.esg, ids)
}

fn agents_golden() -> String {
    let started = Instant::now();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/agents.nt");
    let (mut store, _) = load_paths(&[path], BlankNodeScope::PerSource).unwrap();
    let (_, esg, _) = class_pipeline(&mut store);
    let elapsed = started.elapsed();

    let set = |iri: &str| esg.set_of(id(&store, iri)).unwrap().expect("classified");
    let agent = set(&format!("{DUL}Agent"));
    let person = set(&format!("{DUL}Person"));
    assert_eq!(esg.set_count(), 4, "equivalence sets");
    assert_eq!(esg.edge_count(), 3, "edges");
    assert_eq!(set("http://www.w3.org/ns/org#Agent"), agent);
    assert_eq!(esg.members(agent).unwrap().len(), 2);
    assert_eq!(set("http://dbpedia.org/ontology/Person"), person);
    assert_eq!(set("http://xmlns.com/foaf/0.1/Person"), person);
    assert_eq!(esg.members(person).unwrap().len(), 3);
    let mut subs = esg.subs(agent).unwrap();
    subs.sort();
    let mut expected = vec![
        person,
        set(&format!("{DUL}PhysicalAgent")),
        set(&format!("{DUL}SocialAgent")),
    ];
    expected.sort();
    assert_eq!(subs, expected, "three sets inherit from the agent set");
    assert!(esg.supers(agent).unwrap().is_empty());
    assert_eq!(esg.term_count(), 7);
    assert!(elapsed < AGENTS_LIMIT, "took {elapsed:?}");
    format!("4 sets, 3 edges, 7 classes in {:.1} ms", elapsed.as_secs_f64() * 1e3)
}

fn oracle_equivalence() -> String {
    let started = Instant::now();
    let (mut max_triples, mut max_terms, mut builds) = (0, 0, 0);
    for seed in 0..ORACLE_STORES {
        let mut r = rng(seed);
        let triples = layered_triples(&mut r);
        let store = store_from(&triples);
        max_triples = max_triples.max(store.triple_count());
        max_terms = max_terms.max(store.term_count());
        let selection: BTreeSet<TermId> = random_selection(&mut r, &store, 40);
        for self_closing in [false, true] {
            let (esg, oracle) = both(&store, self_closing, &selection, QueueDiscipline::Fifo);
            assert_eq!(
                esg.canonical_ids().unwrap(),
                oracle.canonical(),
                "store {seed}, self_closing {self_closing}"
            );
            builds += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(max_triples <= 500 && max_terms <= 60, "{max_triples} triples, {max_terms} terms");
    assert!(elapsed < ORACLE_LIMIT, "took {elapsed:?}");
    format!("{ORACLE_STORES} stores, {builds} builds, max {max_triples} triples / {max_terms} terms")
}

/// Classes built from `lines` with the default vocabulary, plus the cycle
/// count of the property phase.
fn build_case(lines: &[(&str, &str, &str)]) -> (TripleStore, EquivalenceSetGraph, usize) {
    let mut b = StoreBuilder::new(BlankNodeScope::Shared);
    let expand = |t: &str| match t.split_once(':') {
        Some(("owl", rest)) => format!("http://www.w3.org/2002/07/owl#{rest}"),
        Some(("rdfs", rest)) => format!("http://www.w3.org/2000/01/rdf-schema#{rest}"),
        Some(("", rest)) => format!("http://example.org/{rest}"),
        _ => t.to_string(),
    };
    for (s, p, o) in lines {
        b.insert_iris(&expand(s), &expand(p), &expand(o));
    }
    let (mut store, _) = b.finish();
    let ids = GroundIds::resolve(&mut store, &GroundTerms::default());
    let options = BuildOptions::default();
    let properties = run_properties(&store, &ids, &options).unwrap();
    let classes = run_entities(&store, &ids, &properties.esg, Mode::Classes, &options).unwrap();
    let cycles = properties.esg.log().cycles;
    (store, classes.esg, cycles)
}

fn fixpoint_cases() -> String {
    let ex = |s: &str| format!("http://example.org/{s}");
    let same_set = |store: &TripleStore, g: &EquivalenceSetGraph| {
        let x = g.set_of(id(store, &ex("x"))).unwrap();
        x.is_some() && x == g.set_of(id(store, &ex("y"))).unwrap()
    };
    let y_below_x = |store: &TripleStore, g: &EquivalenceSetGraph| {
        let x = g.set_of(id(store, &ex("x"))).unwrap().unwrap();
        let y = g.set_of(id(store, &ex("y"))).unwrap().unwrap();
        x != y && g.supers(y).unwrap() == vec![x]
    };
    let mut chained_cycles = Vec::new();

    // Equivalence: closure of the predicate itself.
    let (s, g, _) = build_case(&[
        (":x", "owl:equivalentClass", ":z"),
        (":y", "owl:equivalentClass", ":z"),
    ]);
    assert!(same_set(&s, &g), "equivalence case 1");
    // Equivalence: a predicate equivalent to p_eq.
    let (s, g, _) = build_case(&[
        (":sameClass", "owl:equivalentProperty", "owl:equivalentClass"),
        (":x", ":sameClass", ":y"),
    ]);
    assert!(same_set(&s, &g), "equivalence case 2");
    // Equivalence: p_eq reached through a specialization of p_e.
    let (s, g, cycles) = build_case(&[
        (":sameProperty", "rdfs:subPropertyOf", "owl:equivalentProperty"),
        (":sameClass", ":sameProperty", "owl:equivalentClass"),
        (":x", ":sameClass", ":y"),
    ]);
    assert!(same_set(&s, &g), "equivalence case 3");
    assert!(cycles >= 2, "equivalence case 3 ran {cycles} cycles");
    chained_cycles.push(cycles);

    // Specialization: transitivity through an intermediate class.
    let (s, g, _) = build_case(&[(":y", "rdfs:subClassOf", ":m"), (":m", "rdfs:subClassOf", ":x")]);
    let x = g.set_of(id(&s, &ex("x"))).unwrap().unwrap();
    let y = g.set_of(id(&s, &ex("y"))).unwrap().unwrap();
    assert!(g.descendant_sets(x).unwrap().contains(&y), "specialization case 1");
    assert!(g.closure_of(id(&s, &ex("x"))).unwrap().contains(&id(&s, &ex("y"))));
    // Specialization: a subproperty of p_sub.
    let (s, g, _) = build_case(&[
        (":subClass", "rdfs:subPropertyOf", "rdfs:subClassOf"),
        (":y", ":subClass", ":x"),
    ]);
    assert!(y_below_x(&s, &g), "specialization case 2");
    // Specialization: p_sub reached through a specialization of p_s.
    let (s, g, cycles) = build_case(&[
        (":subProperty", "rdfs:subPropertyOf", "rdfs:subPropertyOf"),
        (":subClass", ":subProperty", "rdfs:subClassOf"),
        (":y", ":subClass", ":x"),
    ]);
    assert!(y_below_x(&s, &g), "specialization case 3");
    assert!(cycles >= 2, "specialization case 3 ran {cycles} cycles");
    chained_cycles.push(cycles);

    format!("6 cases; chained cases ran {chained_cycles:?} cycles")
}

fn order_invariance() -> String {
    let started = Instant::now();
    for seed in 0..ORDER_STORES {
        let mut r = rng(10_000 + seed);
        let triples = layered_triples(&mut r);
        let reference = {
            let store = store_from(&triples);
            let (esg, _) = both(&store, false, &BTreeSet::new(), QueueDiscipline::Fifo);
            let (props, _) = both(&store, true, &BTreeSet::new(), QueueDiscipline::Fifo);
            (
                esg.canonical_terms(store.dictionary()).unwrap(),
                props.canonical_terms(store.dictionary()).unwrap(),
            )
        };
        for (i, discipline) in [QueueDiscipline::Lifo, QueueDiscipline::Keyed(seed)]
            .into_iter()
            .enumerate()
        {
            let shuffled = shuffled(&mut r, &triples);
            let store = store_from(&shuffled);
            let (esg, _) = both(&store, false, &BTreeSet::new(), discipline);
            let (props, _) = both(&store, true, &BTreeSet::new(), discipline);
            assert_eq!(
                esg.canonical_terms(store.dictionary()).unwrap(),
                reference.0,
                "store {seed}, variant {i}"
            );
            assert_eq!(
                props.canonical_terms(store.dictionary()).unwrap(),
                reference.1,
                "store {seed}, variant {i} (properties)"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < ORDER_LIMIT, "took {elapsed:?}");
    format!("{ORDER_STORES} stores x 2 shuffles/disciplines")
}

/// Builds a class-style ESG from `sub` pairs, with `singletons` extra
/// selected entities.
fn synthetic(sub: &[(usize, usize)], singletons: usize) -> (TripleStore, EquivalenceSetGraph) {
    let mut b = StoreBuilder::new(BlankNodeScope::Shared);
    let node = |i: usize| format!("http://s/{i}");
    for &(a, c) in sub {
        b.insert_iris(&node(a), vocab::RDFS_SUB_CLASS_OF, &node(c));
    }
    let extra: Vec<TermId> = (0..singletons)
        .map(|i| b.intern(&Term::iri(format!("http://s/lonely{i}"))))
        .collect();
    let (mut store, _) = b.finish();
    let ids = GroundIds::resolve(&mut store, &GroundTerms::default());
    let params = EsgParams {
        p_eq_seeds: &[ids.p_eq],
        p_sub_seeds: &[ids.p_sub],
        p_e: ids.p_e,
        p_s: ids.p_s,
        reuse_property_esg: None,
    };
    let esg = build(&store, &params, &extra.into_iter().collect()).unwrap();
    (store, esg)
}

fn report_for(store: &TripleStore, esg: &EquivalenceSetGraph) -> MetricsReport {
    let params = ExtensionParams {
        mode: Mode::Classes,
        type_closure: BTreeSet::from([store.find_iri(vocab::RDF_TYPE).unwrap()]),
        emptiness: EmptinessBasis::Indirect,
    };
    metrics::full_report(esg, store, &params).unwrap().report
}

fn synthetic_metrics() -> String {
    let started = Instant::now();
    let sizes = [2usize, 3, 10, 100, 1_000, METRICS_MAX];
    for &k in &sizes {
        let chain: Vec<_> = (0..k - 1).map(|i| (i, i + 1)).collect();
        let (store, esg) = synthetic(&chain, 0);
        let r = report_for(&store, &esg);
        assert_eq!((r.es, r.h_max), (k, k as u64 - 1), "chain of {k}");

        let star: Vec<_> = (1..k).map(|i| (i, 0)).collect();
        let (store, esg) = synthetic(&star, 0);
        let r = report_for(&store, &esg);
        assert_eq!(
            (r.es, r.isolated, r.tl, r.wcc, r.scc),
            (k, 0, 1, 1, k),
            "star of {k} sets"
        );

        let (store, esg) = synthetic(&[], k);
        let r = report_for(&store, &esg);
        assert_eq!(r.r, Some(1.0), "edgeless {k}");
        assert_eq!((r.isolated, r.tl, r.es), (k, k, k), "edgeless {k}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed < METRICS_LIMIT, "took {elapsed:?}");
    format!("chain/star/edgeless for k in {sizes:?}")
}

fn extensional_hand_cases() -> String {
    let rdf_type = vocab::RDF_TYPE;
    let (store, esg, _) = build_case(&[
        (":x", rdf_type, ":c"),
        (":y", rdf_type, ":c"),
        (":z", rdf_type, ":c2"),
        (":c2", "rdfs:subClassOf", ":c"),
    ]);
    let ext = metrics::extensional_sizes(
        &esg,
        &store,
        &ExtensionParams {
            mode: Mode::Classes,
            type_closure: BTreeSet::from([id(&store, rdf_type)]),
            emptiness: EmptinessBasis::Indirect,
        },
    )
    .unwrap();
    let c = esg.set_of(id(&store, "http://example.org/c")).unwrap().unwrap();
    assert_eq!((ext.des[&c], ext.ies[&c]), (2, 3));

    let (store, esg, _) = build_case(&[
        (":e", rdf_type, ":c"),
        (":e", rdf_type, ":d"),
        (":c", "owl:equivalentClass", ":d"),
    ]);
    let ext = metrics::extensional_sizes(
        &esg,
        &store,
        &ExtensionParams {
            mode: Mode::Classes,
            type_closure: BTreeSet::from([id(&store, rdf_type)]),
            emptiness: EmptinessBasis::Indirect,
        },
    )
    .unwrap();
    let cd = esg.set_of(id(&store, "http://example.org/c")).unwrap().unwrap();
    assert_eq!(ext.des[&cd], 2, "an entity in two classes of one set counts twice");
    "DES=2, IES=3; double counting = 2".into()
}

fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// `n_sub` specialization triples forming a random forest, plus a fixed
/// number of equivalence triples.
fn scaling_store(n_sub: usize) -> (TripleStore, [TermId; 1], [TermId; 1], TermId, TermId) {
    let mut r = rng(n_sub as u64);
    let mut b = StoreBuilder::new(BlankNodeScope::Shared);
    let sub = b.intern(&Term::iri(vocab::RDFS_SUB_CLASS_OF));
    let eq = b.intern(&Term::iri(vocab::OWL_EQUIVALENT_CLASS));
    let pe = b.intern(&Term::iri(vocab::OWL_EQUIVALENT_PROPERTY));
    let ps = b.intern(&Term::iri(vocab::RDFS_SUB_PROPERTY_OF));
    let nodes: Vec<TermId> = (0..=n_sub)
        .map(|i| b.intern(&Term::iri(format!("http://s/c{i}"))))
        .collect();
    use rand::Rng;
    for i in 1..=n_sub {
        let parent = nodes[r.gen_range(0..i)];
        b.insert_ids(nodes[i], sub, parent);
    }
    for _ in 0..1_000 {
        let a = nodes[r.gen_range(0..nodes.len())];
        let c = nodes[r.gen_range(0..nodes.len())];
        b.insert_ids(a, eq, c);
    }
    (b.finish().0, [eq], [sub], pe, ps)
}

fn time_build(n_sub: usize) -> (Duration, usize) {
    let (store, eq, sub, pe, ps) = scaling_store(n_sub);
    let params = EsgParams {
        p_eq_seeds: &eq,
        p_sub_seeds: &sub,
        p_e: pe,
        p_s: ps,
        reuse_property_esg: None,
    };
    let started = Instant::now();
    let esg = build_with(&store, &params, &BTreeSet::new(), &BuildOptions::default()).unwrap();
    (started.elapsed(), esg.edge_count())
}

fn scaling_smoke() -> String {
    let (full, edges) = time_build(SCALE_TRIPLES);
    assert!(full < SCALE_LIMIT, "10^6 build took {full:?}");
    assert!(edges > SCALE_TRIPLES / 2, "only {edges} edges");
    // Interleaved runs, best of five per size, keep scheduler and
    // allocator noise out of the ratio.
    let (mut half, mut whole) = (Duration::MAX, Duration::MAX);
    for _ in 0..5 {
        half = half.min(time_build(SCALE_TRIPLES / 2).0);
        whole = whole.min(time_build(SCALE_TRIPLES).0);
    }
    let ratio = whole.as_secs_f64() / half.as_secs_f64();
    assert!(ratio < SCALE_DOUBLING_RATIO, "doubling ratio {ratio:.2}");
    let peak = peak_memory_bytes();
    if let Some(p) = peak {
        assert!(p < SCALE_MEMORY_BYTES, "peak memory {p} bytes");
    }
    format!(
        "10^6 in {:.2}s, doubling ratio {ratio:.2}, peak {}",
        full.as_secs_f64(),
        peak.map_or("n/a".into(), |p| format!("{} MiB", p >> 20))
    )
}

fn report_schema() -> String {
    let value = serde_json::to_value(MetricsReport::default()).unwrap();
    let obj = value.as_object().unwrap();
    let fields = [
        "OE", "OE_bn", "BN", "ES", "ES_bn", "R", "R_bn", "E", "H_max", "IN", "TL", "TL_bn",
        "OE_TL", "OE_TL_bn", "RTL", "RTL_bn", "WCC", "SCC", "OE_0", "OE_0bn", "ES_0", "ES_0bn",
        "OE_TL_0", "OE_TL_0bn", "TL_0", "TL_0bn",
    ];
    for f in fields {
        assert!(obj.contains_key(f), "missing {f}");
    }
    let thresholds = obj["IES_thresholds"].as_object().expect("IES_thresholds map");
    for t in ["1", "10", "100", "1K", "1M", "1B"] {
        assert!(thresholds.contains_key(t), "missing IES({t})");
    }
    assert_eq!(obj.len(), fields.len() + 1, "unexpected extra fields");
    format!("{} fields + 6 IES thresholds", fields.len())
}

fn round_trip_store(seed: u64) -> Vec<[Term; 3]> {
    let mut r = rng(50_000 + seed);
    let mut triples = layered_triples(&mut r);
    // Awkward terms must survive the TSV encoding.
    let odd = [
        Term::literal("tab\there"),
        Term::literal("quote \" and \\ backslash\nnewline"),
        Term::blank("odd.label"),
        Term::iri("http://t/ünïcode"),
    ];
    use rand::Rng;
    for t in odd {
        let s = iri(&format!("e{}", r.gen_range(0..5)));
        let p = iri(["eq", "sub"][r.gen_range(0..2)]);
        if t.is_literal() {
            triples.push([s, p, t]);
        } else {
            triples.push([t, p, s]);
        }
    }
    triples
}

fn round_trips() -> String {
    let mut nonempty = 0;
    for seed in 0..ROUND_TRIPS {
        let store = store_from(&round_trip_store(seed));
        let selection = random_selection(&mut rng(seed), &store, 40);
        let (esg, _) = both(&store, seed % 2 == 0, &selection, QueueDiscipline::Fifo);
        let mut files = EsgFiles {
            id: Vec::new(),
            is: Vec::new(),
            h: Vec::new(),
            hminus: Vec::new(),
        };
        export(
            &esg,
            store.dictionary(),
            EsgFiles {
                id: &mut files.id,
                is: &mut files.is,
                h: &mut files.h,
                hminus: &mut files.hminus,
            },
        )
        .unwrap();
        let mut fresh = Dictionary::new();
        let back = import(
            EsgFiles {
                id: &files.id[..],
                is: &files.is[..],
                h: &files.h[..],
                hminus: &files.hminus[..],
            },
            &mut fresh,
        )
        .unwrap_or_else(|e| panic!("store {seed}: {e}"));
        back.check_invariants().unwrap();
        assert_eq!(
            esg.canonical_terms(store.dictionary()).unwrap(),
            back.canonical_terms(&fresh).unwrap(),
            "store {seed}"
        );
        nonempty += (esg.edge_count() > 0) as usize;
    }
    assert!(nonempty > ROUND_TRIPS as usize / 2);
    format!("{ROUND_TRIPS} graphs, {nonempty} with edges")
}

#[test]
fn acceptance_criteria() {
    let mut results = Vec::new();
    check(&mut results, 1, "agent example golden test", agents_golden);
    check(&mut results, 2, "oracle equivalence on random stores", oracle_equivalence);
    check(&mut results, 3, "fixpoint inference cases", fixpoint_cases);
    check(&mut results, 4, "order invariance", order_invariance);
    check(&mut results, 5, "metrics on synthetic families", synthetic_metrics);
    check(&mut results, 6, "direct/indirect extensional size hand cases", extensional_hand_cases);
    check(&mut results, 7, "scaling smoke", scaling_smoke);
    check(&mut results, 8, "report schema exposes every table field", report_schema);
    check(&mut results, 9, "export/import round trips", round_trips);
    let failed = results.iter().filter(|ok| !**ok).count();
    say(format!("{} of {} criteria passed", results.len() - failed, results.len()));
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
