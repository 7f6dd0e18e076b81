//! Structural metrics over a built ESG and the store it came from.
//!
//! Blank-node variants (`_bn`) classify sets on the full graph and then
//! drop blank-node terms, and every set left empty by that. Sizes are
//! never recomputed on the reduced graph, so removing blank nodes can only
//! shrink a count.

mod graph;
mod output;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esg::{EquivalenceSetGraph, EsId};
use crate::ingest::{TermId, TermKind, TripleStore};
use crate::select::Mode;

pub use graph::{heights as condensation_heights, strong_components, weak_components, Snapshot, Strong};
pub use output::{write_csv, write_report_dir};

/// Table-1 thresholds for the indirect extensional size.
pub const IES_THRESHOLDS: [u64; 6] = [1, 10, 100, 1_000, 1_000_000, 1_000_000_000];

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Whether a set counts as having an empty extension when its own
/// members are never instantiated (`Direct`) or only when nothing below it
/// is either (`Indirect`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptinessBasis {
    Direct,
    #[default]
    Indirect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Height,
    WccSize,
    Ies,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: u64,
    pub count: u64,
    /// `count` over the total number of observations.
    pub fraction: f64,
}

/// Histogram with strictly increasing `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub kind: DistributionKind,
    pub points: Vec<Point>,
}

impl Distribution {
    pub fn from_values(kind: DistributionKind, values: impl IntoIterator<Item = u64>) -> Self {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        let mut total = 0u64;
        for v in values {
            *counts.entry(v).or_default() += 1;
            total += 1;
        }
        let points = counts
            .into_iter()
            .map(|(x, count)| Point {
                x,
                count,
                fraction: count as f64 / total as f64,
            })
            .collect();
        Distribution { kind, points }
    }

    pub fn count_at(&self, x: u64) -> u64 {
        self.points
            .binary_search_by_key(&x, |p| p.x)
            .map_or(0, |i| self.points[i].count)
    }

    pub fn total(&self) -> u64 {
        self.points.iter().map(|p| p.count).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BasicCounts {
    pub oe: usize,
    pub oe_bn: usize,
    pub bn: usize,
    pub es: usize,
    pub es_bn: usize,
    pub r: Option<f64>,
    pub r_bn: Option<f64>,
    pub e: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Heights {
    pub h_max: u64,
    pub per_set: BTreeMap<EsId, u64>,
    pub distribution: Distribution,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HierarchyShape {
    pub isolated: usize,
    pub top_level: usize,
    pub top_level_bn: usize,
    pub oe_tl: usize,
    pub oe_tl_bn: usize,
    pub rtl: Option<f64>,
    pub rtl_bn: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Components {
    pub wcc: usize,
    pub scc: usize,
    pub distribution: Distribution,
}

/// IES(n) counts for every Table-1 threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IesThresholds {
    #[serde(rename = "1")]
    pub t1: u64,
    #[serde(rename = "10")]
    pub t10: u64,
    #[serde(rename = "100")]
    pub t100: u64,
    #[serde(rename = "1K")]
    pub t1k: u64,
    #[serde(rename = "1M")]
    pub t1m: u64,
    #[serde(rename = "1B")]
    pub t1b: u64,
}

impl IesThresholds {
    pub fn from_sizes(ies: impl IntoIterator<Item = u64>) -> Self {
        let mut c = [0u64; 6];
        for v in ies {
            for (slot, t) in c.iter_mut().zip(IES_THRESHOLDS) {
                if v >= t {
                    *slot += 1;
                }
            }
        }
        IesThresholds {
            t1: c[0],
            t10: c[1],
            t100: c[2],
            t1k: c[3],
            t1m: c[4],
            t1b: c[5],
        }
    }

    pub fn as_array(&self) -> [u64; 6] {
        [self.t1, self.t10, self.t100, self.t1k, self.t1m, self.t1b]
    }

    /// Count for one of [`IES_THRESHOLDS`].
    pub fn get(&self, threshold: u64) -> Option<u64> {
        IES_THRESHOLDS
            .iter()
            .position(|&t| t == threshold)
            .map(|i| self.as_array()[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionalSizes {
    /// S(e) for every observed entity.
    pub entity_size: HashMap<TermId, u64>,
    pub des: BTreeMap<EsId, u64>,
    pub ies: BTreeMap<EsId, u64>,
    pub oe_0: usize,
    pub oe_0bn: usize,
    pub es_0: usize,
    pub es_0bn: usize,
    pub oe_tl_0: usize,
    pub oe_tl_0bn: usize,
    pub tl_0: usize,
    pub tl_0bn: usize,
    pub thresholds: IesThresholds,
    pub distribution: Distribution,
}

/// Everything `extensional_sizes` needs to know beyond the graph.
#[derive(Clone, Debug, Default)]
pub struct ExtensionParams {
    pub mode: Mode,
    /// Closure of `rdf:type`; required for classes, must be empty for
    /// properties.
    pub type_closure: BTreeSet<TermId>,
    pub emptiness: EmptinessBasis,
}

/// Every Table-1 statistic, under Table-1 names.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "OE")]
    pub oe: usize,
    #[serde(rename = "OE_bn")]
    pub oe_bn: usize,
    #[serde(rename = "BN")]
    pub bn: usize,
    #[serde(rename = "ES")]
    pub es: usize,
    #[serde(rename = "ES_bn")]
    pub es_bn: usize,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    #[serde(rename = "R_bn")]
    pub r_bn: Option<f64>,
    #[serde(rename = "E")]
    pub e: usize,
    #[serde(rename = "H_max")]
    pub h_max: u64,
    #[serde(rename = "IN")]
    pub isolated: usize,
    #[serde(rename = "TL")]
    pub tl: usize,
    #[serde(rename = "TL_bn")]
    pub tl_bn: usize,
    #[serde(rename = "OE_TL")]
    pub oe_tl: usize,
    #[serde(rename = "OE_TL_bn")]
    pub oe_tl_bn: usize,
    #[serde(rename = "RTL")]
    pub rtl: Option<f64>,
    #[serde(rename = "RTL_bn")]
    pub rtl_bn: Option<f64>,
    #[serde(rename = "WCC")]
    pub wcc: usize,
    #[serde(rename = "SCC")]
    pub scc: usize,
    #[serde(rename = "OE_0")]
    pub oe_0: usize,
    #[serde(rename = "OE_0bn")]
    pub oe_0bn: usize,
    #[serde(rename = "ES_0")]
    pub es_0: usize,
    #[serde(rename = "ES_0bn")]
    pub es_0bn: usize,
    #[serde(rename = "OE_TL_0")]
    pub oe_tl_0: usize,
    #[serde(rename = "OE_TL_0bn")]
    pub oe_tl_0bn: usize,
    #[serde(rename = "TL_0")]
    pub tl_0: usize,
    #[serde(rename = "TL_0bn")]
    pub tl_0bn: usize,
    #[serde(rename = "IES_thresholds")]
    pub ies_thresholds: IesThresholds,
}

/// Report plus the three plot-ready distributions.
#[derive(Clone, Debug, PartialEq)]
pub struct FullReport {
    pub report: MetricsReport,
    pub height: Distribution,
    pub wcc: Distribution,
    pub ies: Distribution,
}

/// Snapshot plus per-set blank-node facts.
struct View<'a> {
    snap: Snapshot,
    store: &'a TripleStore,
    /// Non-blank members per set.
    named: Vec<usize>,
}

impl<'a> View<'a> {
    fn new(esg: &EquivalenceSetGraph, store: &'a TripleStore) -> Result<Self> {
        let snap = Snapshot::new(esg)?;
        let named = snap
            .members
            .iter()
            .map(|m| {
                m.iter()
                    .filter(|&&t| !is_blank(store, t))
                    .count()
            })
            .collect();
        Ok(View { snap, store, named })
    }

    fn is_top_level(&self, v: usize) -> bool {
        self.snap.supers[v].is_empty()
    }
}

fn is_blank(store: &TripleStore, t: TermId) -> bool {
    (t.index() < store.term_count()) && store.kind(t) == TermKind::BlankNode
}

fn basic_from(view: &View<'_>) -> BasicCounts {
    let oe: usize = view.snap.members.iter().map(Vec::len).sum();
    let oe_bn: usize = view.named.iter().sum();
    let es = view.snap.len();
    let es_bn = view.named.iter().filter(|&&n| n > 0).count();
    BasicCounts {
        oe,
        oe_bn,
        bn: oe - oe_bn,
        es,
        es_bn,
        r: ratio(es, oe),
        r_bn: ratio(es_bn, oe_bn),
        e: view.snap.edge_count(),
    }
}

fn heights_from(snap: &Snapshot) -> Heights {
    let strong = strong_components(&snap.supers);
    let h = condensation_heights(&snap.supers, &strong);
    Heights {
        h_max: h.iter().copied().max().unwrap_or(0),
        per_set: snap.ids.iter().copied().zip(h.iter().copied()).collect(),
        distribution: Distribution::from_values(DistributionKind::Height, h),
    }
}

fn shape_from(view: &View<'_>) -> HierarchyShape {
    let mut s = HierarchyShape::default();
    for v in 0..view.snap.len() {
        if !view.is_top_level(v) {
            continue;
        }
        s.top_level += 1;
        s.oe_tl += view.snap.members[v].len();
        s.oe_tl_bn += view.named[v];
        if view.named[v] > 0 {
            s.top_level_bn += 1;
        }
        if view.snap.subs[v].is_empty() {
            s.isolated += 1;
        }
    }
    s.rtl = ratio(s.top_level, s.oe_tl);
    s.rtl_bn = ratio(s.top_level_bn, s.oe_tl_bn);
    s
}

fn components_from(snap: &Snapshot) -> Components {
    let scc = strong_components(&snap.supers).count;
    let (label, wcc) = weak_components(&snap.supers);
    let mut sizes = vec![0u64; wcc];
    for l in label {
        sizes[l as usize] += 1;
    }
    Components {
        wcc,
        scc,
        distribution: Distribution::from_values(DistributionKind::WccSize, sizes),
    }
}

/// S(e) for every member of the snapshot.
fn entity_sizes(view: &View<'_>, params: &ExtensionParams) -> Result<HashMap<TermId, u64>> {
    let store = view.store;
    let mut size: HashMap<TermId, u64> = view
        .snap
        .members
        .iter()
        .flatten()
        .map(|&t| (t, 0))
        .collect();
    match params.mode {
        Mode::Classes => {
            if params.type_closure.is_empty() {
                return Err(Error::Config(
                    "class extensions need the closure of the type predicate".into(),
                ));
            }
            for &t in &params.type_closure {
                for &(_, class) in store.triples_with_predicate(t) {
                    if let Some(n) = size.get_mut(&class) {
                        *n += 1;
                    }
                }
            }
        }
        Mode::Properties => {
            if !params.type_closure.is_empty() {
                return Err(Error::Config(
                    "property extensions are triple counts; a type closure does not apply".into(),
                ));
            }
            for (p, n) in size.iter_mut() {
                *n = store.triples_with_predicate(*p).len() as u64;
            }
        }
        Mode::Custom => {
            return Err(Error::Config(
                "extensional sizes are defined for classes and properties only".into(),
            ))
        }
    }
    Ok(size)
}

/// IES of every set: its DES plus the DES of each distinct set reachable
/// through H⁻.
fn indirect_sizes(snap: &Snapshot, des: &[u64]) -> Vec<u64> {
    (0..snap.len())
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; snap.len()], Vec::<u32>::new()),
            |(seen, queue), start| {
                let stamp = start as u32;
                seen[start] = stamp;
                queue.clear();
                queue.push(stamp);
                let mut total = 0u64;
                while let Some(v) = queue.pop() {
                    total = total.saturating_add(des[v as usize]);
                    for &w in &snap.subs[v as usize] {
                        if seen[w as usize] != stamp {
                            seen[w as usize] = stamp;
                            queue.push(w);
                        }
                    }
                }
                total
            },
        )
        .collect()
}

fn extension_from(view: &View<'_>, params: &ExtensionParams) -> Result<ExtensionalSizes> {
    let entity_size = entity_sizes(view, params)?;
    let snap = &view.snap;
    let des: Vec<u64> = snap
        .members
        .iter()
        .map(|m| m.iter().map(|t| entity_size[t]).sum())
        .collect();
    let ies = indirect_sizes(snap, &des);

    let mut out = ExtensionalSizes {
        entity_size: HashMap::new(),
        des: BTreeMap::new(),
        ies: BTreeMap::new(),
        oe_0: 0,
        oe_0bn: 0,
        es_0: 0,
        es_0bn: 0,
        oe_tl_0: 0,
        oe_tl_0bn: 0,
        tl_0: 0,
        tl_0bn: 0,
        thresholds: IesThresholds::from_sizes(ies.iter().copied()),
        distribution: Distribution::from_values(DistributionKind::Ies, ies.iter().copied()),
    };
    for v in 0..snap.len() {
        let top = view.is_top_level(v);
        for &t in &snap.members[v] {
            if entity_size[&t] == 0 {
                let named = !is_blank(view.store, t);
                out.oe_0 += 1;
                out.oe_0bn += named as usize;
                if top {
                    out.oe_tl_0 += 1;
                    out.oe_tl_0bn += named as usize;
                }
            }
        }
        let empty = match params.emptiness {
            EmptinessBasis::Direct => des[v] == 0,
            EmptinessBasis::Indirect => ies[v] == 0,
        };
        if empty {
            let named = view.named[v] > 0;
            out.es_0 += 1;
            out.es_0bn += named as usize;
            if top {
                out.tl_0 += 1;
                out.tl_0bn += named as usize;
            }
        }
    }
    out.des = snap.ids.iter().copied().zip(des).collect();
    out.ies = snap.ids.iter().copied().zip(ies).collect();
    out.entity_size = entity_size;
    Ok(out)
}

pub fn basic_counts(esg: &EquivalenceSetGraph, store: &TripleStore) -> Result<BasicCounts> {
    Ok(basic_from(&View::new(esg, store)?))
}

pub fn heights(esg: &EquivalenceSetGraph) -> Result<Heights> {
    Ok(heights_from(&Snapshot::new(esg)?))
}

pub fn hierarchy_shape(esg: &EquivalenceSetGraph, store: &TripleStore) -> Result<HierarchyShape> {
    Ok(shape_from(&View::new(esg, store)?))
}

pub fn components(esg: &EquivalenceSetGraph) -> Result<Components> {
    Ok(components_from(&Snapshot::new(esg)?))
}

pub fn extensional_sizes(
    esg: &EquivalenceSetGraph,
    store: &TripleStore,
    params: &ExtensionParams,
) -> Result<ExtensionalSizes> {
    extension_from(&View::new(esg, store)?, params)
}

pub fn full_report(
    esg: &EquivalenceSetGraph,
    store: &TripleStore,
    params: &ExtensionParams,
) -> Result<FullReport> {
    let view = View::new(esg, store)?;
    let ((basic, shape), ((h, comps), ext)) = rayon::join(
        || (basic_from(&view), shape_from(&view)),
        || {
            rayon::join(
                || (heights_from(&view.snap), components_from(&view.snap)),
                || extension_from(&view, params),
            )
        },
    );
    let ext = ext?;
    let report = MetricsReport {
        oe: basic.oe,
        oe_bn: basic.oe_bn,
        bn: basic.bn,
        es: basic.es,
        es_bn: basic.es_bn,
        r: basic.r,
        r_bn: basic.r_bn,
        e: basic.e,
        h_max: h.h_max,
        isolated: shape.isolated,
        tl: shape.top_level,
        tl_bn: shape.top_level_bn,
        oe_tl: shape.oe_tl,
        oe_tl_bn: shape.oe_tl_bn,
        rtl: shape.rtl,
        rtl_bn: shape.rtl_bn,
        wcc: comps.wcc,
        scc: comps.scc,
        oe_0: ext.oe_0,
        oe_0bn: ext.oe_0bn,
        es_0: ext.es_0,
        es_0bn: ext.es_0bn,
        oe_tl_0: ext.oe_tl_0,
        oe_tl_0bn: ext.oe_tl_0bn,
        tl_0: ext.tl_0,
        tl_0bn: ext.tl_0bn,
        ies_thresholds: ext.thresholds,
    };
    Ok(FullReport {
        report,
        height: h.distribution,
        wcc: comps.distribution,
        ies: ext.distribution,
    })
}
