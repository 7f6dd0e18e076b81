//! Choosing which terms to observe, and filtering triples that would blur
//! the class/property distinction.
//!
//! Classes are terms typed as `rdfs:Class`, or subjects/objects of triples
//! whose predicate has `rdfs:Class` as domain/range. Properties are
//! predicates of any triple, terms typed as `rdf:Property`, or
//! subjects/objects of triples whose predicate has `rdf:Property` as
//! domain/range. Each ground term is widened to everything equivalent to or
//! specializing it in the property hierarchy. On top of that, any endpoint
//! of a triple whose predicate links entities of the current mode (the
//! closure of the mode's equivalence and specialization relations) is
//! selected too.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esg::{self, EquivalenceSetGraph, EsgParams};
use crate::ingest::{Term, TermId, TermKind, Triple, TripleStore};
use crate::vocab;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Classes,
    Properties,
    /// Only the linking-predicate criterion applies; useful for observing
    /// other kinds of entities with custom relations.
    Custom,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Classes => "classes",
            Mode::Properties => "properties",
            Mode::Custom => "custom",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classes" => Ok(Mode::Classes),
            "properties" => Ok(Mode::Properties),
            "custom" => Ok(Mode::Custom),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

/// IRIs of the ground terms. `p_eq`/`p_sub` are the entity relations for
/// the classes and custom modes; the properties mode always observes
/// through `p_e`/`p_s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroundTerms {
    pub p_eq: String,
    pub p_sub: String,
    pub p_e: String,
    pub p_s: String,
    pub rdf_type: String,
    pub rdfs_class: String,
    pub rdf_property: String,
    pub rdfs_domain: String,
    pub rdfs_range: String,
}

impl Default for GroundTerms {
    fn default() -> Self {
        GroundTerms {
            p_eq: vocab::OWL_EQUIVALENT_CLASS.into(),
            p_sub: vocab::RDFS_SUB_CLASS_OF.into(),
            p_e: vocab::OWL_EQUIVALENT_PROPERTY.into(),
            p_s: vocab::RDFS_SUB_PROPERTY_OF.into(),
            rdf_type: vocab::RDF_TYPE.into(),
            rdfs_class: vocab::RDFS_CLASS.into(),
            rdf_property: vocab::RDF_PROPERTY.into(),
            rdfs_domain: vocab::RDFS_DOMAIN.into(),
            rdfs_range: vocab::RDFS_RANGE.into(),
        }
    }
}

/// [`GroundTerms`] interned into a store's dictionary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundIds {
    pub p_eq: TermId,
    pub p_sub: TermId,
    pub p_e: TermId,
    pub p_s: TermId,
    pub rdf_type: TermId,
    pub rdfs_class: TermId,
    pub rdf_property: TermId,
    pub rdfs_domain: TermId,
    pub rdfs_range: TermId,
}

impl GroundIds {
    /// Interns every ground IRI (no triples are added).
    pub fn resolve(store: &mut TripleStore, ground: &GroundTerms) -> Self {
        let mut id = |iri: &str| store.resolve(&Term::iri(iri));
        GroundIds {
            p_eq: id(&ground.p_eq),
            p_sub: id(&ground.p_sub),
            p_e: id(&ground.p_e),
            p_s: id(&ground.p_s),
            rdf_type: id(&ground.rdf_type),
            rdfs_class: id(&ground.rdfs_class),
            rdf_property: id(&ground.rdf_property),
            rdfs_domain: id(&ground.rdfs_domain),
            rdfs_range: id(&ground.rdfs_range),
        }
    }

    /// The `(equivalence, specialization)` relations observed in `mode`.
    pub fn entity_relations(&self, mode: Mode) -> (TermId, TermId) {
        match mode {
            Mode::Properties => (self.p_e, self.p_s),
            Mode::Classes | Mode::Custom => (self.p_eq, self.p_sub),
        }
    }
}

/// Ground terms widened to their closures in the property hierarchy.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SelectionProfile {
    pub mode: Mode,
    pub type_predicates: BTreeSet<TermId>,
    pub class_terms: BTreeSet<TermId>,
    pub property_terms: BTreeSet<TermId>,
    pub domain_predicates: BTreeSet<TermId>,
    pub range_predicates: BTreeSet<TermId>,
    /// Closure of the mode's equivalence and specialization relations.
    pub linking_predicates: BTreeSet<TermId>,
}

/// Builds the property ESG (`p_eq = p_e`, `p_sub = p_s`) over `store`.
pub fn property_esg(store: &TripleStore, ground: &GroundIds) -> Result<EquivalenceSetGraph> {
    let p_e = [ground.p_e];
    let p_s = [ground.p_s];
    esg::build(store, &EsgParams::properties(&p_e, &p_s), &BTreeSet::new())
}

/// Replaces each ground term by its closure (itself, its equivalents and
/// everything specializing it) taken from the property ESG of `store`.
pub fn expand_ground_terms(
    store: &TripleStore,
    ground: &GroundIds,
    mode: Mode,
) -> Result<SelectionProfile> {
    let properties = property_esg(store, ground)?;
    profile_from_property_esg(&properties, ground, mode)
}

/// Same as [`expand_ground_terms`] with an already built property ESG.
pub fn profile_from_property_esg(
    properties: &EquivalenceSetGraph,
    ground: &GroundIds,
    mode: Mode,
) -> Result<SelectionProfile> {
    let closure = |t: TermId| properties.closure_or_self(t);
    let (eq, sub) = ground.entity_relations(mode);
    let mut linking = closure(eq)?;
    linking.extend(closure(sub)?);
    let profile = SelectionProfile {
        mode,
        type_predicates: closure(ground.rdf_type)?,
        class_terms: closure(ground.rdfs_class)?,
        property_terms: closure(ground.rdf_property)?,
        domain_predicates: closure(ground.rdfs_domain)?,
        range_predicates: closure(ground.rdfs_range)?,
        linking_predicates: linking,
    };
    Ok(profile)
}

/// Terms to observe under `profile`. Literals are never selected.
pub fn select_entities(store: &TripleStore, profile: &SelectionProfile) -> BTreeSet<TermId> {
    let mut out = BTreeSet::new();
    let mut add = |t: TermId| {
        if store.kind(t) != TermKind::Literal {
            out.insert(t);
        }
    };

    let targets = match profile.mode {
        Mode::Classes => Some(&profile.class_terms),
        Mode::Properties => Some(&profile.property_terms),
        Mode::Custom => None,
    };

    if let Some(targets) = targets {
        // typed as rdfs:Class / rdf:Property
        for &t in &profile.type_predicates {
            for &(s, o) in store.triples_with_predicate(t) {
                if targets.contains(&o) {
                    add(s);
                }
            }
        }
        // subject/object of a predicate whose domain/range is a target
        for (declarations, subject_side) in [
            (&profile.domain_predicates, true),
            (&profile.range_predicates, false),
        ] {
            for &d in declarations {
                for &(q, c) in store.triples_with_predicate(d) {
                    if !targets.contains(&c) {
                        continue;
                    }
                    for &(s, o) in store.triples_with_predicate(q) {
                        add(if subject_side { s } else { o });
                    }
                }
            }
        }
    }

    if profile.mode == Mode::Properties {
        for p in store.predicates() {
            add(p);
        }
    }

    for &p in &profile.linking_predicates {
        for &(s, o) in store.triples_with_predicate(p) {
            add(s);
            add(o);
        }
    }
    out
}

/// Ground triples removed before construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Denylist {
    pub triples: Vec<[String; 3]>,
}

impl Default for Denylist {
    fn default() -> Self {
        default_denylist()
    }
}

/// The two statements that turn every subproperty pair into classes and
/// every typed thing into a class.
pub fn default_denylist() -> Denylist {
    Denylist {
        triples: vec![
            [
                vocab::RDFS_SUB_CLASS_OF.into(),
                vocab::RDFS_SUB_PROPERTY_OF.into(),
                vocab::RDFS_SUB_PROPERTY_OF.into(),
            ],
            [
                vocab::RDF_TYPE.into(),
                vocab::RDFS_SUB_PROPERTY_OF.into(),
                vocab::RDFS_SUB_CLASS_OF.into(),
            ],
        ],
    }
}

impl Denylist {
    pub fn empty() -> Self {
        Denylist {
            triples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Adds a pattern given as three IRIs, with or without angle brackets.
    pub fn push(&mut self, s: &str, p: &str, o: &str) -> Result<()> {
        let clean = |x: &str| -> Result<String> {
            let x = x.trim();
            let x = x
                .strip_prefix('<')
                .and_then(|x| x.strip_suffix('>'))
                .unwrap_or(x);
            if x.is_empty() || x.contains(char::is_whitespace) || x == "*" || x.starts_with('?') {
                return Err(Error::Config(format!(
                    "denylist entries must be ground IRIs, got '{x}'"
                )));
            }
            Ok(x.to_owned())
        };
        let triple = [clean(s)?, clean(p)?, clean(o)?];
        if !self.triples.contains(&triple) {
            self.triples.push(triple);
        }
        Ok(())
    }

    /// Parses `<s> <p> <o>` (trailing ` .` optional).
    pub fn push_line(&mut self, line: &str) -> Result<()> {
        let line = line.trim().trim_end_matches('.').trim();
        let parts: Vec<_> = line.split_whitespace().collect();
        match parts.as_slice() {
            [s, p, o] => self.push(s, p, o),
            _ => Err(Error::Config(format!(
                "denylist entry needs exactly three IRIs: '{line}'"
            ))),
        }
    }

    /// Removes every denylisted triple from `store`; returns how many were
    /// present.
    pub fn apply(&self, store: &mut TripleStore) -> usize {
        let present: Vec<Triple> = self
            .triples
            .iter()
            .filter_map(|[s, p, o]| {
                Some(Triple {
                    s: store.find_iri(s)?,
                    p: store.find_iri(p)?,
                    o: store.find_iri(o)?,
                })
            })
            .filter(|t| store.contains(*t))
            .collect();
        if present.is_empty() {
            return 0;
        }
        store.retain(|t| !present.contains(&t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::StoreBuilder;
    use crate::vocab::*;

    fn store(triples: &[(&str, &str, &str)]) -> (TripleStore, GroundIds) {
        let mut b = StoreBuilder::new(Default::default());
        for &(s, p, o) in triples {
            b.insert_iris(s, p, o);
        }
        let mut store = b.finish().0;
        let ids = GroundIds::resolve(&mut store, &GroundTerms::default());
        (store, ids)
    }

    fn iris(store: &TripleStore, set: &BTreeSet<TermId>) -> BTreeSet<String> {
        set.iter()
            .map(|&t| store.lookup(t).unwrap().lexical.to_owned())
            .collect()
    }

    #[test]
    fn default_denylist_has_two_patterns() {
        assert_eq!(default_denylist().len(), 2);
    }

    #[test]
    fn denylist_on_clean_store_is_noop() {
        let (mut s, _) = store(&[("a", RDFS_SUB_CLASS_OF, "b")]);
        assert_eq!(default_denylist().apply(&mut s), 0);
        assert_eq!(s.triple_count(), 1);
    }

    #[test]
    fn denylist_removes_both_btc_triples() {
        let (mut s, _) = store(&[
            (RDFS_SUB_CLASS_OF, RDFS_SUB_PROPERTY_OF, RDFS_SUB_PROPERTY_OF),
            (RDF_TYPE, RDFS_SUB_PROPERTY_OF, RDFS_SUB_CLASS_OF),
            (RDFS_SUB_PROPERTY_OF, RDFS_DOMAIN, RDF_PROPERTY),
            (RDFS_SUB_CLASS_OF, RDFS_DOMAIN, RDFS_CLASS),
        ]);
        assert_eq!(default_denylist().apply(&mut s), 2);
        assert_eq!(s.triple_count(), 2);
    }

    #[test]
    fn denylist_rejects_wildcards() {
        let mut d = Denylist::empty();
        assert!(d.push("?s", "p", "o").is_err());
        assert!(d.push_line("<a> <b>").is_err());
        d.push_line("<a> <b> <c> .").unwrap();
        assert_eq!(d.triples, vec![["a".to_string(), "b".into(), "c".into()]]);
    }

    #[test]
    fn class_typed_subject_is_selected() {
        let (s, g) = store(&[("x", RDF_TYPE, RDFS_CLASS)]);
        let profile = expand_ground_terms(&s, &g, Mode::Classes).unwrap();
        let sel = select_entities(&s, &profile);
        assert_eq!(iris(&s, &sel), BTreeSet::from(["x".to_string()]));
    }

    #[test]
    fn every_predicate_is_a_property() {
        let (s, g) = store(&[("s", "p", "o")]);
        let profile = expand_ground_terms(&s, &g, Mode::Properties).unwrap();
        let sel = select_entities(&s, &profile);
        assert_eq!(iris(&s, &sel), BTreeSet::from(["p".to_string()]));
    }

    #[test]
    fn closures_are_reflexive_without_hierarchy() {
        let (s, g) = store(&[("s", "p", "o")]);
        let profile = expand_ground_terms(&s, &g, Mode::Classes).unwrap();
        assert_eq!(profile.type_predicates, BTreeSet::from([g.rdf_type]));
        assert_eq!(profile.class_terms, BTreeSet::from([g.rdfs_class]));
        assert_eq!(profile.domain_predicates, BTreeSet::from([g.rdfs_domain]));
    }

    #[test]
    fn subproperty_of_type_joins_type_closure() {
        let (s, g) = store(&[(":myType", RDFS_SUB_PROPERTY_OF, RDF_TYPE)]);
        let profile = expand_ground_terms(&s, &g, Mode::Classes).unwrap();
        assert_eq!(
            iris(&s, &profile.type_predicates),
            BTreeSet::from([RDF_TYPE.to_string(), ":myType".to_string()])
        );
    }

    #[test]
    fn domain_and_range_criteria() {
        let (s, g) = store(&[
            (":hasKind", RDFS_RANGE, RDFS_CLASS),
            (":thing", ":hasKind", ":Kind"),
            (":relatesProp", RDFS_DOMAIN, RDF_PROPERTY),
            (":p1", ":relatesProp", ":p2"),
        ]);
        let classes = select_entities(&s, &expand_ground_terms(&s, &g, Mode::Classes).unwrap());
        assert_eq!(iris(&s, &classes), BTreeSet::from([":Kind".to_string()]));
        let props =
            select_entities(&s, &expand_ground_terms(&s, &g, Mode::Properties).unwrap());
        assert!(props.contains(&s.find_iri(":p1").unwrap()));
        assert!(!props.contains(&s.find_iri(":p2").unwrap()));
    }

    #[test]
    fn property_typed_entities_are_selected() {
        let (s, g) = store(&[(":q", RDF_TYPE, RDF_PROPERTY)]);
        let props =
            select_entities(&s, &expand_ground_terms(&s, &g, Mode::Properties).unwrap());
        assert!(props.contains(&s.find_iri(":q").unwrap()));
    }

    #[test]
    fn linking_endpoints_are_selected() {
        let (s, g) = store(&[("a", OWL_EQUIVALENT_CLASS, "b"), ("c", RDFS_SUB_CLASS_OF, "a")]);
        let sel = select_entities(&s, &expand_ground_terms(&s, &g, Mode::Classes).unwrap());
        assert_eq!(
            iris(&s, &sel),
            BTreeSet::from(["a".to_string(), "b".into(), "c".into()])
        );
    }

    #[test]
    fn mode_parses() {
        assert_eq!("classes".parse::<Mode>().unwrap(), Mode::Classes);
        assert!("both".parse::<Mode>().is_err());
    }
}
