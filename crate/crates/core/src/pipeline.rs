//! The two-phase run: properties first, then classes reusing the property
//! graph for predicate closures.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::esg::{build_with, BuildOptions, EquivalenceSetGraph, EsgParams};
use crate::ingest::{TermId, TripleStore};
use crate::metrics::{EmptinessBasis, ExtensionParams};
use crate::select::{
    profile_from_property_esg, property_esg, select_entities, GroundIds, Mode, SelectionProfile,
};

pub struct Phase {
    pub esg: EquivalenceSetGraph,
    pub profile: SelectionProfile,
    pub selection: BTreeSet<TermId>,
}

impl Phase {
    /// Parameters for extensional sizes in this phase's mode.
    pub fn extension_params(&self, emptiness: EmptinessBasis) -> ExtensionParams {
        ExtensionParams {
            mode: self.profile.mode,
            type_closure: match self.profile.mode {
                Mode::Properties => BTreeSet::new(),
                _ => self.profile.type_predicates.clone(),
            },
            emptiness,
        }
    }
}

/// ESG over properties, with every selected property materialized.
pub fn run_properties(
    store: &TripleStore,
    ground: &GroundIds,
    options: &BuildOptions,
) -> Result<Phase> {
    let bare = property_esg(store, ground)?;
    let profile = profile_from_property_esg(&bare, ground, Mode::Properties)?;
    let selection = select_entities(store, &profile);
    let p_e = [ground.p_e];
    let p_s = [ground.p_s];
    let esg = build_with(store, &EsgParams::properties(&p_e, &p_s), &selection, options)?;
    Ok(Phase {
        esg,
        profile,
        selection,
    })
}

/// ESG over classes (or custom entities), taking predicate closures from
/// `properties`.
pub fn run_entities(
    store: &TripleStore,
    ground: &GroundIds,
    properties: &EquivalenceSetGraph,
    mode: Mode,
    options: &BuildOptions,
) -> Result<Phase> {
    let profile = profile_from_property_esg(properties, ground, mode)?;
    let selection = select_entities(store, &profile);
    let (eq, sub) = ground.entity_relations(mode);
    let (eq, sub) = ([eq], [sub]);
    let params = EsgParams {
        p_eq_seeds: &eq,
        p_sub_seeds: &sub,
        p_e: ground.p_e,
        p_s: ground.p_s,
        reuse_property_esg: Some(properties),
    };
    let esg = build_with(store, &params, &selection, options)?;
    Ok(Phase {
        esg,
        profile,
        selection,
    })
}
