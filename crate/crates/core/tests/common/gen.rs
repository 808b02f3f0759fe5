//! Random valid use case models.

use std::collections::BTreeSet;

use proptest::prelude::*;

use ucm_core::model::{
    Actor, ActorKind, Association, RelationKind, UseCase, UseCaseModel, UseCaseRelation,
};

/// Element names: letters, digits, punctuation, quotes, braces, accents and
/// runs of spaces, never blank.
pub fn name() -> impl Strategy<Value = String> {
    "[A-Za-z\u{e9}\u{fc}][A-Za-z0-9 \u{e9}\"'{}:<>()._/-]{0,24}"
}

fn alias() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,6}"
}

fn kind() -> impl Strategy<Value = ActorKind> {
    prop_oneof![
        Just(ActorKind::Human),
        Just(ActorKind::ExternalSystem),
        Just(ActorKind::Hardware)
    ]
}

/// A model that passes `validate_model`; `association_complete` forces
/// every use case to have at least one actor.
pub fn model_with(association_complete: bool) -> impl Strategy<Value = UseCaseModel> {
    (
        prop::collection::btree_set(alias(), 0..14),
        0usize..6,
        name(),
    )
        .prop_flat_map(move |(ids, actor_count, system)| {
            let ids: Vec<String> = ids.into_iter().collect();
            let split = actor_count.min(ids.len());
            let actor_ids = ids[..split].to_vec();
            let uc_ids = ids[split..].to_vec();
            let (na, nu) = (actor_ids.len(), uc_ids.len());
            (
                Just(system),
                Just(actor_ids),
                Just(uc_ids),
                prop::collection::vec((name(), kind()), na),
                prop::collection::vec(name(), nu),
                prop::collection::vec(prop::collection::vec(any::<bool>(), na), nu),
                prop::collection::vec((0..nu.max(1), 0..nu.max(1), any::<bool>()), 0..4),
            )
        })
        .prop_map(move |(system, actor_ids, uc_ids, actors, titles, links, rels)| {
            let actors: Vec<Actor> = actor_ids
                .iter()
                .zip(actors)
                .map(|(id, (n, k))| Actor::new(id.clone(), n).with_kind(k))
                .collect();
            let mut associations = Vec::new();
            let mut use_cases = Vec::new();
            for (i, (id, title)) in uc_ids.iter().zip(titles).enumerate() {
                let mut linked: BTreeSet<String> = actor_ids
                    .iter()
                    .zip(&links[i])
                    .filter(|(_, on)| **on)
                    .map(|(a, _)| a.clone())
                    .collect();
                if association_complete && linked.is_empty() && !actor_ids.is_empty() {
                    linked.insert(actor_ids[i % actor_ids.len()].clone());
                }
                for a in &linked {
                    associations.push(Association::new(a.as_str(), id.as_str()));
                }
                use_cases.push(UseCase::new(id.clone(), title, linked));
            }
            let relations = rels
                .into_iter()
                .filter(|(f, t, _)| f != t && *f < uc_ids.len() && *t < uc_ids.len())
                .map(|(f, t, include)| UseCaseRelation {
                    from_id: uc_ids[f].clone(),
                    to_id: uc_ids[t].clone(),
                    kind: if include { RelationKind::Include } else { RelationKind::Extend },
                })
                .collect();
            let mut m = UseCaseModel {
                system_name: system,
                actors,
                use_cases,
                associations,
                relations,
            };
            if association_complete && m.actors.is_empty() {
                m.use_cases.clear();
                m.relations.clear();
            }
            m
        })
}

pub fn model() -> impl Strategy<Value = UseCaseModel> {
    model_with(false)
}
