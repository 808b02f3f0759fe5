use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::engine::name_key;
use super::{Edit, EditKind, Flag, PipelineError, Session, Stage, Step, F_ORPHANED};
use crate::eval::MatcherConfig;
use crate::model::{Actor, Association, UseCase, UseCaseModel};
use crate::text::collapse_ws;

/// Applies one edit and returns the entry to log (with the assigned id
/// filled in for `add`).
pub(super) fn apply(s: &mut Session, edit: &Edit, matcher: &MatcherConfig) -> Result<Edit, PipelineError> {
    let assigned = match edit.stage {
        Step::Actors => edit_actors(s, edit, matcher)?,
        Step::Usecases => edit_usecases(s, edit, matcher)?,
        Step::Model => edit_model(s, edit)?,
        Step::Descriptions => {
            return Err(PipelineError::InvalidEdit(String::from(
                "descriptions are regenerated, not edited",
            )))
        }
    };
    let mut logged = edit.clone();
    if let Some(id) = assigned {
        logged.target_id = Some(id);
    }
    Ok(logged)
}

/// Recomputes F-ORPHANED over the use case list the user is working on.
pub(super) fn refresh_flags(s: &mut Session) {
    let list = match s.stage {
        Stage::UsecasesProposed => &s.proposed_usecases,
        Stage::UsecasesConfirmed
        | Stage::ModelProposed
        | Stage::ModelConfirmed
        | Stage::DescriptionsDone => &s.confirmed_usecases,
        _ => {
            s.flags.clear();
            return;
        }
    };
    s.flags = list
        .iter()
        .filter(|u| u.actor_ids.is_empty())
        .map(|u| Flag {
            code: String::from(F_ORPHANED),
            element_id: u.id.clone(),
        })
        .collect();
}

fn target(edit: &Edit) -> Result<&str, PipelineError> {
    edit.target_id
        .as_deref()
        .ok_or_else(|| PipelineError::InvalidEdit(format!("{:?} edit needs a target_id", edit.kind)))
}

fn new_name(edit: &Edit) -> Result<String, PipelineError> {
    let name = collapse_ws(edit.payload.name.as_deref().unwrap_or(""));
    if name.is_empty() {
        return Err(PipelineError::EmptyName);
    }
    Ok(name)
}

fn edit_actors(s: &mut Session, edit: &Edit, matcher: &MatcherConfig) -> Result<Option<String>, PipelineError> {
    let confirmed = match s.stage {
        Stage::ActorsProposed => false,
        Stage::ActorsConfirmed | Stage::UsecasesProposed | Stage::UsecasesConfirmed => true,
        stage => return Err(PipelineError::order("edit actors", stage)),
    };
    let mut assigned = None;
    match edit.kind {
        EditKind::Add => {
            let name = new_name(edit)?;
            let list = if confirmed { &s.confirmed_actors } else { &s.proposed_actors };
            ensure_unique(list.iter().map(|a| a.name.as_str()), &name, None, matcher)?;
            let id = s.next_actor_id();
            let actor = Actor::new(id.clone(), name).with_kind(edit.payload.kind.unwrap_or_default());
            let list = if confirmed { &mut s.confirmed_actors } else { &mut s.proposed_actors };
            list.push(actor);
            assigned = Some(id);
        }
        EditKind::Remove => {
            let id = target(edit)?;
            let list = if confirmed { &mut s.confirmed_actors } else { &mut s.proposed_actors };
            let at = list
                .iter()
                .position(|a| a.id == id)
                .ok_or_else(|| PipelineError::UnknownTarget(String::from(id)))?;
            list.remove(at);
            if confirmed {
                for uc in s.proposed_usecases.iter_mut().chain(s.confirmed_usecases.iter_mut()) {
                    uc.actor_ids.retain(|a| a != id);
                }
            }
        }
        EditKind::Rename => {
            let id = target(edit)?;
            let list = if confirmed { &mut s.confirmed_actors } else { &mut s.proposed_actors };
            if !list.iter().any(|a| a.id == id) {
                return Err(PipelineError::UnknownTarget(String::from(id)));
            }
            let name = new_name(edit)?;
            ensure_unique(list.iter().map(|a| a.name.as_str()), &name, list.iter().position(|a| a.id == id), matcher)?;
            let actor = list.iter_mut().find(|a| a.id == id).expect("checked above");
            actor.name = name;
            if let Some(kind) = edit.payload.kind {
                actor.kind = kind;
            }
        }
        EditKind::Relink => {
            return Err(PipelineError::InvalidEdit(String::from("actors have no links to edit")))
        }
    }
    Ok(assigned)
}

fn edit_usecases(s: &mut Session, edit: &Edit, matcher: &MatcherConfig) -> Result<Option<String>, PipelineError> {
    let confirmed = match s.stage {
        Stage::UsecasesProposed => false,
        Stage::UsecasesConfirmed => true,
        stage => return Err(PipelineError::order("edit use cases", stage)),
    };
    let mut assigned = None;
    match edit.kind {
        EditKind::Add => {
            let title = new_name(edit)?;
            let links = links(s, edit)?;
            let list = if confirmed { &s.confirmed_usecases } else { &s.proposed_usecases };
            ensure_unique(list.iter().map(|u| u.title.as_str()), &title, None, matcher)?;
            let id = s.next_usecase_id();
            let list = if confirmed { &mut s.confirmed_usecases } else { &mut s.proposed_usecases };
            list.push(UseCase::new(id.clone(), title, links));
            assigned = Some(id);
        }
        EditKind::Remove => {
            let id = target(edit)?;
            let list = if confirmed { &mut s.confirmed_usecases } else { &mut s.proposed_usecases };
            let at = list
                .iter()
                .position(|u| u.id == id)
                .ok_or_else(|| PipelineError::UnknownTarget(String::from(id)))?;
            list.remove(at);
        }
        EditKind::Rename => {
            let id = target(edit)?;
            let list = if confirmed { &mut s.confirmed_usecases } else { &mut s.proposed_usecases };
            let at = list
                .iter()
                .position(|u| u.id == id)
                .ok_or_else(|| PipelineError::UnknownTarget(String::from(id)))?;
            let title = new_name(edit)?;
            ensure_unique(list.iter().map(|u| u.title.as_str()), &title, Some(at), matcher)?;
            list[at].title = title;
        }
        EditKind::Relink => {
            let id = String::from(target(edit)?);
            let links = links(s, edit)?;
            let list = if confirmed { &mut s.confirmed_usecases } else { &mut s.proposed_usecases };
            let uc = list
                .iter_mut()
                .find(|u| u.id == id)
                .ok_or(PipelineError::UnknownTarget(id))?;
            uc.actor_ids = links;
        }
    }
    Ok(assigned)
}

/// Actor links from the payload: non-empty and all confirmed.
fn links(s: &Session, edit: &Edit) -> Result<Vec<String>, PipelineError> {
    let ids = edit.payload.actor_ids.clone().unwrap_or_default();
    if ids.is_empty() {
        return Err(PipelineError::InvalidEdit(String::from(
            "a use case needs at least one actor",
        )));
    }
    for id in &ids {
        if !s.confirmed_actors.iter().any(|a| a.id == *id) {
            return Err(PipelineError::UnknownTarget(id.clone()));
        }
    }
    let mut ids = ids;
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

fn ensure_unique<'a>(
    existing: impl Iterator<Item = &'a str>,
    name: &str,
    skip: Option<usize>,
    matcher: &MatcherConfig,
) -> Result<(), PipelineError> {
    let key = name_key(matcher, name);
    for (i, other) in existing.enumerate() {
        if Some(i) != skip && name_key(matcher, other) == key {
            return Err(PipelineError::InvalidEdit(format!("\"{name}\" duplicates \"{other}\"")));
        }
    }
    Ok(())
}

fn edit_model(s: &mut Session, edit: &Edit) -> Result<Option<String>, PipelineError> {
    if !matches!(s.stage, Stage::ModelProposed | Stage::ModelConfirmed) {
        return Err(PipelineError::order("edit the model", s.stage));
    }
    if s.model.is_none() {
        return Err(PipelineError::NoModel);
    }
    let mut assigned = None;
    match edit.kind {
        EditKind::Add => {
            let name = new_name(edit)?;
            match &edit.payload.actor_ids {
                Some(actor_ids) => {
                    let id = s.next_usecase_id();
                    let m = s.model.as_mut().expect("checked above");
                    check_actors(m, actor_ids)?;
                    m.use_cases.push(UseCase::new(id.clone(), name, actor_ids.iter().cloned()));
                    m.associations
                        .extend(actor_ids.iter().map(|a| Association::new(a.as_str(), id.as_str())));
                    assigned = Some(id);
                }
                None => {
                    let id = s.next_actor_id();
                    let m = s.model.as_mut().expect("checked above");
                    m.actors
                        .push(Actor::new(id.clone(), name).with_kind(edit.payload.kind.unwrap_or_default()));
                    assigned = Some(id);
                }
            }
        }
        EditKind::Remove => {
            let id = target(edit)?;
            let m = s.model.as_mut().expect("checked above");
            if let Some(at) = m.actors.iter().position(|a| a.id == id) {
                m.actors.remove(at);
                m.associations.retain(|e| e.actor_id != id);
            } else if let Some(at) = m.use_cases.iter().position(|u| u.id == id) {
                m.use_cases.remove(at);
                m.associations.retain(|e| e.usecase_id != id);
                m.relations.retain(|r| r.from_id != id && r.to_id != id);
            } else {
                return Err(PipelineError::UnknownTarget(String::from(id)));
            }
        }
        EditKind::Rename => {
            let id = target(edit)?;
            let name = new_name(edit)?;
            let m = s.model.as_mut().expect("checked above");
            if let Some(a) = m.actors.iter_mut().find(|a| a.id == id) {
                a.name = name;
                if let Some(kind) = edit.payload.kind {
                    a.kind = kind;
                }
            } else if let Some(u) = m.use_cases.iter_mut().find(|u| u.id == id) {
                u.title = name;
            } else {
                return Err(PipelineError::UnknownTarget(String::from(id)));
            }
        }
        EditKind::Relink => {
            let id = target(edit)?;
            let m = s.model.as_mut().expect("checked above");
            if m.use_case(id).is_none() {
                return Err(PipelineError::UnknownTarget(String::from(id)));
            }
            let actor_ids = edit.payload.actor_ids.clone().unwrap_or_default();
            check_actors(m, &actor_ids)?;
            m.associations.retain(|e| e.usecase_id != id);
            m.associations
                .extend(actor_ids.iter().map(|a| Association::new(a.as_str(), id)));
        }
    }
    Ok(assigned)
}

fn check_actors(m: &UseCaseModel, ids: &[String]) -> Result<(), PipelineError> {
    match ids.iter().find(|id| m.actor(id).is_none()) {
        Some(id) => Err(PipelineError::UnknownTarget(id.clone())),
        None => Ok(()),
    }
}
