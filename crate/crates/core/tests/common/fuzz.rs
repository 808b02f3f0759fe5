//! Random legal/illegal action sequences against the stage machine, with an
//! independent table of which action is legal in which stage.

use std::collections::BTreeSet;

use proptest::prelude::*;

use ucm_core::gateway::Provider;
use ucm_core::model::validate_model;
use ucm_core::pipeline::{export_session, Clock, Edit, ExportFormat, IdSource, Pipeline, Session, Stage, Step, F_ORPHANED};

#[derive(Debug, Clone, Copy)]
pub enum Action {
    Run(Step),
    DescribeUnknown,
    Confirm,
    AddActor,
    RemoveActor(u8),
    RenameActor(u8, bool),
    RemoveUsecase(u8),
    RelinkUsecase(u8),
    RemoveModelElement(u8),
    Export(bool),
}

pub fn action() -> impl Strategy<Value = Action> {
    prop_oneof![
        3 => prop::sample::select(Step::ALL.to_vec()).prop_map(Action::Run),
        1 => Just(Action::DescribeUnknown),
        3 => Just(Action::Confirm),
        1 => Just(Action::AddActor),
        1 => any::<u8>().prop_map(Action::RemoveActor),
        1 => (any::<u8>(), any::<bool>()).prop_map(|(i, b)| Action::RenameActor(i, b)),
        1 => any::<u8>().prop_map(Action::RemoveUsecase),
        1 => any::<u8>().prop_map(Action::RelinkUsecase),
        1 => any::<u8>().prop_map(Action::RemoveModelElement),
        1 => any::<bool>().prop_map(Action::Export),
    ]
}

use Stage::*;

/// Stages in which the action may run, and the stage it leads to.
fn legal(action: Action, stage: Stage) -> Option<Stage> {
    let allowed = |set: &[Stage], to: Stage| set.contains(&stage).then_some(to);
    match action {
        Action::Run(Step::Actors) => allowed(&[Created, ActorsProposed], ActorsProposed),
        Action::Run(Step::Usecases) => allowed(&[ActorsConfirmed, UsecasesProposed], UsecasesProposed),
        Action::Run(Step::Model) => allowed(&[UsecasesConfirmed, ModelProposed], ModelProposed),
        Action::Run(Step::Descriptions) | Action::DescribeUnknown => {
            allowed(&[ModelConfirmed, DescriptionsDone], DescriptionsDone)
        }
        Action::Confirm => match stage {
            ActorsProposed => Some(ActorsConfirmed),
            UsecasesProposed => Some(UsecasesConfirmed),
            ModelProposed => Some(ModelConfirmed),
            _ => None,
        },
        Action::AddActor | Action::RemoveActor(_) | Action::RenameActor(..) => allowed(
            &[ActorsProposed, ActorsConfirmed, UsecasesProposed, UsecasesConfirmed],
            stage,
        ),
        Action::RemoveUsecase(_) | Action::RelinkUsecase(_) => {
            allowed(&[UsecasesProposed, UsecasesConfirmed], stage)
        }
        Action::RemoveModelElement(_) => allowed(&[ModelProposed, ModelConfirmed], stage),
        Action::Export(puml) => {
            let has_model = [ModelProposed, ModelConfirmed, DescriptionsDone].contains(&stage);
            (!puml || has_model).then_some(stage)
        }
    }
}

/// Error codes a legal action may still produce (bad targets, empty
/// proposals, unknown use cases).
fn legal_failures(action: Action) -> &'static [&'static str] {
    match action {
        Action::Confirm => &["E-NOTHING-TO-CONFIRM"],
        Action::DescribeUnknown => &["E-UNKNOWN-USECASE"],
        Action::RenameActor(..) => &["E-UNKNOWN-TARGET", "E-EMPTY-NAME", "E-INVALID-EDIT"],
        Action::AddActor | Action::RemoveActor(_) | Action::RemoveUsecase(_) => &["E-UNKNOWN-TARGET", "E-INVALID-EDIT"],
        Action::RelinkUsecase(_) => &["E-UNKNOWN-TARGET", "E-INVALID-EDIT"],
        Action::RemoveModelElement(_) => &["E-UNKNOWN-TARGET"],
        _ => &[],
    }
}

fn illegal_code(action: Action) -> &'static str {
    match action {
        Action::Export(true) => "E-NO-MODEL",
        _ => "E-STAGE-ORDER",
    }
}

fn pick(ids: Vec<String>, i: u8) -> String {
    if ids.is_empty() || i >= 240 {
        return "X99".into();
    }
    ids[i as usize % ids.len()].clone()
}

fn actor_ids(s: &Session) -> Vec<String> {
    let list = if s.stage == ActorsProposed { &s.proposed_actors } else { &s.confirmed_actors };
    list.iter().map(|a| a.id.clone()).collect()
}

fn usecase_ids(s: &Session) -> Vec<String> {
    let list = if s.stage == UsecasesProposed { &s.proposed_usecases } else { &s.confirmed_usecases };
    list.iter().map(|u| u.id.clone()).collect()
}

fn perform<P: Provider, C: Clock, I: IdSource>(
    p: &Pipeline<P, C, I>,
    s: &mut Session,
    action: Action,
    counter: usize,
) -> Result<(), String> {
    let r = match action {
        Action::Run(step) => p.run_stage(s, step, None),
        Action::DescribeUnknown => p.run_description_stage(s, &["UC999".to_string()]).map(drop),
        Action::Confirm => p.confirm(s),
        Action::AddActor => p.apply_edits(s, &[Edit::add_actor(format!("Extra actor {counter}"))]),
        Action::RemoveActor(i) => {
            let id = pick(actor_ids(s), i);
            p.apply_edits(s, &[Edit::remove(Step::Actors, id)])
        }
        Action::RenameActor(i, blank) => {
            let id = pick(actor_ids(s), i);
            let name = if blank { " ".to_string() } else { format!("Renamed {counter}") };
            p.apply_edits(s, &[Edit::rename(Step::Actors, id, name)])
        }
        Action::RemoveUsecase(i) => {
            let id = pick(usecase_ids(s), i);
            p.apply_edits(s, &[Edit::remove(Step::Usecases, id)])
        }
        Action::RelinkUsecase(i) => {
            let id = pick(usecase_ids(s), i);
            let to = pick(s.confirmed_actors.iter().map(|a| a.id.clone()).collect(), i / 2);
            p.apply_edits(s, &[Edit::relink(Step::Usecases, id, [to])])
        }
        Action::RemoveModelElement(i) => {
            let ids = s
                .model
                .iter()
                .flat_map(|m| m.actors.iter().map(|a| a.id.clone()).chain(m.use_cases.iter().map(|u| u.id.clone())))
                .collect();
            p.apply_edits(s, &[Edit::remove(Step::Model, pick(ids, i))])
        }
        Action::Export(puml) => {
            let f = if puml { ExportFormat::Puml } else { ExportFormat::Json };
            export_session(s, f).map(drop)
        }
    };
    r.map_err(|e| e.code().to_string())
}

fn check_invariants(s: &Session) -> Result<(), String> {
    let at_least = |st: Stage| s.stage >= st;
    if s.model.is_some() != at_least(ModelProposed) {
        return Err(format!("model presence does not match stage {}", s.stage));
    }
    if let Some(m) = &s.model {
        let v = validate_model(m);
        if !v.is_empty() {
            return Err(format!("model invalid: {v:?}"));
        }
    }
    if !s.descriptions.is_empty() && s.stage != DescriptionsDone {
        return Err("descriptions before descriptions_done".into());
    }
    if at_least(UsecasesConfirmed) {
        for uc in &s.confirmed_usecases {
            let linked = uc.actor_ids.iter().any(|a| s.confirmed_actors.iter().any(|c| &c.id == a));
            if !linked && !s.is_flagged(&uc.id, F_ORPHANED) {
                return Err(format!("{} has no confirmed actor and no flag", uc.id));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct FuzzStats {
    pub actions: usize,
    pub illegal: usize,
    pub reached: BTreeSet<Stage>,
}

/// Runs `actions` from a fresh session, checking every step against the
/// legality table.
pub fn run_sequence<P: Provider, C: Clock, I: IdSource>(
    p: &Pipeline<P, C, I>,
    actions: &[Action],
) -> Result<FuzzStats, String> {
    let mut s = p.start_session(super::doc()).map_err(|e| e.to_string())?;
    let mut stats = FuzzStats::default();
    stats.reached.insert(s.stage);
    for (n, &action) in actions.iter().enumerate() {
        let before = s.clone();
        let result = perform(p, &mut s, action, n);
        let ctx = || format!("action #{n} {action:?} in {}", before.stage);
        match (legal(action, before.stage), result) {
            (None, Ok(())) => return Err(format!("{}: illegal action succeeded", ctx())),
            (None, Err(code)) => {
                stats.illegal += 1;
                if code != illegal_code(action) {
                    return Err(format!("{}: expected {}, got {code}", ctx(), illegal_code(action)));
                }
                if s != before {
                    return Err(format!("{}: rejected action changed the session", ctx()));
                }
            }
            (Some(to), Ok(())) => {
                if s.stage != to {
                    return Err(format!("{}: reached {} instead of {to}", ctx(), s.stage));
                }
            }
            (Some(_), Err(code)) => {
                if !legal_failures(action).contains(&code.as_str()) {
                    return Err(format!("{}: undocumented failure {code}", ctx()));
                }
                if s != before {
                    return Err(format!("{}: failed action changed the session", ctx()));
                }
            }
        }
        check_invariants(&s).map_err(|e| format!("{}: {e}", ctx()))?;
        stats.actions += 1;
        stats.reached.insert(s.stage);
    }
    Ok(stats)
}
