//! The staged human-in-the-loop workflow: actors, then use cases, then the
//! diagram, then descriptions, each proposed by the model and confirmed
//! (possibly after edits) by a person.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::gateway::GatewayError;
use crate::model::{
    Actor, ActorKind, RequirementsDoc, UseCase, UseCaseDescription, UseCaseModel, Violation,
};
use crate::plantuml::{LintFinding, ParseError};
use crate::prompt::PromptError;

mod edits;
mod engine;

pub use engine::{export_session, ExportFormat, Pipeline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Created,
    ActorsProposed,
    ActorsConfirmed,
    UsecasesProposed,
    UsecasesConfirmed,
    ModelProposed,
    ModelConfirmed,
    DescriptionsDone,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Created => "created",
            Stage::ActorsProposed => "actors_proposed",
            Stage::ActorsConfirmed => "actors_confirmed",
            Stage::UsecasesProposed => "usecases_proposed",
            Stage::UsecasesConfirmed => "usecases_confirmed",
            Stage::ModelProposed => "model_proposed",
            Stage::ModelConfirmed => "model_confirmed",
            Stage::DescriptionsDone => "descriptions_done",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One of the four generation steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Actors,
    Usecases,
    Model,
    Descriptions,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::Actors, Step::Usecases, Step::Model, Step::Descriptions];

    pub fn as_str(self) -> &'static str {
        match self {
            Step::Actors => "actors",
            Step::Usecases => "usecases",
            Step::Model => "model",
            Step::Descriptions => "descriptions",
        }
    }

    pub fn from_name(s: &str) -> Option<Step> {
        Step::ALL.into_iter().find(|st| st.as_str() == s)
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    Add,
    Remove,
    Rename,
    Relink,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditPayload {
    /// New name (actors) or title (use cases).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ActorKind>,
    /// Linked actors; on a model-stage `add` their presence makes the new
    /// element a use case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actor_ids: Option<Vec<String>>,
}

/// A user refinement of a stage result. `target_id` is required except for
/// `add`, where the log entry records the id that was assigned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub stage: Step,
    pub kind: EditKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_id: Option<String>,
    #[serde(default)]
    pub payload: EditPayload,
}

impl Edit {
    pub fn add_actor(name: impl Into<String>) -> Self {
        Edit {
            stage: Step::Actors,
            kind: EditKind::Add,
            target_id: None,
            payload: EditPayload {
                name: Some(name.into()),
                ..EditPayload::default()
            },
        }
    }

    pub fn remove(stage: Step, target: impl Into<String>) -> Self {
        Edit {
            stage,
            kind: EditKind::Remove,
            target_id: Some(target.into()),
            payload: EditPayload::default(),
        }
    }

    pub fn rename(stage: Step, target: impl Into<String>, name: impl Into<String>) -> Self {
        Edit {
            stage,
            kind: EditKind::Rename,
            target_id: Some(target.into()),
            payload: EditPayload {
                name: Some(name.into()),
                ..EditPayload::default()
            },
        }
    }

    pub fn relink<I, S>(stage: Step, target: impl Into<String>, actor_ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Edit {
            stage,
            kind: EditKind::Relink,
            target_id: Some(target.into()),
            payload: EditPayload {
                actor_ids: Some(actor_ids.into_iter().map(Into::into).collect()),
                ..EditPayload::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingLabel {
    Actors,
    Usecases,
    Model,
    Descriptions,
    Total,
}

impl From<Step> for TimingLabel {
    fn from(s: Step) -> Self {
        match s {
            Step::Actors => TimingLabel::Actors,
            Step::Usecases => TimingLabel::Usecases,
            Step::Model => TimingLabel::Model,
            Step::Descriptions => TimingLabel::Descriptions,
        }
    }
}

/// Wall time spent on one step. Timestamps are milliseconds since the epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub label: TimingLabel,
    pub started_at: u64,
    #[serde(default)]
    pub ended_at: Option<u64>,
    #[serde(default)]
    pub minutes: Option<f64>,
}

/// Non-fatal observation attached to a stage run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageWarning {
    pub stage: Step,
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_id: Option<String>,
    pub message: String,
}

/// Marker on an element that needs the user's attention.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flag {
    pub code: String,
    pub element_id: String,
}

pub const F_ORPHANED: &str = "F-ORPHANED";

/// The ids one stage run proposed, in proposal order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub stage: Step,
    pub element_ids: Vec<String>,
}

/// A corrective re-prompt that was sent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairRecord {
    pub stage: Step,
    pub problem: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub requirements: RequirementsDoc,
    pub stage: Stage,
    #[serde(default)]
    pub proposed_actors: Vec<Actor>,
    #[serde(default)]
    pub confirmed_actors: Vec<Actor>,
    #[serde(default)]
    pub proposed_usecases: Vec<UseCase>,
    #[serde(default)]
    pub confirmed_usecases: Vec<UseCase>,
    #[serde(default)]
    pub model_source: Option<String>,
    #[serde(default)]
    pub model: Option<UseCaseModel>,
    #[serde(default)]
    pub descriptions: Vec<UseCaseDescription>,
    #[serde(default)]
    pub edit_log: Vec<Edit>,
    #[serde(default)]
    pub timings: Vec<TimingRecord>,
    #[serde(default)]
    pub flags: Vec<Flag>,
    #[serde(default)]
    pub warnings: Vec<StageWarning>,
    #[serde(default)]
    pub proposals: Vec<Proposal>,
    #[serde(default)]
    pub repairs: Vec<RepairRecord>,
    /// Last numeric suffixes handed out for `A<n>` and `UC<n>` ids.
    #[serde(default)]
    pub actor_seq: u32,
    #[serde(default)]
    pub usecase_seq: u32,
}

impl Session {
    pub fn new(id: impl Into<String>, requirements: RequirementsDoc) -> Self {
        Session {
            id: id.into(),
            requirements,
            stage: Stage::Created,
            proposed_actors: Vec::new(),
            confirmed_actors: Vec::new(),
            proposed_usecases: Vec::new(),
            confirmed_usecases: Vec::new(),
            model_source: None,
            model: None,
            descriptions: Vec::new(),
            edit_log: Vec::new(),
            timings: Vec::new(),
            flags: Vec::new(),
            warnings: Vec::new(),
            proposals: Vec::new(),
            repairs: Vec::new(),
            actor_seq: 0,
            usecase_seq: 0,
        }
    }

    pub fn timing(&self, label: TimingLabel) -> Option<&TimingRecord> {
        self.timings.iter().find(|t| t.label == label)
    }

    pub fn is_flagged(&self, element_id: &str, code: &str) -> bool {
        self.flags.iter().any(|f| f.element_id == element_id && f.code == code)
    }

    pub(crate) fn next_actor_id(&mut self) -> String {
        self.actor_seq += 1;
        alloc::format!("A{}", self.actor_seq)
    }

    pub(crate) fn next_usecase_id(&mut self) -> String {
        self.usecase_seq += 1;
        alloc::format!("UC{}", self.usecase_seq)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("E-EMPTY-REQUIREMENTS: requirements text is empty")]
    EmptyRequirements,
    #[error("E-STAGE-ORDER: cannot {action} while the session is {stage}")]
    StageOrder { action: String, stage: Stage },
    #[error("{0}")]
    Gateway(GatewayError),
    #[error("{0}")]
    Prompt(PromptError),
    #[error("E-REPAIR-FAILED: {stage} stage output still unusable after one corrective re-prompt: {message}")]
    RepairFailed {
        stage: Step,
        message: String,
        findings: Vec<LintFinding>,
    },
    #[error("{0}")]
    Parse(ParseError),
    #[error("E-UNKNOWN-USECASE: no use case `{0}` in the model")]
    UnknownUseCase(String),
    #[error("E-UNKNOWN-TARGET: no element `{0}` to edit")]
    UnknownTarget(String),
    #[error("E-EMPTY-NAME: name must not be blank")]
    EmptyName,
    #[error("E-INVALID-EDIT: {0}")]
    InvalidEdit(String),
    #[error("E-NOTHING-TO-CONFIRM: the {0} proposal is empty")]
    NothingToConfirm(Step),
    #[error("E-INVALID-MODEL: edited model violates {} rule(s)", .0.len())]
    InvalidModel(Vec<Violation>),
    #[error("E-NO-MODEL: the session has no model yet")]
    NoModel,
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::EmptyRequirements => "E-EMPTY-REQUIREMENTS",
            PipelineError::StageOrder { .. } => "E-STAGE-ORDER",
            PipelineError::Gateway(e) => e.code(),
            PipelineError::Prompt(e) => e.code(),
            PipelineError::RepairFailed { .. } => "E-REPAIR-FAILED",
            PipelineError::Parse(e) => e.code.as_str(),
            PipelineError::UnknownUseCase(_) => "E-UNKNOWN-USECASE",
            PipelineError::UnknownTarget(_) => "E-UNKNOWN-TARGET",
            PipelineError::EmptyName => "E-EMPTY-NAME",
            PipelineError::InvalidEdit(_) => "E-INVALID-EDIT",
            PipelineError::NothingToConfirm(_) => "E-NOTHING-TO-CONFIRM",
            PipelineError::InvalidModel(_) => "E-INVALID-MODEL",
            PipelineError::NoModel => "E-NO-MODEL",
        }
    }

    pub(crate) fn order(action: &str, stage: Stage) -> Self {
        PipelineError::StageOrder {
            action: String::from(action),
            stage,
        }
    }
}

impl From<GatewayError> for PipelineError {
    fn from(e: GatewayError) -> Self {
        PipelineError::Gateway(e)
    }
}

impl From<PromptError> for PipelineError {
    fn from(e: PromptError) -> Self {
        PipelineError::Prompt(e)
    }
}

/// Source of wall time in milliseconds.
pub trait Clock {
    fn now_ms(&self) -> u64;
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now_ms(&self) -> u64 {
        (**self).now_ms()
    }
}

impl<C: Clock + ?Sized> Clock for Box<C> {
    fn now_ms(&self) -> u64 {
        (**self).now_ms()
    }
}

impl<C: Clock + ?Sized> Clock for Arc<C> {
    fn now_ms(&self) -> u64 {
        (**self).now_ms()
    }
}

/// Clock that advances by a fixed step on every reading; deterministic.
#[derive(Debug)]
pub struct StepClock {
    next: AtomicU64,
    step: u64,
}

impl StepClock {
    pub fn new(start_ms: u64, step_ms: u64) -> Self {
        StepClock {
            next: AtomicU64::new(start_ms),
            step: step_ms,
        }
    }
}

impl Clock for StepClock {
    fn now_ms(&self) -> u64 {
        self.next.fetch_add(self.step, Ordering::SeqCst)
    }
}

pub trait IdSource {
    fn next_session_id(&self) -> String;
}

impl<I: IdSource + ?Sized> IdSource for &I {
    fn next_session_id(&self) -> String {
        (**self).next_session_id()
    }
}

impl<I: IdSource + ?Sized> IdSource for Box<I> {
    fn next_session_id(&self) -> String {
        (**self).next_session_id()
    }
}

impl<I: IdSource + ?Sized> IdSource for Arc<I> {
    fn next_session_id(&self) -> String {
        (**self).next_session_id()
    }
}

/// `s000001`, `s000002`, ...
#[derive(Debug, Default)]
pub struct SequentialIds {
    next: AtomicU64,
}

impl SequentialIds {
    pub fn new() -> Self {
        Self::default()
    }
}

impl IdSource for SequentialIds {
    fn next_session_id(&self) -> String {
        let n = self.next.fetch_add(1, Ordering::SeqCst) + 1;
        alloc::format!("s{n:06}")
    }
}
