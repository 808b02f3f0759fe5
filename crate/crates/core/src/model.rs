//! Use case model types, structural validation and canonical form.
//!
//! Ids share one namespace across actors and use cases since they double as
//! PlantUML aliases. Inside a [`UseCaseModel`] the associations are the edge
//! list; each use case's `actor_ids` mirrors them exactly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::text::{collapse_ws, is_alias};

/// Half-open character range into the requirements text.
pub type SourceSpan = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorKind {
    #[default]
    Human,
    ExternalSystem,
    Hardware,
}

impl ActorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActorKind::Human => "human",
            ActorKind::ExternalSystem => "external_system",
            ActorKind::Hardware => "hardware",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().replace([' ', '-'], "_").as_str() {
            "human" | "user" | "person" => Some(ActorKind::Human),
            "external_system" | "system" | "external" => Some(ActorKind::ExternalSystem),
            "hardware" | "device" => Some(ActorKind::Hardware),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub kind: ActorKind,
    #[serde(default)]
    pub source_spans: Vec<SourceSpan>,
}

impl Actor {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Actor {
            id: id.into(),
            name: name.into(),
            kind: ActorKind::Human,
            source_spans: Vec::new(),
        }
    }

    pub fn with_kind(mut self, kind: ActorKind) -> Self {
        self.kind = kind;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseCase {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub actor_ids: Vec<String>,
    #[serde(default)]
    pub source_spans: Vec<SourceSpan>,
}

impl UseCase {
    pub fn new<I, S>(id: impl Into<String>, title: impl Into<String>, actor_ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        UseCase {
            id: id.into(),
            title: title.into(),
            actor_ids: actor_ids.into_iter().map(Into::into).collect(),
            source_spans: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Association {
    pub actor_id: String,
    pub usecase_id: String,
}

impl Association {
    pub fn new(actor_id: impl Into<String>, usecase_id: impl Into<String>) -> Self {
        Association {
            actor_id: actor_id.into(),
            usecase_id: usecase_id.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Include,
    Extend,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Include => "include",
            RelationKind::Extend => "extend",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UseCaseRelation {
    pub from_id: String,
    pub to_id: String,
    pub kind: RelationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseCaseModel {
    pub system_name: String,
    #[serde(default)]
    pub actors: Vec<Actor>,
    #[serde(default)]
    pub use_cases: Vec<UseCase>,
    #[serde(default)]
    pub associations: Vec<Association>,
    #[serde(default)]
    pub relations: Vec<UseCaseRelation>,
}

impl UseCaseModel {
    pub fn empty(system_name: impl Into<String>) -> Self {
        UseCaseModel {
            system_name: system_name.into(),
            actors: Vec::new(),
            use_cases: Vec::new(),
            associations: Vec::new(),
            relations: Vec::new(),
        }
    }

    pub fn actor(&self, id: &str) -> Option<&Actor> {
        self.actors.iter().find(|a| a.id == id)
    }

    pub fn use_case(&self, id: &str) -> Option<&UseCase> {
        self.use_cases.iter().find(|u| u.id == id)
    }

    /// Rebuilds every use case's `actor_ids` from the association list.
    pub fn sync_actor_links(&mut self) {
        let mut links: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for a in &self.associations {
            links
                .entry(a.usecase_id.as_str())
                .or_default()
                .insert(a.actor_id.as_str());
        }
        let resolved: Vec<Vec<String>> = self
            .use_cases
            .iter()
            .map(|uc| {
                links
                    .get(uc.id.as_str())
                    .map(|set| set.iter().map(|s| String::from(*s)).collect())
                    .unwrap_or_default()
            })
            .collect();
        for (uc, ids) in self.use_cases.iter_mut().zip(resolved) {
            uc.actor_ids = ids;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternativeFlow {
    pub label: String,
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UseCaseDescription {
    pub usecase_id: String,
    #[serde(default)]
    pub preconditions: Vec<String>,
    pub main_flow: Vec<String>,
    #[serde(default)]
    pub alternative_flows: Vec<AlternativeFlow>,
    #[serde(default)]
    pub postconditions: Vec<String>,
}

impl UseCaseDescription {
    /// Violations of the description invariants against its owning model.
    pub fn validate(&self, model: &UseCaseModel) -> Vec<Violation> {
        let mut out = Vec::new();
        if model.use_case(&self.usecase_id).is_none() {
            out.push(Violation::new(
                ViolationCode::RefUseCase,
                &self.usecase_id,
                "description refers to an unknown use case",
            ));
        }
        if self.main_flow.iter().all(|s| s.trim().is_empty()) {
            out.push(Violation::new(
                ViolationCode::EmptyFlow,
                &self.usecase_id,
                "main flow has no steps",
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementsDoc {
    pub id: String,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationCode {
    #[serde(rename = "E-EMPTY-SYSTEM")]
    EmptySystem,
    #[serde(rename = "E-EMPTY-NAME")]
    EmptyName,
    #[serde(rename = "E-BAD-ID")]
    BadId,
    #[serde(rename = "E-DUP-ID")]
    DupId,
    #[serde(rename = "E-REF-ACTOR")]
    RefActor,
    #[serde(rename = "E-REF-USECASE")]
    RefUseCase,
    #[serde(rename = "E-SELF-RELATION")]
    SelfRelation,
    #[serde(rename = "E-LINK-MISMATCH")]
    LinkMismatch,
    #[serde(rename = "E-SPAN-BOUNDS")]
    SpanBounds,
    #[serde(rename = "E-EMPTY-FLOW")]
    EmptyFlow,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::EmptySystem => "E-EMPTY-SYSTEM",
            ViolationCode::EmptyName => "E-EMPTY-NAME",
            ViolationCode::BadId => "E-BAD-ID",
            ViolationCode::DupId => "E-DUP-ID",
            ViolationCode::RefActor => "E-REF-ACTOR",
            ViolationCode::RefUseCase => "E-REF-USECASE",
            ViolationCode::SelfRelation => "E-SELF-RELATION",
            ViolationCode::LinkMismatch => "E-LINK-MISMATCH",
            ViolationCode::SpanBounds => "E-SPAN-BOUNDS",
            ViolationCode::EmptyFlow => "E-EMPTY-FLOW",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub element_id: String,
    pub message: String,
}

impl Violation {
    fn new(code: ViolationCode, element_id: &str, message: impl Into<String>) -> Self {
        Violation {
            code,
            element_id: element_id.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.code, self.element_id, self.message)
    }
}

/// Checks every structural invariant of `model`. Empty iff the model is valid.
pub fn validate_model<'m>(model: &'m UseCaseModel) -> Vec<Violation> {
    let mut out = Vec::new();
    if model.system_name.trim().is_empty() {
        out.push(Violation::new(
            ViolationCode::EmptySystem,
            "",
            "system boundary name is empty",
        ));
    }

    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut check_id = |id: &'m str, out: &mut Vec<Violation>| {
        if !is_alias(id) {
            out.push(Violation::new(
                ViolationCode::BadId,
                id,
                "id must match [A-Za-z_][A-Za-z0-9_]*",
            ));
        }
        if !seen.insert(id) {
            out.push(Violation::new(ViolationCode::DupId, id, "duplicate id"));
        }
    };
    for a in &model.actors {
        check_id(&a.id, &mut out);
        if a.name.trim().is_empty() {
            out.push(Violation::new(ViolationCode::EmptyName, &a.id, "actor name is empty"));
        }
        check_spans(&a.id, &a.source_spans, &mut out);
    }
    for uc in &model.use_cases {
        check_id(&uc.id, &mut out);
        if uc.title.trim().is_empty() {
            out.push(Violation::new(ViolationCode::EmptyName, &uc.id, "use case title is empty"));
        }
        check_spans(&uc.id, &uc.source_spans, &mut out);
    }

    let actor_ids: BTreeSet<&str> = model.actors.iter().map(|a| a.id.as_str()).collect();
    let uc_ids: BTreeSet<&str> = model.use_cases.iter().map(|u| u.id.as_str()).collect();

    let mut links: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for assoc in &model.associations {
        if !actor_ids.contains(assoc.actor_id.as_str()) {
            out.push(Violation::new(
                ViolationCode::RefActor,
                &assoc.actor_id,
                format!("association to unknown actor `{}`", assoc.actor_id),
            ));
        }
        if !uc_ids.contains(assoc.usecase_id.as_str()) {
            out.push(Violation::new(
                ViolationCode::RefUseCase,
                &assoc.usecase_id,
                format!("association to unknown use case `{}`", assoc.usecase_id),
            ));
        }
        links
            .entry(assoc.usecase_id.as_str())
            .or_default()
            .insert(assoc.actor_id.as_str());
    }
    for uc in &model.use_cases {
        let declared: BTreeSet<&str> = uc.actor_ids.iter().map(String::as_str).collect();
        let linked = links.get(uc.id.as_str()).cloned().unwrap_or_default();
        if declared != linked {
            out.push(Violation::new(
                ViolationCode::LinkMismatch,
                &uc.id,
                "actor_ids do not match the association list",
            ));
        }
    }

    for rel in &model.relations {
        for end in [&rel.from_id, &rel.to_id] {
            if !uc_ids.contains(end.as_str()) {
                out.push(Violation::new(
                    ViolationCode::RefUseCase,
                    end,
                    format!("{} relation endpoint `{}` is not a use case", rel.kind.as_str(), end),
                ));
            }
        }
        if rel.from_id == rel.to_id {
            out.push(Violation::new(
                ViolationCode::SelfRelation,
                &rel.from_id,
                "relation from a use case to itself",
            ));
        }
    }
    out
}

fn check_spans(id: &str, spans: &[SourceSpan], out: &mut Vec<Violation>) {
    if spans.iter().any(|&(s, e)| s > e) {
        out.push(Violation::new(ViolationCode::SpanBounds, id, "span start after end"));
    }
}

/// [`validate_model`] plus span bounds against the requirements text.
pub fn validate_model_against(model: &UseCaseModel, requirements: &str) -> Vec<Violation> {
    let mut out = validate_model(model);
    let len = requirements.chars().count();
    let spans = model
        .actors
        .iter()
        .map(|a| (&a.id, &a.source_spans))
        .chain(model.use_cases.iter().map(|u| (&u.id, &u.source_spans)));
    for (id, spans) in spans {
        if spans.iter().any(|&(_, e)| e > len) {
            out.push(Violation::new(
                ViolationCode::SpanBounds,
                id,
                "span extends past the requirements text",
            ));
        }
    }
    out
}

/// Canonical form: names collapsed, elements sorted, duplicate edges removed.
pub fn normalize(model: &UseCaseModel) -> Result<UseCaseModel, Vec<Violation>> {
    let violations = validate_model(model);
    if !violations.is_empty() {
        return Err(violations);
    }
    let mut m = model.clone();
    m.system_name = collapse_ws(&m.system_name);
    for a in &mut m.actors {
        a.name = collapse_ws(&a.name);
        a.source_spans.sort_unstable();
        a.source_spans.dedup();
    }
    for uc in &mut m.use_cases {
        uc.title = collapse_ws(&uc.title);
        uc.actor_ids.sort_unstable();
        uc.actor_ids.dedup();
        uc.source_spans.sort_unstable();
        uc.source_spans.dedup();
    }
    m.actors
        .sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.id.cmp(&b.id)));
    m.use_cases
        .sort_by(|a, b| a.title.cmp(&b.title).then_with(|| a.id.cmp(&b.id)));
    m.associations.sort_unstable();
    m.associations.dedup();
    m.relations.sort_unstable();
    m.relations.dedup();
    Ok(m)
}
