use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::edits;
use super::{
    Clock, Edit, IdSource, PipelineError, Proposal, RepairRecord, Session, Stage, StageWarning,
    Step, TimingLabel, TimingRecord,
};
use crate::eval::MatcherConfig;
use crate::gateway::{extract_fenced_block, extract_structured_block, Provider};
use crate::model::{
    normalize, Actor, ActorKind, AlternativeFlow, Association, RequirementsDoc, UseCase,
    UseCaseDescription, UseCaseModel, UseCaseRelation,
};
use crate::plantuml::{lint, parse_model, render_model, LintCode, LintFinding, ParseError};
use crate::prompt::{render_prompt, CompletionRequest, Message, RequestSettings, TemplateSet};
use crate::text::{collapse_ws, find_char_span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Puml,
    Json,
}

impl ExportFormat {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "puml" => Some(ExportFormat::Puml),
            "json" => Some(ExportFormat::Json),
            _ => None,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ActorEntry {
    Name(String),
    Full {
        name: String,
        #[serde(default)]
        kind: Option<String>,
        #[serde(default)]
        evidence: Option<String>,
    },
}

#[derive(Deserialize)]
struct UseCaseEntry {
    #[serde(alias = "name")]
    title: String,
    #[serde(default)]
    actors: Vec<String>,
    #[serde(default)]
    evidence: Option<String>,
}

#[derive(Deserialize)]
struct DescriptionEntry {
    #[serde(default)]
    preconditions: Vec<String>,
    main_flow: Vec<String>,
    #[serde(default)]
    alternative_flows: Vec<AlternativeFlow>,
    #[serde(default)]
    postconditions: Vec<String>,
}

/// Why a reply could not be used.
struct Problem {
    message: String,
    findings: Vec<LintFinding>,
    parse: Option<ParseError>,
}

impl Problem {
    fn text(message: impl ToString) -> Self {
        Problem {
            message: message.to_string(),
            findings: Vec::new(),
            parse: None,
        }
    }
}

/// The workflow engine. Holds configuration only; all state lives in the
/// [`Session`] passed to each call.
pub struct Pipeline<P, C, I> {
    provider: P,
    clock: C,
    ids: I,
    templates: TemplateSet,
    settings: RequestSettings,
    matcher: MatcherConfig,
}

impl<P: Provider, C: Clock, I: IdSource> Pipeline<P, C, I> {
    pub fn new(provider: P, clock: C, ids: I) -> Self {
        Pipeline {
            provider,
            clock,
            ids,
            templates: TemplateSet::builtin(),
            settings: RequestSettings::default(),
            matcher: MatcherConfig::default(),
        }
    }

    pub fn with_settings(mut self, settings: RequestSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_templates(mut self, templates: TemplateSet) -> Self {
        self.templates = templates;
        self
    }

    pub fn provider(&self) -> &P {
        &self.provider
    }

    pub fn start_session(&self, doc: RequirementsDoc) -> Result<Session, PipelineError> {
        if doc.text.trim().is_empty() {
            return Err(PipelineError::EmptyRequirements);
        }
        Ok(Session::new(self.ids.next_session_id(), doc))
    }

    /// Runs `step`. For descriptions, `usecase_ids = None` means every use
    /// case in the model.
    pub fn run_stage(
        &self,
        session: &mut Session,
        step: Step,
        usecase_ids: Option<&[String]>,
    ) -> Result<(), PipelineError> {
        match step {
            Step::Actors => self.run_actor_stage(session).map(drop),
            Step::Usecases => self.run_usecase_stage(session).map(drop),
            Step::Model => self.run_model_stage(session).map(drop),
            Step::Descriptions => {
                let all: Vec<String>;
                let ids = match usecase_ids {
                    Some(ids) => ids,
                    None => {
                        all = session
                            .model
                            .iter()
                            .flat_map(|m| m.use_cases.iter().map(|u| u.id.clone()))
                            .collect();
                        &all
                    }
                };
                self.run_description_stage(session, ids).map(drop)
            }
        }
    }

    pub fn run_actor_stage(&self, session: &mut Session) -> Result<Vec<Actor>, PipelineError> {
        if !matches!(session.stage, Stage::Created | Stage::ActorsProposed) {
            return Err(PipelineError::order("run the actors stage", session.stage));
        }
        let mut s = session.clone();
        self.start_timer(&mut s, Step::Actors);
        let template = &self.templates.actor_extraction;
        let request = render_prompt(
            template,
            &vars([("requirements", s.requirements.text.clone())]),
            &self.settings,
        )?;
        let entries: Vec<ActorEntry> = self.ask(&mut s, Step::Actors, &request, |c| {
            extract_structured_block(c).map_err(Problem::text)
        })?;

        let mut seen = BTreeSet::new();
        let mut actors = Vec::new();
        for entry in entries {
            let (name, kind, evidence) = match entry {
                ActorEntry::Name(n) => (n, None, None),
                ActorEntry::Full { name, kind, evidence } => (name, kind, evidence),
            };
            let name = collapse_ws(&name);
            if name.is_empty() || !seen.insert(self.key(&name)) {
                continue;
            }
            let kind = kind
                .as_deref()
                .and_then(ActorKind::from_name)
                .unwrap_or_default();
            let mut actor = Actor::new(s.next_actor_id(), name).with_kind(kind);
            actor.source_spans.extend(span_of(&s.requirements.text, evidence.as_deref()));
            actors.push(actor);
        }

        s.warnings.retain(|w| w.stage != Step::Actors);
        if actors.is_empty() {
            s.warnings.push(empty_stage(Step::Actors));
        }
        s.proposals.push(Proposal {
            stage: Step::Actors,
            element_ids: actors.iter().map(|a| a.id.clone()).collect(),
        });
        s.proposed_actors = actors.clone();
        s.stage = Stage::ActorsProposed;
        *session = s;
        Ok(actors)
    }

    pub fn run_usecase_stage(&self, session: &mut Session) -> Result<Vec<UseCase>, PipelineError> {
        if !matches!(session.stage, Stage::ActorsConfirmed | Stage::UsecasesProposed) {
            return Err(PipelineError::order("run the usecases stage", session.stage));
        }
        let mut s = session.clone();
        self.start_timer(&mut s, Step::Usecases);
        let actor_list = s
            .confirmed_actors
            .iter()
            .map(|a| format!("- {}", a.name))
            .collect::<Vec<_>>()
            .join("\n");
        let request = render_prompt(
            &self.templates.usecase_extraction,
            &vars([
                ("actors", actor_list),
                ("requirements", s.requirements.text.clone()),
            ]),
            &self.settings,
        )?;
        let entries: Vec<UseCaseEntry> = self.ask(&mut s, Step::Usecases, &request, |c| {
            extract_structured_block(c).map_err(Problem::text)
        })?;

        let by_name: BTreeMap<String, String> = s
            .confirmed_actors
            .iter()
            .map(|a| (self.key(&a.name), a.id.clone()))
            .collect();
        let mut warnings = Vec::new();
        let mut by_title: BTreeMap<String, usize> = BTreeMap::new();
        let mut use_cases: Vec<UseCase> = Vec::new();
        for entry in entries {
            let title = collapse_ws(&entry.title);
            if title.is_empty() {
                continue;
            }
            let mut known = BTreeSet::new();
            let mut unknown = Vec::new();
            for name in &entry.actors {
                match by_name.get(&self.key(name)) {
                    Some(id) => {
                        known.insert(id.clone());
                    }
                    None => unknown.push(collapse_ws(name)),
                }
            }
            if known.is_empty() {
                let message = if unknown.is_empty() {
                    format!("dropped use case \"{title}\": it names no actor")
                } else {
                    format!(
                        "dropped use case \"{title}\": it names only unknown actors ({})",
                        unknown.join(", ")
                    )
                };
                warnings.push(warning(Step::Usecases, "W-UNKNOWN-ACTOR", None, message));
                continue;
            }
            let key = self.key(&title);
            let index = match by_title.get(&key) {
                Some(&i) => {
                    let uc = &mut use_cases[i];
                    for id in known {
                        if !uc.actor_ids.contains(&id) {
                            uc.actor_ids.push(id);
                        }
                    }
                    i
                }
                None => {
                    let mut uc = UseCase::new(s.next_usecase_id(), title.clone(), known);
                    uc.source_spans.extend(span_of(&s.requirements.text, entry.evidence.as_deref()));
                    use_cases.push(uc);
                    by_title.insert(key, use_cases.len() - 1);
                    use_cases.len() - 1
                }
            };
            if !unknown.is_empty() {
                let id = use_cases[index].id.clone();
                let message = format!(
                    "use case \"{title}\" also named unknown actors ({}); those links were dropped",
                    unknown.join(", ")
                );
                warnings.push(warning(Step::Usecases, "W-UNKNOWN-ACTOR", Some(id), message));
            }
        }

        s.warnings.retain(|w| w.stage != Step::Usecases);
        if use_cases.is_empty() {
            warnings.push(empty_stage(Step::Usecases));
        }
        s.warnings.extend(warnings);
        s.proposals.push(Proposal {
            stage: Step::Usecases,
            element_ids: use_cases.iter().map(|u| u.id.clone()).collect(),
        });
        s.proposed_usecases = use_cases.clone();
        s.stage = Stage::UsecasesProposed;
        edits::refresh_flags(&mut s);
        *session = s;
        Ok(use_cases)
    }

    pub fn run_model_stage(
        &self,
        session: &mut Session,
    ) -> Result<(String, UseCaseModel), PipelineError> {
        if !matches!(session.stage, Stage::UsecasesConfirmed | Stage::ModelProposed) {
            return Err(PipelineError::order("run the model stage", session.stage));
        }
        let mut s = session.clone();
        self.start_timer(&mut s, Step::Model);
        let system_name = match s.requirements.title.trim() {
            "" => String::from("System"),
            t => collapse_ws(t),
        };
        let actor_list = s
            .confirmed_actors
            .iter()
            .map(|a| format!("- {}: \"{}\" ({})", a.id, a.name, a.kind.as_str()))
            .collect::<Vec<_>>()
            .join("\n");
        let usecase_list = s
            .confirmed_usecases
            .iter()
            .map(|u| {
                let links = if u.actor_ids.is_empty() {
                    String::from("none")
                } else {
                    u.actor_ids.join(", ")
                };
                format!("- {}: \"{}\" (actors: {})", u.id, u.title, links)
            })
            .collect::<Vec<_>>()
            .join("\n");
        let request = render_prompt(
            &self.templates.model_generation,
            &vars([
                ("system_name", system_name),
                ("actors", actor_list),
                ("usecases", usecase_list),
            ]),
            &self.settings,
        )?;
        let parsed = self.ask(&mut s, Step::Model, &request, check_diagram)?;

        let (model, mut warnings) = self.reconcile(&s, &parsed)?;
        let source = render_model(&model).map_err(PipelineError::InvalidModel)?;
        warnings.extend(lint_warnings(&source));
        s.warnings.retain(|w| w.stage != Step::Model);
        s.warnings.extend(warnings);
        s.model_source = Some(source.clone());
        s.model = Some(model.clone());
        s.stage = Stage::ModelProposed;
        *session = s;
        Ok((source, model))
    }

    pub fn run_description_stage(
        &self,
        session: &mut Session,
        usecase_ids: &[String],
    ) -> Result<Vec<UseCaseDescription>, PipelineError> {
        if !matches!(session.stage, Stage::ModelConfirmed | Stage::DescriptionsDone) {
            return Err(PipelineError::order("run the descriptions stage", session.stage));
        }
        let model = session.model.clone().ok_or(PipelineError::NoModel)?;
        for id in usecase_ids {
            if model.use_case(id).is_none() {
                return Err(PipelineError::UnknownUseCase(id.clone()));
            }
        }
        let mut s = session.clone();
        self.start_timer(&mut s, Step::Descriptions);
        let mut out = Vec::new();
        for id in usecase_ids {
            let uc = model.use_case(id).expect("checked above");
            let actors = uc
                .actor_ids
                .iter()
                .filter_map(|a| model.actor(a))
                .map(|a| a.name.as_str())
                .collect::<Vec<_>>()
                .join(", ");
            let request = render_prompt(
                &self.templates.description_generation,
                &vars([
                    ("usecase_id", uc.id.clone()),
                    ("usecase_title", uc.title.clone()),
                    ("actors", actors),
                    ("requirements", s.requirements.text.clone()),
                ]),
                &self.settings,
            )?;
            let entry: DescriptionEntry = self.ask(&mut s, Step::Descriptions, &request, |c| {
                let e: DescriptionEntry = extract_structured_block(c).map_err(Problem::text)?;
                if e.main_flow.iter().all(|step| step.trim().is_empty()) {
                    return Err(Problem::text("main_flow must contain at least one step"));
                }
                Ok(e)
            })?;
            let description = UseCaseDescription {
                usecase_id: id.clone(),
                preconditions: entry.preconditions,
                main_flow: entry.main_flow,
                alternative_flows: entry.alternative_flows,
                postconditions: entry.postconditions,
            };
            match s.descriptions.iter_mut().find(|d| d.usecase_id == *id) {
                Some(d) => *d = description.clone(),
                None => s.descriptions.push(description.clone()),
            }
            out.push(description);
        }
        s.stage = Stage::DescriptionsDone;
        self.stop_timer(&mut s, Step::Descriptions);
        *session = s;
        Ok(out)
    }

    /// Accepts the current proposal: `*_proposed` becomes `*_confirmed`.
    pub fn confirm(&self, session: &mut Session) -> Result<(), PipelineError> {
        match session.stage {
            Stage::ActorsProposed => {
                if session.proposed_actors.is_empty() {
                    return Err(PipelineError::NothingToConfirm(Step::Actors));
                }
                session.confirmed_actors = session.proposed_actors.clone();
                session.stage = Stage::ActorsConfirmed;
                self.stop_timer(session, Step::Actors);
            }
            Stage::UsecasesProposed => {
                if session.proposed_usecases.is_empty() {
                    return Err(PipelineError::NothingToConfirm(Step::Usecases));
                }
                session.confirmed_usecases = session.proposed_usecases.clone();
                session.stage = Stage::UsecasesConfirmed;
                edits::refresh_flags(session);
                self.stop_timer(session, Step::Usecases);
            }
            Stage::ModelProposed => {
                session.stage = Stage::ModelConfirmed;
                self.stop_timer(session, Step::Model);
            }
            stage => return Err(PipelineError::order("confirm", stage)),
        }
        Ok(())
    }

    /// Applies `batch` in order. Either every edit applies or the session
    /// is left untouched.
    pub fn apply_edits(&self, session: &mut Session, batch: &[Edit]) -> Result<(), PipelineError> {
        let mut s = session.clone();
        let mut model_touched = false;
        for edit in batch {
            let logged = edits::apply(&mut s, edit, &self.matcher)?;
            model_touched |= edit.stage == Step::Model;
            s.edit_log.push(logged);
        }
        if model_touched {
            let model = s.model.as_mut().ok_or(PipelineError::NoModel)?;
            model.sync_actor_links();
            let model = normalize(model).map_err(PipelineError::InvalidModel)?;
            let source = render_model(&model).map_err(PipelineError::InvalidModel)?;
            s.warnings
                .retain(|w| !(w.stage == Step::Model && w.code == LintCode::OrphanUseCase.as_str()));
            s.warnings.extend(lint_warnings(&source));
            s.model_source = Some(source);
            s.model = Some(model);
        }
        edits::refresh_flags(&mut s);
        *session = s;
        Ok(())
    }

    fn key(&self, name: &str) -> String {
        name_key(&self.matcher, name)
    }

    /// Sends `request`; if `check` rejects the reply, sends exactly one
    /// corrective re-prompt quoting the reply and the problem.
    fn ask<T>(
        &self,
        s: &mut Session,
        stage: Step,
        request: &CompletionRequest,
        check: impl Fn(&str) -> Result<T, Problem>,
    ) -> Result<T, PipelineError> {
        let first = self.provider.complete(request)?;
        let problem = match check(&first.content) {
            Ok(v) => return Ok(v),
            Err(p) => p,
        };
        s.repairs.push(RepairRecord {
            stage,
            problem: problem.message.clone(),
        });
        let mut retry = request.clone();
        retry.messages.push(Message::user(format!(
            "Your previous answer could not be used.\n\nProblem:\n{}\n\nPrevious answer:\n{}\n\nAnswer again and follow the required output format exactly.",
            problem.message, first.content
        )));
        let second = self.provider.complete(&retry)?;
        check(&second.content).map_err(|p| match p.parse {
            Some(e) if p.findings.is_empty() => PipelineError::Parse(e),
            _ => PipelineError::RepairFailed {
                stage,
                message: p.message,
                findings: p.findings,
            },
        })
    }

    /// Maps the generated diagram onto the confirmed elements.
    fn reconcile(
        &self,
        s: &Session,
        parsed: &UseCaseModel,
    ) -> Result<(UseCaseModel, Vec<StageWarning>), PipelineError> {
        let mut warnings = Vec::new();
        let actor_by_key: BTreeMap<String, &str> = s
            .confirmed_actors
            .iter()
            .map(|a| (self.key(&a.name), a.id.as_str()))
            .collect();
        let uc_by_key: BTreeMap<String, &str> = s
            .confirmed_usecases
            .iter()
            .map(|u| (self.key(&u.title), u.id.as_str()))
            .collect();

        let mut ids: BTreeMap<&str, &str> = BTreeMap::new();
        for a in &parsed.actors {
            match actor_by_key.get(&self.key(&a.name)) {
                Some(id) => {
                    ids.insert(a.id.as_str(), id);
                }
                None => warnings.push(warning(
                    Step::Model,
                    "W-EXTRA-ELEMENT",
                    Some(a.id.clone()),
                    format!("actor \"{}\" is not a confirmed actor and was dropped", a.name),
                )),
            }
        }
        for u in &parsed.use_cases {
            match uc_by_key.get(&self.key(&u.title)) {
                Some(id) => {
                    ids.insert(u.id.as_str(), id);
                }
                None => warnings.push(warning(
                    Step::Model,
                    "W-EXTRA-ELEMENT",
                    Some(u.id.clone()),
                    format!("use case \"{}\" is not a confirmed use case and was dropped", u.title),
                )),
            }
        }
        let matched: BTreeSet<&str> = ids.values().copied().collect();
        for a in &s.confirmed_actors {
            if !matched.contains(a.id.as_str()) {
                warnings.push(warning(
                    Step::Model,
                    "W-MISSING-ELEMENT",
                    Some(a.id.clone()),
                    format!("actor \"{}\" was missing from the diagram and was restored", a.name),
                ));
            }
        }
        for u in &s.confirmed_usecases {
            if !matched.contains(u.id.as_str()) {
                warnings.push(warning(
                    Step::Model,
                    "W-MISSING-ELEMENT",
                    Some(u.id.clone()),
                    format!("use case \"{}\" was missing from the diagram and was restored", u.title),
                ));
            }
        }

        let actor_ids: BTreeSet<&str> = s.confirmed_actors.iter().map(|a| a.id.as_str()).collect();
        let mut associations: BTreeSet<Association> = BTreeSet::new();
        for u in &s.confirmed_usecases {
            for a in u.actor_ids.iter().filter(|a| actor_ids.contains(a.as_str())) {
                associations.insert(Association::new(a.as_str(), u.id.as_str()));
            }
        }
        for e in &parsed.associations {
            if let (Some(a), Some(u)) = (ids.get(e.actor_id.as_str()), ids.get(e.usecase_id.as_str())) {
                associations.insert(Association::new(*a, *u));
            }
        }
        let mut relations = Vec::new();
        for r in &parsed.relations {
            if let (Some(from), Some(to)) = (ids.get(r.from_id.as_str()), ids.get(r.to_id.as_str())) {
                if from != to {
                    relations.push(UseCaseRelation {
                        from_id: String::from(*from),
                        to_id: String::from(*to),
                        kind: r.kind,
                    });
                }
            }
        }

        let mut model = UseCaseModel {
            system_name: parsed.system_name.clone(),
            actors: s.confirmed_actors.clone(),
            use_cases: s.confirmed_usecases.clone(),
            associations: associations.into_iter().collect(),
            relations,
        };
        model.sync_actor_links();
        let model = normalize(&model).map_err(PipelineError::InvalidModel)?;
        Ok((model, warnings))
    }

    fn start_timer(&self, s: &mut Session, step: Step) {
        let label = TimingLabel::from(step);
        if s.timing(label).is_none() {
            let record = TimingRecord {
                label,
                started_at: self.clock.now_ms(),
                ended_at: None,
                minutes: None,
            };
            let at = s
                .timings
                .iter()
                .position(|t| t.label == TimingLabel::Total)
                .unwrap_or(s.timings.len());
            s.timings.insert(at, record);
        }
    }

    fn stop_timer(&self, s: &mut Session, step: Step) {
        let now = self.clock.now_ms();
        let label = TimingLabel::from(step);
        if let Some(t) = s.timings.iter_mut().find(|t| t.label == label) {
            let end = now.max(t.started_at);
            t.ended_at = Some(end);
            t.minutes = Some((end - t.started_at) as f64 / 60_000.0);
        }
        update_total(s);
    }
}

/// Renders the session as `.puml` (the model) or canonical JSON.
pub fn export_session(session: &Session, format: ExportFormat) -> Result<String, PipelineError> {
    match format {
        ExportFormat::Puml => {
            let model = session.model.as_ref().ok_or(PipelineError::NoModel)?;
            render_model(model).map_err(PipelineError::InvalidModel)
        }
        ExportFormat::Json => {
            Ok(serde_json::to_string_pretty(session).expect("session serializes to JSON"))
        }
    }
}

impl<P, C, I> Pipeline<P, C, I> {
    pub fn export_session(&self, session: &Session, format: ExportFormat) -> Result<String, PipelineError> {
        export_session(session, format)
    }
}

/// Normalized comparison key; falls back to the lowercased name when the
/// normalizer strips everything (a name made only of stopwords).
pub(crate) fn name_key(matcher: &MatcherConfig, name: &str) -> String {
    let k = matcher.normalize_name(name);
    if k.is_empty() {
        collapse_ws(name).to_lowercase()
    } else {
        k
    }
}

fn check_diagram(content: &str) -> Result<UseCaseModel, Problem> {
    let source = match extract_fenced_block(content) {
        Ok(block) => String::from(block.body),
        Err(_) => String::from(content),
    };
    let errors: Vec<LintFinding> = lint(&source).into_iter().filter(LintFinding::is_error).collect();
    let parsed = parse_model(&source);
    if !errors.is_empty() {
        let mut message = String::from("the diagram has lint errors:");
        for f in &errors {
            message.push_str(&format!("\n- {f}"));
        }
        return Err(Problem {
            message,
            findings: errors,
            parse: parsed.err(),
        });
    }
    parsed.map_err(|e| Problem {
        message: e.to_string(),
        findings: Vec::new(),
        parse: Some(e),
    })
}

fn lint_warnings(source: &str) -> Vec<StageWarning> {
    lint(source)
        .into_iter()
        .filter(|f| f.code == LintCode::OrphanUseCase)
        .map(|f| warning(Step::Model, f.code.as_str(), None, format!("line {}: {}", f.line, f.message)))
        .collect()
}

fn update_total(s: &mut Session) {
    s.timings.retain(|t| t.label != TimingLabel::Total);
    let done: Vec<&TimingRecord> = s.timings.iter().filter(|t| t.ended_at.is_some()).collect();
    if done.is_empty() {
        return;
    }
    let started_at = done.iter().map(|t| t.started_at).min().unwrap_or(0);
    let ended_at = done.iter().filter_map(|t| t.ended_at).max();
    let minutes = done.iter().filter_map(|t| t.minutes).sum();
    s.timings.push(TimingRecord {
        label: TimingLabel::Total,
        started_at,
        ended_at,
        minutes: Some(minutes),
    });
}

fn vars<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (String::from(k), v)).collect()
}

fn span_of(text: &str, evidence: Option<&str>) -> Option<(usize, usize)> {
    find_char_span(text, evidence?.trim())
}

fn warning(stage: Step, code: &str, element_id: Option<String>, message: String) -> StageWarning {
    StageWarning {
        stage,
        code: String::from(code),
        element_id,
        message,
    }
}

fn empty_stage(stage: Step) -> StageWarning {
    warning(stage, "W-EMPTY-STAGE", None, format!("the {stage} stage proposed nothing"))
}
