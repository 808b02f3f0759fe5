//! Prompt templates and completion requests.
//!
//! A template combines three prompt patterns: an expert role preamble, a
//! knowledge block with reference material, and a numbered list of
//! mistakes to avoid. The four built-in templates are JSON data files under
//! `templates/` compiled into the crate.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub id: String,
    #[serde(default)]
    pub version: u32,
    pub role_preamble: String,
    #[serde(default)]
    pub knowledge_block: String,
    pub negative_constraints: Vec<String>,
    pub task_instruction: String,
    pub output_schema: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("E-UNBOUND-VAR: no value for placeholder `{0}`")]
    UnboundVar(String),
    #[error("E-UNKNOWN-VAR: variable `{0}` matches no placeholder")]
    UnknownVar(String),
    #[error("E-BAD-PLACEHOLDER: malformed placeholder at byte {0}")]
    BadPlaceholder(usize),
    #[error("E-EMPTY-TASK: task instruction is empty")]
    EmptyTask,
    #[error("E-BAD-TEMPLATE: {0}")]
    BadTemplate(String),
}

impl PromptError {
    pub fn code(&self) -> &'static str {
        match self {
            PromptError::UnboundVar(_) => "E-UNBOUND-VAR",
            PromptError::UnknownVar(_) => "E-UNKNOWN-VAR",
            PromptError::BadPlaceholder(_) => "E-BAD-PLACEHOLDER",
            PromptError::EmptyTask => "E-EMPTY-TASK",
            PromptError::BadTemplate(_) => "E-BAD-TEMPLATE",
        }
    }
}

enum Piece<'a> {
    Text(&'a str),
    Var(&'a str),
}

fn is_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

fn pieces(text: &str) -> Result<Vec<Piece<'_>>, PromptError> {
    let mut out = Vec::new();
    let mut rest = text;
    let mut offset = 0;
    while let Some(open) = rest.find("{{") {
        out.push(Piece::Text(&rest[..open]));
        let after = &rest[open + 2..];
        let close = after
            .find("}}")
            .ok_or(PromptError::BadPlaceholder(offset + open))?;
        let name = after[..close].trim();
        if !is_var_name(name) {
            return Err(PromptError::BadPlaceholder(offset + open));
        }
        out.push(Piece::Var(name));
        let consumed = open + 2 + close + 2;
        offset += consumed;
        rest = &rest[consumed..];
    }
    if rest.contains("}}") {
        return Err(PromptError::BadPlaceholder(offset + rest.find("}}").unwrap_or(0)));
    }
    out.push(Piece::Text(rest));
    Ok(out)
}

impl PromptTemplate {
    /// Placeholder names in `task_instruction`, sorted and deduplicated.
    pub fn placeholders(&self) -> Result<BTreeSet<String>, PromptError> {
        Ok(pieces(&self.task_instruction)?
            .into_iter()
            .filter_map(|p| match p {
                Piece::Var(v) => Some(String::from(v)),
                Piece::Text(_) => None,
            })
            .collect())
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.task_instruction.trim().is_empty() {
            return Err(PromptError::EmptyTask);
        }
        self.placeholders().map(|_| ())
    }

    /// Role preamble, knowledge block and the numbered constraints.
    pub fn system_message(&self) -> String {
        let mut out = String::from(self.role_preamble.trim_end());
        if !self.knowledge_block.trim().is_empty() {
            out.push_str("\n\n");
            out.push_str(self.knowledge_block.trim_end());
        }
        if !self.negative_constraints.is_empty() {
            out.push_str("\n\nAvoid the following mistakes:");
            for (i, c) in self.negative_constraints.iter().enumerate() {
                let _ = write!(out, "\n{}. {}", i + 1, c.trim());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_name: String,
}

impl CompletionRequest {
    pub fn validate(&self) -> Result<(), PromptError> {
        match self.messages.first() {
            None => Err(PromptError::BadTemplate("request has no messages".into())),
            Some(m) if m.role != Role::System => Err(PromptError::BadTemplate(
                "first message must be the system message".into(),
            )),
            _ if self.temperature.is_nan() || self.temperature < 0.0 => {
                Err(PromptError::BadTemplate("temperature must be >= 0".into()))
            }
            _ if self.max_tokens == 0 => {
                Err(PromptError::BadTemplate("max_tokens must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Fixture key: hex SHA-256 of the canonical JSON of model name,
    /// temperature and messages.
    pub fn content_hash(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            model_name: &'a str,
            temperature: f64,
            messages: &'a [Message],
        }
        let key = Key {
            model_name: &self.model_name,
            temperature: self.temperature,
            messages: &self.messages,
        };
        // serializing plain strings and a finite f64 cannot fail
        let bytes = serde_json::to_vec(&key).unwrap_or_default();
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompletionResponse {
    pub content: String,
    #[serde(default)]
    pub provider_meta: BTreeMap<String, String>,
}

impl CompletionResponse {
    pub fn text(content: impl Into<String>) -> Self {
        CompletionResponse {
            content: content.into(),
            provider_meta: BTreeMap::new(),
        }
    }
}

/// Decoding settings copied into every rendered request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSettings {
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Reject variables that match no placeholder.
    pub strict: bool,
}

impl Default for RequestSettings {
    fn default() -> Self {
        RequestSettings {
            model_name: "default".into(),
            temperature: 0.2,
            max_tokens: 2048,
            strict: true,
        }
    }
}

/// Renders `template` with `vars` into a two-message request.
///
/// Substitution is a single pass: placeholder syntax inside a substituted
/// value is left as is.
pub fn render_prompt(
    template: &PromptTemplate,
    vars: &BTreeMap<String, String>,
    settings: &RequestSettings,
) -> Result<CompletionRequest, PromptError> {
    template.validate()?;
    let parts = pieces(&template.task_instruction)?;
    let mut used = BTreeSet::new();
    let mut task = String::new();
    for p in &parts {
        match p {
            Piece::Text(t) => task.push_str(t),
            Piece::Var(v) => {
                let value = vars
                    .get(*v)
                    .ok_or_else(|| PromptError::UnboundVar(String::from(*v)))?;
                used.insert(*v);
                task.push_str(value);
            }
        }
    }
    if settings.strict {
        if let Some(extra) = vars.keys().find(|k| !used.contains(k.as_str())) {
            return Err(PromptError::UnknownVar(extra.clone()));
        }
    }
    let user = format!("{}\n\n{}", task, template.output_schema);
    Ok(CompletionRequest {
        messages: alloc::vec![Message::system(template.system_message()), Message::user(user)],
        temperature: settings.temperature,
        max_tokens: settings.max_tokens,
        model_name: settings.model_name.clone(),
    })
}

/// The four templates every pipeline needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSet {
    pub actor_extraction: PromptTemplate,
    pub usecase_extraction: PromptTemplate,
    pub model_generation: PromptTemplate,
    pub description_generation: PromptTemplate,
}

const BUILTIN_ACTOR: &str = include_str!("../templates/v1/actor_extraction.json");
const BUILTIN_USECASE: &str = include_str!("../templates/v1/usecase_extraction.json");
const BUILTIN_MODEL: &str = include_str!("../templates/v1/model_generation.json");
const BUILTIN_DESCRIPTION: &str = include_str!("../templates/v1/description_generation.json");

impl TemplateSet {
    pub fn builtin() -> Self {
        let load = |src: &str| -> PromptTemplate {
            serde_json::from_str(src).expect("built-in template files are valid JSON")
        };
        TemplateSet {
            actor_extraction: load(BUILTIN_ACTOR),
            usecase_extraction: load(BUILTIN_USECASE),
            model_generation: load(BUILTIN_MODEL),
            description_generation: load(BUILTIN_DESCRIPTION),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptTemplate> {
        [
            &self.actor_extraction,
            &self.usecase_extraction,
            &self.model_generation,
            &self.description_generation,
        ]
        .into_iter()
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        for t in self.iter() {
            t.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn template(task: &str) -> PromptTemplate {
        PromptTemplate {
            id: "t".into(),
            version: 1,
            role_preamble: "You are an expert.".into(),
            knowledge_block: String::new(),
            negative_constraints: vec!["a".into(), "b".into(), "c".into()],
            task_instruction: task.into(),
            output_schema: "Return JSON.".into(),
        }
    }

    fn vars(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (String::from(*k), String::from(*v))).collect()
    }

    #[test]
    fn no_placeholders_is_identity() {
        let t = template("List the actors.");
        let req = render_prompt(&t, &BTreeMap::new(), &RequestSettings::default()).unwrap();
        assert_eq!(req.messages[1].content, "List the actors.\n\nReturn JSON.");
        assert_eq!(req.messages[0].role, Role::System);
        assert!(req.messages[0].content.contains("1. a\n2. b\n3. c"));
    }

    #[test]
    fn substitution_is_single_pass() {
        let t = template("Text: {{ requirements }} / {{requirements}}");
        let req = render_prompt(
            &t,
            &vars(&[("requirements", "{{requirements}}")]),
            &RequestSettings::default(),
        )
        .unwrap();
        assert_eq!(req.messages[1].content, "Text: {{requirements}} / {{requirements}}\n\nReturn JSON.");
    }

    #[test]
    fn unbound_and_unknown_vars() {
        let t = template("Text: {{requirements}}");
        let s = RequestSettings::default();
        assert_eq!(
            render_prompt(&t, &BTreeMap::new(), &s).unwrap_err(),
            PromptError::UnboundVar("requirements".into())
        );
        let v = vars(&[("requirements", "x"), ("extra", "y")]);
        assert_eq!(render_prompt(&t, &v, &s).unwrap_err(), PromptError::UnknownVar("extra".into()));
        let lax = RequestSettings { strict: false, ..s };
        assert!(render_prompt(&t, &v, &lax).is_ok());
    }

    #[test]
    fn malformed_placeholders() {
        for bad in ["{{ open", "{{Bad Name}}", "stray }}", "{{}}"] {
            assert!(matches!(template(bad).validate(), Err(PromptError::BadPlaceholder(_))), "{bad}");
        }
        assert_eq!(template("  ").validate(), Err(PromptError::EmptyTask));
    }

    #[test]
    fn deterministic_and_hash_stable() {
        let t = template("Text: {{requirements}}");
        let v = vars(&[("requirements", "The clerk logs in.")]);
        let s = RequestSettings::default();
        let a = render_prompt(&t, &v, &s).unwrap();
        let b = render_prompt(&t, &v, &s).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash().len(), 64);
        let mut c = a.clone();
        c.max_tokens = 1;
        assert_eq!(a.content_hash(), c.content_hash());
        c.temperature = 0.3;
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn request_validation() {
        let mut req = render_prompt(&template("x"), &BTreeMap::new(), &RequestSettings::default()).unwrap();
        assert!(req.validate().is_ok());
        req.messages.swap(0, 1);
        assert!(req.validate().is_err());
    }

    #[test]
    fn builtin_templates_follow_the_patterns() {
        let set = TemplateSet::builtin();
        set.validate().unwrap();
        for t in set.iter() {
            assert!(
                t.system_message().contains("Act as an expert in software engineering"),
                "{}",
                t.id
            );
            assert!(t.negative_constraints.len() >= 3, "{}", t.id);
        }
        assert!(set.model_generation.knowledge_block.contains(crate::plantuml::RENDER_GRAMMAR));
        assert!(set.actor_extraction.placeholders().unwrap().contains("requirements"));
    }

    #[test]
    fn requirements_appear_once() {
        let set = TemplateSet::builtin();
        let text = "<the library lends books to members>";
        let req = render_prompt(
            &set.actor_extraction,
            &vars(&[("requirements", text)]),
            &RequestSettings::default(),
        )
        .unwrap();
        assert_eq!(req.messages[1].content.matches(text).count(), 1);
    }
}
