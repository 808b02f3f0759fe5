#![allow(dead_code)]

pub mod fuzz;
pub mod gen;

use std::cell::RefCell;
use std::collections::VecDeque;

use ucm_core::gateway::{GatewayError, Provider};
use ucm_core::model::{Actor, ActorKind, UseCase, UseCaseModel};
use ucm_core::pipeline::{SequentialIds, StepClock};
use ucm_core::prompt::{CompletionRequest, CompletionResponse};
use ucm_core::{render_model, Association, Pipeline, RequirementsDoc};

pub const REQUIREMENTS: &str = "Customers browse the catalog and place orders. \
An administrator maintains the catalog. The payment gateway authorizes card payments.";

pub fn doc() -> RequirementsDoc {
    RequirementsDoc {
        id: "shop".into(),
        title: "Web Shop".into(),
        text: REQUIREMENTS.into(),
    }
}

pub fn json_block(body: &str) -> String {
    format!("```json\n{body}\n```")
}

pub fn puml_block(body: &str) -> String {
    format!("Here is the diagram.\n\n```plantuml\n{body}```\n")
}

/// Replies with queued strings in order and records every request.
#[derive(Default)]
pub struct Scripted {
    replies: RefCell<VecDeque<String>>,
    pub requests: RefCell<Vec<CompletionRequest>>,
}

impl Scripted {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(replies: I) -> Self {
        Scripted {
            replies: RefCell::new(replies.into_iter().map(Into::into).collect()),
            requests: RefCell::new(Vec::new()),
        }
    }

    pub fn push(&self, reply: impl Into<String>) {
        self.replies.borrow_mut().push_back(reply.into());
    }

    pub fn last_user_message(&self) -> String {
        let reqs = self.requests.borrow();
        reqs.last().unwrap().messages.last().unwrap().content.clone()
    }
}

impl Provider for Scripted {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        self.requests.borrow_mut().push(request.clone());
        match self.replies.borrow_mut().pop_front() {
            Some(r) => Ok(CompletionResponse::text(r)),
            None => Err(GatewayError::Provider {
                message: "script exhausted".into(),
            }),
        }
    }
}

/// Answers every stage prompt with a well-formed reply derived from the
/// prompt itself, so any legal action sequence can run to completion.
pub struct Responder;

fn quoted(line: &str) -> Option<&str> {
    let start = line.find('"')? + 1;
    let end = start + line[start..].find('"')?;
    Some(&line[start..end])
}

impl Provider for Responder {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        let user = &request.messages[1].content;
        let reply = if user.starts_with("Identify all actors") {
            json_block(
                r#"[{"name": "Customer", "kind": "human", "evidence": "Customers"},
                    {"name": "Administrator", "kind": "human"},
                    {"name": "Payment gateway", "kind": "external_system"}]"#,
            )
        } else if user.contains("Extract only the use cases") {
            let actors: Vec<&str> = user
                .lines()
                .skip_while(|l| !l.starts_with("The following actors"))
                .skip(1)
                .take_while(|l| l.starts_with("- "))
                .map(|l| &l[2..])
                .collect();
            let entries: Vec<String> = actors
                .iter()
                .enumerate()
                .map(|(i, a)| format!(r#"{{"title": "Goal {i} of {a}", "actors": ["{a}"]}}"#))
                .collect();
            json_block(&format!("[{}]", entries.join(", ")))
        } else if user.starts_with("Generate the use case diagram") {
            let mut m = UseCaseModel::empty(quoted(user).unwrap_or("System"));
            for line in user.lines().filter(|l| l.starts_with("- ")) {
                let id = line[2..].split(':').next().unwrap().to_string();
                let name = quoted(line).unwrap_or("?").to_string();
                if let Some(links) = line.split("(actors: ").nth(1) {
                    let links = links.trim_end_matches(')');
                    let ids: Vec<String> = if links == "none" {
                        vec![]
                    } else {
                        links.split(", ").map(String::from).collect()
                    };
                    for a in &ids {
                        m.associations.push(Association::new(a.as_str(), id.as_str()));
                    }
                    m.use_cases.push(UseCase::new(id, name, ids));
                } else {
                    let kind = line
                        .rsplit('(')
                        .next()
                        .and_then(|k| ActorKind::from_name(k.trim_end_matches(')')))
                        .unwrap_or_default();
                    m.actors.push(Actor::new(id, name).with_kind(kind));
                }
            }
            puml_block(&render_model(&m).expect("responder builds valid models"))
        } else if user.starts_with("Write the use case description") {
            json_block(
                r#"{"preconditions": ["The actor is signed in."],
                    "main_flow": ["The actor starts the use case.", "The system completes it."],
                    "alternative_flows": [{"label": "1a", "steps": ["The actor cancels."]}],
                    "postconditions": ["The goal is reached."]}"#,
            )
        } else {
            return Err(GatewayError::Provider {
                message: "unrecognized prompt".into(),
            });
        };
        Ok(CompletionResponse::text(reply))
    }
}

pub type TestPipeline<P> = Pipeline<P, StepClock, SequentialIds>;

/// Pipeline with a clock that advances one minute per reading.
pub fn pipeline<P: Provider>(provider: P) -> TestPipeline<P> {
    Pipeline::new(provider, StepClock::new(1_700_000_000_000, 60_000), SequentialIds::new())
}
