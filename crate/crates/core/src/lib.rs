//! Core of the use case modeling workbench.
//!
//! Everything in this crate is pure computation over owned values: the use
//! case model and its validation, the PlantUML subset (render, parse, lint),
//! prompt templates and the provider contract, the staged pipeline engine,
//! model scoring and the small-sample statistics. IO lives in the `ucm`
//! companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod eval;
pub mod gateway;
pub mod model;
pub mod pipeline;
pub mod plantuml;
pub mod prompt;
pub mod stats;
mod text;

pub use eval::{align_elements, score_model, Alignment, EvalReport, MatcherConfig, Metrics};
pub use gateway::{
    extract_fenced_block, extract_structured_block, Fixture, GatewayError, Provider,
    ReplayProvider,
};
pub use model::{
    normalize, validate_model, Actor, ActorKind, Association, RelationKind, RequirementsDoc,
    UseCase, UseCaseDescription, UseCaseModel, UseCaseRelation, Violation, ViolationCode,
};
pub use pipeline::{Edit, Pipeline, PipelineError, Session, Stage, Step};
pub use plantuml::{lint, parse_model, render_model, LintCode, LintFinding, ParseError};
pub use prompt::{render_prompt, CompletionRequest, CompletionResponse, PromptTemplate};
