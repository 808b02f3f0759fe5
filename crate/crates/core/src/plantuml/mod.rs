//! The use-case-diagram subset of PlantUML.
//!
//! [`render_model`] emits one frozen grammar byte for byte; [`parse_model`]
//! accepts that grammar plus the looser forms LLMs tend to produce;
//! [`lint`] never fails and reports what is wrong with arbitrary source.

use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

mod lint;
mod parse;
mod render;
mod scan;

pub use lint::lint;
pub use parse::parse_model;
pub use render::render_model;

/// The renderer's output grammar, verbatim. The model generation prompt
/// embeds this text as its knowledge block.
pub const RENDER_GRAMMAR: &str = "\
@startuml
left to right direction
actor \"<actor name>\" as <actor id>
actor \"<actor name>\" as <actor id> <<external_system>>
actor \"<actor name>\" as <actor id> <<hardware>>
rectangle \"<system name>\" {
  usecase \"<use case title>\" as <use case id>
}
<actor id> --> <use case id>
<use case id> ..> <use case id> : <<include>>
<use case id> ..> <use case id> : <<extend>>
@enduml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LintCode {
    #[serde(rename = "L-NO-START")]
    NoStart,
    #[serde(rename = "L-NO-END")]
    NoEnd,
    #[serde(rename = "L-UNDEF-REF")]
    UndefRef,
    #[serde(rename = "L-DUP-ALIAS")]
    DupAlias,
    #[serde(rename = "L-ACTOR-ACTOR")]
    ActorActor,
    #[serde(rename = "L-ORPHAN-UC")]
    OrphanUseCase,
    #[serde(rename = "L-EMPTY-NAME")]
    EmptyName,
    #[serde(rename = "L-DANGLING-REL")]
    DanglingRel,
    #[serde(rename = "L-SYNTAX")]
    Syntax,
    #[serde(rename = "L-DIRECTIVE")]
    Directive,
}

impl LintCode {
    pub const ALL: [LintCode; 10] = [
        LintCode::NoStart,
        LintCode::NoEnd,
        LintCode::UndefRef,
        LintCode::DupAlias,
        LintCode::ActorActor,
        LintCode::OrphanUseCase,
        LintCode::EmptyName,
        LintCode::DanglingRel,
        LintCode::Syntax,
        LintCode::Directive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LintCode::NoStart => "L-NO-START",
            LintCode::NoEnd => "L-NO-END",
            LintCode::UndefRef => "L-UNDEF-REF",
            LintCode::DupAlias => "L-DUP-ALIAS",
            LintCode::ActorActor => "L-ACTOR-ACTOR",
            LintCode::OrphanUseCase => "L-ORPHAN-UC",
            LintCode::EmptyName => "L-EMPTY-NAME",
            LintCode::DanglingRel => "L-DANGLING-REL",
            LintCode::Syntax => "L-SYNTAX",
            LintCode::Directive => "L-DIRECTIVE",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            LintCode::OrphanUseCase => Severity::Warning,
            LintCode::Directive => Severity::Info,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for LintCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub code: LintCode,
    pub severity: Severity,
    pub message: String,
    /// 1-based.
    pub line: usize,
}

impl LintFinding {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for LintFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {} {}", self.line, self.code, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseCode {
    #[serde(rename = "E-NO-START")]
    NoStart,
    #[serde(rename = "E-NO-END")]
    NoEnd,
    #[serde(rename = "E-UNDEF-REF")]
    UndefRef,
    #[serde(rename = "E-SYNTAX")]
    Syntax,
}

impl ParseCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseCode::NoStart => "E-NO-START",
            ParseCode::NoEnd => "E-NO-END",
            ParseCode::UndefRef => "E-UNDEF-REF",
            ParseCode::Syntax => "E-SYNTAX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{} at line {line}: {message}", code.as_str())]
pub struct ParseError {
    pub code: ParseCode,
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(code: ParseCode, line: usize, message: impl Into<String>) -> Self {
        ParseError {
            code,
            line,
            message: message.into(),
        }
    }
}
