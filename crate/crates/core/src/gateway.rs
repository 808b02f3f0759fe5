//! Provider contract, the in-memory replay provider and structured-block
//! extraction from model replies.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::prompt::{CompletionRequest, CompletionResponse};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "code")]
pub enum GatewayError {
    #[serde(rename = "E-TRANSPORT")]
    #[error("E-TRANSPORT: {message} (after {attempts} attempts)")]
    Transport { attempts: u32, message: String },
    #[serde(rename = "E-HTTP")]
    #[error("E-HTTP({status}) after {attempts} attempts")]
    Http { status: u16, attempts: u32 },
    #[serde(rename = "E-TIMEOUT")]
    #[error("E-TIMEOUT: no response within {secs} s")]
    Timeout { secs: u64 },
    #[serde(rename = "E-NO-FIXTURE")]
    #[error("E-NO-FIXTURE: no recorded response for request {hash}")]
    NoFixture { hash: String },
    #[serde(rename = "E-PROVIDER")]
    #[error("E-PROVIDER: {message}")]
    Provider { message: String },
}

impl GatewayError {
    pub fn code(&self) -> &'static str {
        match self {
            GatewayError::Transport { .. } => "E-TRANSPORT",
            GatewayError::Http { .. } => "E-HTTP",
            GatewayError::Timeout { .. } => "E-TIMEOUT",
            GatewayError::NoFixture { .. } => "E-NO-FIXTURE",
            GatewayError::Provider { .. } => "E-PROVIDER",
        }
    }
}

/// A completion backend. Implementations used by the service must also be
/// `Send + Sync`.
pub trait Provider {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError>;
}

impl<P: Provider + ?Sized> Provider for &P {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        (**self).complete(request)
    }
}

impl<P: Provider + ?Sized> Provider for Box<P> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        (**self).complete(request)
    }
}

impl<P: Provider + ?Sized> Provider for Arc<P> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        (**self).complete(request)
    }
}

/// One recorded exchange, stored as `<hash>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub hash: String,
    pub request: CompletionRequest,
    pub response: CompletionResponse,
}

impl Fixture {
    pub fn new(request: CompletionRequest, response: CompletionResponse) -> Self {
        Fixture {
            hash: request.content_hash(),
            request,
            response,
        }
    }
}

/// Answers requests from recorded fixtures keyed by request hash.
#[derive(Debug, Clone, Default)]
pub struct ReplayProvider {
    fixtures: BTreeMap<String, CompletionResponse>,
}

impl ReplayProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, request: &CompletionRequest, response: CompletionResponse) {
        self.fixtures.insert(request.content_hash(), response);
    }

    pub fn insert_fixture(&mut self, fixture: Fixture) {
        self.fixtures.insert(fixture.hash, fixture.response);
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }
}

impl FromIterator<Fixture> for ReplayProvider {
    fn from_iter<I: IntoIterator<Item = Fixture>>(iter: I) -> Self {
        let mut p = ReplayProvider::new();
        for f in iter {
            p.insert_fixture(f);
        }
        p
    }
}

impl Provider for ReplayProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        let hash = request.content_hash();
        self.fixtures
            .get(&hash)
            .cloned()
            .ok_or(GatewayError::NoFixture { hash })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "code")]
pub enum ExtractError {
    #[serde(rename = "E-NO-BLOCK")]
    #[error("E-NO-BLOCK: reply contains no fenced code block")]
    NoBlock,
    #[serde(rename = "E-MALFORMED")]
    #[error("E-MALFORMED at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
}

impl ExtractError {
    pub fn code(&self) -> &'static str {
        match self {
            ExtractError::NoBlock => "E-NO-BLOCK",
            ExtractError::Malformed { .. } => "E-MALFORMED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FencedBlock<'a> {
    /// Info string after the opening fence, e.g. `json`.
    pub lang: &'a str,
    pub body: &'a str,
    /// 1-based line of the first body line within the reply.
    pub first_line: usize,
}

/// Finds the first ```` ``` ```` fenced block in `content`.
pub fn extract_fenced_block(content: &str) -> Result<FencedBlock<'_>, ExtractError> {
    let mut offset = 0;
    let mut open: Option<(&str, usize, usize)> = None;
    for (idx, line) in content.split_inclusive('\n').enumerate() {
        let trimmed = line.trim();
        match open {
            None if trimmed.starts_with("```") => {
                let lang = trimmed.trim_start_matches('`').trim();
                open = Some((lang, offset + line.len(), idx + 2));
            }
            Some((lang, body_start, first_line)) if trimmed.starts_with("```") => {
                let body = content[body_start..offset].trim_end_matches(['\n', '\r']);
                return Ok(FencedBlock {
                    lang,
                    body,
                    first_line,
                });
            }
            _ => {}
        }
        offset += line.len();
    }
    match open {
        None => Err(ExtractError::NoBlock),
        Some((_, _, first_line)) => Err(ExtractError::Malformed {
            line: first_line - 1,
            column: 1,
            message: "code fence is never closed".into(),
        }),
    }
}

/// Parses the first fenced block of `content` as JSON into `T`.
pub fn extract_structured_block<T: DeserializeOwned>(content: &str) -> Result<T, ExtractError> {
    let block = extract_fenced_block(content)?;
    serde_json::from_str(block.body).map_err(|e| ExtractError::Malformed {
        line: block.first_line + e.line().saturating_sub(1),
        column: e.column(),
        message: strip_position(&alloc::format!("{e}")),
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => String::from(&msg[..i]),
        None => String::from(msg),
    }
}
