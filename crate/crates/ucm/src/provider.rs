//! Completion backends that need the standard library: the live HTTP
//! client, fixture directories for replay, the recording wrapper and a
//! thread-safe scripted queue.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::Deserialize;
use serde_json::json;
use ucm_core::gateway::{Fixture, GatewayError, Provider, ReplayProvider};
use ucm_core::prompt::{CompletionRequest, CompletionResponse, Role};

pub const ENV_ENDPOINT: &str = "UCM_LLM_ENDPOINT";
pub const ENV_MODEL: &str = "UCM_LLM_MODEL";
pub const ENV_API_KEY: &str = "UCM_LLM_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct LiveConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    /// Overrides the request's model name when set.
    pub model: Option<String>,
    pub api_key: Option<String>,
    pub attempts: u32,
    pub backoff_base: Duration,
    pub timeout: Duration,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: None,
            api_key: None,
            attempts: 3,
            backoff_base: Duration::from_millis(500),
            timeout: Duration::from_secs(120),
        }
    }
}

impl LiveConfig {
    /// Defaults overlaid with `UCM_LLM_*` environment variables.
    pub fn from_env() -> Self {
        let var = |k| std::env::var(k).ok().filter(|v: &String| !v.is_empty());
        let mut c = LiveConfig::default();
        if let Some(e) = var(ENV_ENDPOINT) {
            c.endpoint = e;
        }
        c.model = var(ENV_MODEL);
        c.api_key = var(ENV_API_KEY);
        c
    }
}

#[derive(Deserialize)]
struct ChatReply {
    choices: Vec<Choice>,
    #[serde(default)]
    model: Option<String>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChatMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

/// Chat-completions client. Transport failures and 5xx/429 responses are
/// retried with exponential backoff; other statuses fail at once.
#[derive(Debug, Clone)]
pub struct LiveProvider {
    config: LiveConfig,
}

enum Attempt {
    Done(CompletionResponse),
    Retry(GatewayError),
    Fail(GatewayError),
}

impl LiveProvider {
    pub fn new(config: LiveConfig) -> Self {
        LiveProvider { config }
    }

    pub fn config(&self) -> &LiveConfig {
        &self.config
    }

    fn body(&self, request: &CompletionRequest) -> serde_json::Value {
        let messages: Vec<_> = request
            .messages
            .iter()
            .map(|m| {
                let role = match m.role {
                    Role::System => "system",
                    Role::User => "user",
                };
                json!({ "role": role, "content": m.content })
            })
            .collect();
        json!({
            "model": self.config.model.as_deref().unwrap_or(&request.model_name),
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "stream": false,
        })
    }

    fn attempt(&self, client: &reqwest::blocking::Client, body: &serde_json::Value, n: u32) -> Attempt {
        let mut req = client.post(&self.config.endpoint).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) if e.is_timeout() => {
                return Attempt::Fail(GatewayError::Timeout {
                    secs: self.config.timeout.as_secs(),
                })
            }
            Err(e) => {
                return Attempt::Retry(GatewayError::Transport {
                    attempts: n,
                    message: e.to_string(),
                })
            }
        };
        let status = resp.status();
        if !status.is_success() {
            let err = GatewayError::Http {
                status: status.as_u16(),
                attempts: n,
            };
            return if status.is_server_error() || status.as_u16() == 429 {
                Attempt::Retry(err)
            } else {
                Attempt::Fail(err)
            };
        }
        match resp.json::<ChatReply>() {
            Ok(reply) => {
                let Some(choice) = reply.choices.into_iter().next() else {
                    return Attempt::Fail(GatewayError::Provider {
                        message: "reply has no choices".into(),
                    });
                };
                let mut out = CompletionResponse::text(choice.message.content);
                if let Some(m) = reply.model {
                    out.provider_meta.insert("model".into(), m);
                }
                if let Some(f) = choice.finish_reason {
                    out.provider_meta.insert("finish_reason".into(), f);
                }
                Attempt::Done(out)
            }
            Err(e) if e.is_timeout() => Attempt::Fail(GatewayError::Timeout {
                secs: self.config.timeout.as_secs(),
            }),
            Err(e) => Attempt::Fail(GatewayError::Provider {
                message: format!("unreadable reply: {e}"),
            }),
        }
    }
}

impl Provider for LiveProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        // built per call: a blocking client must not be dropped inside an
        // async runtime, and the service shares one provider across tasks
        let client = reqwest::blocking::Client::builder()
            .timeout(self.config.timeout)
            .build()
            .map_err(|e| GatewayError::Provider {
                message: e.to_string(),
            })?;
        let body = self.body(request);
        let attempts = self.config.attempts.max(1);
        let mut last = None;
        for n in 1..=attempts {
            match self.attempt(&client, &body, n) {
                Attempt::Done(r) => return Ok(r),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) => last = Some(e),
            }
            if n < attempts {
                thread::sleep(self.config.backoff_base * 2u32.pow(n - 1));
            }
        }
        Err(last.expect("at least one attempt ran"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("E-IO: {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("E-CORRUPT: fixture {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

impl FixtureError {
    pub fn code(&self) -> &'static str {
        match self {
            FixtureError::Io { .. } => "E-IO",
            FixtureError::Corrupt { .. } => "E-CORRUPT",
        }
    }
}

/// Reads every `*.json` fixture in `dir` into a replay provider. Each file's
/// stored hash must match its request.
pub fn load_fixture_dir(dir: &Path) -> Result<ReplayProvider, FixtureError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| FixtureError::Io { path, source }
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut replay = ReplayProvider::new();
    for path in paths {
        let text = fs::read_to_string(&path).map_err(io(&path))?;
        let fixture: Fixture = serde_json::from_str(&text).map_err(|e| FixtureError::Corrupt {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let actual = fixture.request.content_hash();
        if actual != fixture.hash {
            return Err(FixtureError::Corrupt {
                path,
                message: format!("stored hash {} but request hashes to {actual}", fixture.hash),
            });
        }
        replay.insert_fixture(fixture);
    }
    Ok(replay)
}

/// Passes requests to `inner` and writes each successful exchange to
/// `<dir>/<hash>.json`. Writes are serialized.
pub struct Recording<P> {
    inner: P,
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl<P> Recording<P> {
    pub fn new(inner: P, dir: impl Into<PathBuf>) -> Self {
        Recording {
            inner,
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn into_inner(self) -> P {
        self.inner
    }

    fn write(&self, fixture: &Fixture) -> std::io::Result<()> {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer_pretty(&mut tmp, fixture)?;
        std::io::Write::write_all(&mut tmp, b"\n")?;
        tmp.persist(self.dir.join(format!("{}.json", fixture.hash)))
            .map_err(|e| e.error)?;
        Ok(())
    }
}

impl<P: Provider> Provider for Recording<P> {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        let response = self.inner.complete(request)?;
        let fixture = Fixture::new(request.clone(), response.clone());
        self.write(&fixture).map_err(|e| GatewayError::Provider {
            message: format!("could not record fixture {}: {e}", fixture.hash),
        })?;
        Ok(response)
    }
}

/// Returns queued replies in order; shareable across threads.
#[derive(Debug, Default)]
pub struct ScriptedProvider {
    replies: Mutex<VecDeque<String>>,
    requests: Mutex<Vec<CompletionRequest>>,
}

impl ScriptedProvider {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(replies: I) -> Self {
        ScriptedProvider {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn push(&self, reply: impl Into<String>) {
        self.replies.lock().unwrap().push_back(reply.into());
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().unwrap().len()
    }

    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.requests.lock().unwrap().clone()
    }
}

impl Provider for ScriptedProvider {
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        self.requests.lock().unwrap().push(request.clone());
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .map(CompletionResponse::text)
            .ok_or_else(|| GatewayError::Provider {
                message: "script exhausted".into(),
            })
    }
}
