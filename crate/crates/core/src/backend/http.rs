//! Minimal JSON log-prob protocol.
//!
//! * `POST /v1/score` `{"prefix", "continuation"}` →
//!   `{"tokens": [{"surface", "logprob", "start"?, "end"?}], "model"}`
//! * `POST /v1/next` `{"context", "top_k"}` → `{"entries": [{"surface", "id", "logprob"}]}`
//! * `POST /v1/tokenize` `{"text"}` → `{"tokens": [{"id", "surface", "start", "end"}]}`
//!
//! A 413 status with `{"tokens", "limit"}` signals an over-long context.

use std::net::SocketAddr;
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{LanguageModel, ScoredToken, Token, VocabLogProbs};
use crate::error::{Error, Result};

/// Environment variable overriding the request timeout, in milliseconds.
pub const TIMEOUT_ENV: &str = "SH2_HTTP_TIMEOUT_MS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    pub base_url: String,
    pub timeout_ms: u64,
    /// Extra attempts after the first failed one.
    pub retries: u32,
    pub backoff_ms: u64,
    pub max_in_flight: usize,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            base_url: String::new(),
            timeout_ms: 30_000,
            retries: 2,
            backoff_ms: 100,
            max_in_flight: 4,
        }
    }
}

impl HttpConfig {
    pub fn from_env(base_url: &str) -> Self {
        let mut cfg = Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            ..Self::default()
        };
        if let Some(ms) = std::env::var(TIMEOUT_ENV).ok().and_then(|v| v.parse().ok()) {
            cfg.timeout_ms = ms;
        }
        cfg
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ScoreRequest {
    pub prefix: String,
    pub continuation: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct WireScoredToken {
    pub surface: String,
    pub logprob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct ScoreResponse {
    pub tokens: Vec<WireScoredToken>,
    pub model: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct NextRequest {
    pub context: String,
    pub top_k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct NextEntry {
    pub surface: String,
    pub id: u32,
    pub logprob: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct NextResponse {
    pub entries: Vec<NextEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct TokenizeRequest {
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct TokenizeResponse {
    pub tokens: Vec<Token>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ErrorBody {
    error: String,
    #[serde(default)]
    tokens: Option<usize>,
    #[serde(default)]
    limit: Option<usize>,
}

/// Counting semaphore capping concurrent requests.
#[derive(Debug)]
struct InFlight {
    free: Mutex<usize>,
    cv: Condvar,
}

impl InFlight {
    fn acquire(&self) -> InFlightGuard<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        InFlightGuard(self)
    }
}

struct InFlightGuard<'a>(&'a InFlight);

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

/// Blocking client for the log-prob protocol.
pub struct HttpBackend {
    config: HttpConfig,
    agent: ureq::Agent,
    in_flight: InFlight,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend").field("config", &self.config).finish()
    }
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self> {
        if config.base_url.is_empty() {
            return Err(Error::Config("http backend needs a base url".into()));
        }
        if config.max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be >= 1".into()));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            in_flight: InFlight {
                free: Mutex::new(config.max_in_flight),
                cv: Condvar::new(),
            },
            config,
            agent,
        })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(&self, path: &str, body: &Req) -> Result<Resp> {
        let url = format!("{}{}", self.config.base_url, path);
        let mut attempt = 0;
        loop {
            let result = {
                let _slot = self.in_flight.acquire();
                self.post_once(&url, body)
            };
            match result {
                Err(e) if e.is_transient() && attempt < self.config.retries => {
                    let wait = self.config.backoff_ms << attempt;
                    log::warn!("{url}: {e}; retrying in {wait} ms");
                    std::thread::sleep(Duration::from_millis(wait));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn post_once<Req: Serialize, Resp: DeserializeOwned>(&self, url: &str, body: &Req) -> Result<Resp> {
        let mut resp = self
            .agent
            .post(url)
            .send_json(body)
            .map_err(|e| Error::BackendUnavailable(format!("{url}: {e}")))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::BackendUnavailable(format!("{url}: {e}")))?;
        match status {
            200..=299 => serde_json::from_str(&text)
                .map_err(|e| Error::Protocol(format!("{url}: bad response body: {e}"))),
            413 => {
                let body: Option<ErrorBody> = serde_json::from_str(&text).ok();
                Err(Error::ContextLengthExceeded {
                    tokens: body.as_ref().and_then(|b| b.tokens).unwrap_or(0),
                    limit: body.as_ref().and_then(|b| b.limit).unwrap_or(0),
                })
            }
            500..=599 => Err(Error::BackendUnavailable(format!("{url}: status {status}: {text}"))),
            _ => Err(Error::Protocol(format!("{url}: status {status}: {text}"))),
        }
    }
}

/// Locates each surface in `text` left to right, skipping whatever lies between.
fn locate_spans(text: &str, surfaces: &[&str]) -> Result<Vec<(usize, usize)>> {
    let mut at = 0;
    surfaces
        .iter()
        .map(|s| {
            let found = text[at..]
                .find(s)
                .ok_or_else(|| Error::Protocol(format!("token {s:?} not found in text")))?;
            let start = at + found;
            at = start + s.len();
            Ok((start, at))
        })
        .collect()
}

impl LanguageModel for HttpBackend {
    fn name(&self) -> String {
        format!("http:{}", self.config.base_url)
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>> {
        let resp: TokenizeResponse = self.post(
            "/v1/tokenize",
            &TokenizeRequest {
                text: text.to_string(),
            },
        )?;
        for t in &resp.tokens {
            if t.end < t.start || text.get(t.start..t.end) != Some(t.surface.as_str()) {
                return Err(Error::Protocol(format!(
                    "token {:?} does not match offsets {}..{}",
                    t.surface, t.start, t.end
                )));
            }
        }
        Ok(resp.tokens)
    }

    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<Vec<ScoredToken>> {
        if continuation.is_empty() {
            return Err(Error::EmptyContinuation);
        }
        let resp: ScoreResponse = self.post(
            "/v1/score",
            &ScoreRequest {
                prefix: prefix.to_string(),
                continuation: continuation.to_string(),
            },
        )?;
        if resp.tokens.is_empty() {
            return Err(Error::EmptyContinuation);
        }
        let surfaces: Vec<&str> = resp.tokens.iter().map(|t| t.surface.as_str()).collect();
        let located = locate_spans(continuation, &surfaces)?;
        resp.tokens
            .iter()
            .zip(located)
            .map(|(t, (start, end))| {
                let (start, end) = match (t.start, t.end) {
                    (Some(s), Some(e)) if continuation.get(s..e) == Some(t.surface.as_str()) => (s, e),
                    (Some(_), Some(_)) => {
                        return Err(Error::Protocol(format!(
                            "server offsets disagree with surface {:?}",
                            t.surface
                        )))
                    }
                    _ => (start, end),
                };
                if !t.logprob.is_finite() && t.logprob != f64::NEG_INFINITY || t.logprob > 1e-9 {
                    return Err(Error::Protocol(format!("invalid logprob {}", t.logprob)));
                }
                Ok(ScoredToken {
                    token: Token {
                        // ids are not part of the score response
                        id: 0,
                        surface: t.surface.clone(),
                        start,
                        end,
                    },
                    logprob: t.logprob.min(0.0),
                })
            })
            .collect()
    }

    fn next_token_logprobs(&self, context: &str) -> Result<VocabLogProbs> {
        let resp: NextResponse = self.post(
            "/v1/next",
            &NextRequest {
                context: context.to_string(),
                top_k: None,
            },
        )?;
        let mut entries = resp.entries;
        entries.sort_by_key(|e| e.id);
        if entries.iter().enumerate().any(|(i, e)| e.id as usize != i) {
            return Err(Error::Protocol(
                "next-token entries must cover ids 0..|V| exactly once".into(),
            ));
        }
        let weights = entries.iter().map(|e| e.logprob).collect();
        let surfaces: Arc<[String]> = entries.into_iter().map(|e| e.surface).collect();
        // re-normalize away server-side rounding
        Ok(VocabLogProbs::from_log_weights(weights, surfaces))
    }

    fn append_token(&self, context: &str, surface: &str) -> String {
        format!("{context}{surface}")
    }
}

/// A running protocol server; stops when dropped.
pub struct ServerHandle {
    addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    workers: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until the server is stopped from another thread.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

/// Serves any [`LanguageModel`] over the log-prob protocol.
///
/// `max_context_tokens` makes the server reject longer prefix+continuation
/// inputs with status 413.
pub fn serve(
    model: Arc<dyn LanguageModel>,
    addr: &str,
    workers: usize,
    max_context_tokens: Option<usize>,
) -> Result<ServerHandle> {
    let server = tiny_http::Server::http(addr)
        .map_err(|e| Error::BackendUnavailable(format!("cannot bind {addr}: {e}")))?;
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| Error::BackendUnavailable("server has no ip address".into()))?;
    let server = Arc::new(server);
    let workers = (0..workers.max(1))
        .map(|_| {
            let server = server.clone();
            let model = model.clone();
            std::thread::spawn(move || {
                while let Ok(mut req) = server.recv() {
                    let mut body = String::new();
                    let (status, json) = match req.as_reader().read_to_string(&mut body) {
                        Ok(_) => handle(&*model, req.url(), &body, max_context_tokens),
                        Err(e) => (400, error_json(&e.to_string())),
                    };
                    let header =
                        tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
                    let resp = tiny_http::Response::from_string(json)
                        .with_status_code(status)
                        .with_header(header);
                    let _ = req.respond(resp);
                }
            })
        })
        .collect();
    Ok(ServerHandle {
        addr,
        server,
        workers,
    })
}

fn error_json(msg: &str) -> String {
    serde_json::to_string(&ErrorBody {
        error: msg.to_string(),
        tokens: None,
        limit: None,
    })
    .unwrap()
}

fn handle(
    model: &dyn LanguageModel,
    path: &str,
    body: &str,
    limit: Option<usize>,
) -> (u16, String) {
    let too_long = |text: &str| -> Result<Option<(u16, String)>> {
        let Some(limit) = limit else { return Ok(None) };
        let n = model.tokenize(text)?.len();
        Ok((n > limit).then(|| {
            let body = ErrorBody {
                error: "context length exceeded".into(),
                tokens: Some(n),
                limit: Some(limit),
            };
            (413, serde_json::to_string(&body).unwrap())
        }))
    };
    let result: Result<(u16, String)> = (|| match path {
        "/v1/score" => {
            let req: ScoreRequest = serde_json::from_str(body)?;
            if let Some(r) = too_long(&format!("{} {}", req.prefix, req.continuation))? {
                return Ok(r);
            }
            let tokens = model
                .score_continuation(&req.prefix, &req.continuation)?
                .into_iter()
                .map(|t| WireScoredToken {
                    surface: t.token.surface,
                    logprob: t.logprob,
                    start: Some(t.token.start),
                    end: Some(t.token.end),
                })
                .collect();
            let resp = ScoreResponse {
                tokens,
                model: model.name(),
            };
            Ok((200, serde_json::to_string(&resp)?))
        }
        "/v1/next" => {
            let req: NextRequest = serde_json::from_str(body)?;
            if let Some(r) = too_long(&req.context)? {
                return Ok(r);
            }
            let dist = model.next_token_logprobs(&req.context)?;
            let mut entries: Vec<NextEntry> = dist
                .as_slice()
                .iter()
                .enumerate()
                .map(|(id, &logprob)| {
                    // report the text this token adds to the context, so
                    // clients can detokenize by concatenation
                    let piece = dist.surface(id as u32).unwrap_or_default();
                    let extended = model.append_token(&req.context, piece);
                    let surface = extended
                        .strip_prefix(req.context.as_str())
                        .unwrap_or(piece)
                        .to_string();
                    NextEntry {
                        surface,
                        id: id as u32,
                        logprob,
                    }
                })
                .collect();
            if let Some(k) = req.top_k {
                entries.sort_by(|a, b| b.logprob.total_cmp(&a.logprob).then(a.id.cmp(&b.id)));
                entries.truncate(k);
            }
            Ok((200, serde_json::to_string(&NextResponse { entries })?))
        }
        "/v1/tokenize" => {
            let req: TokenizeRequest = serde_json::from_str(body)?;
            let tokens = model.tokenize(&req.text)?;
            Ok((200, serde_json::to_string(&TokenizeResponse { tokens })?))
        }
        _ => Ok((404, error_json(&format!("no route {path}")))),
    })();
    match result {
        Ok(r) => r,
        Err(Error::Json(e)) => (400, error_json(&e.to_string())),
        Err(e @ Error::EmptyContinuation) => (422, error_json(&e.to_string())),
        Err(e) => (500, error_json(&e.to_string())),
    }
}
