//! Language-model access: tokenization and token-level log-probabilities.
//!
//! Two backends implement [`LanguageModel`]: the in-process [`ToyNgramModel`]
//! and the [`HttpBackend`] wire client. Everything is kept in natural-log
//! space; probabilities are only materialized at API edges.

mod http;
mod ngram;
mod tokenizer;

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use http::{serve, HttpBackend, HttpConfig, ServerHandle, TIMEOUT_ENV};
pub use ngram::{ToyNgramModel, BOS};
pub use tokenizer::{split_pieces, Piece};

/// One token of a text, with its byte span in the text it was cut from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: u32,
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

/// A token together with its teacher-forced log-probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredToken {
    pub token: Token,
    pub logprob: f64,
}

/// A normalized log-distribution over a backend's vocabulary, indexed by token id.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabLogProbs {
    logprobs: Vec<f64>,
    surfaces: Arc<[String]>,
}

impl VocabLogProbs {
    /// Wraps already-normalized log-probabilities. Panics if the lengths differ.
    pub fn new(logprobs: Vec<f64>, surfaces: Arc<[String]>) -> Self {
        assert_eq!(
            logprobs.len(),
            surfaces.len(),
            "one log-probability per vocabulary entry"
        );
        Self { logprobs, surfaces }
    }

    /// Log-softmax of arbitrary finite (or -inf) log-weights.
    pub fn from_log_weights(weights: Vec<f64>, surfaces: Arc<[String]>) -> Self {
        let lse = logsumexp(&weights);
        let logprobs = weights.into_iter().map(|w| w - lse).collect();
        Self::new(logprobs, surfaces)
    }

    pub fn len(&self) -> usize {
        self.logprobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logprobs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.logprobs
    }

    pub fn surfaces(&self) -> &Arc<[String]> {
        &self.surfaces
    }

    pub fn get(&self, id: u32) -> Option<f64> {
        self.logprobs.get(id as usize).copied()
    }

    pub fn surface(&self, id: u32) -> Option<&str> {
        self.surfaces.get(id as usize).map(String::as_str)
    }

    pub fn id_of(&self, surface: &str) -> Option<u32> {
        self.surfaces
            .iter()
            .position(|s| s == surface)
            .map(|i| i as u32)
    }

    pub fn logsumexp(&self) -> f64 {
        logsumexp(&self.logprobs)
    }

    /// Highest-probability id; ties go to the lowest id.
    pub fn argmax(&self) -> u32 {
        let mut best = 0usize;
        for (i, &lp) in self.logprobs.iter().enumerate() {
            if lp > self.logprobs[best] {
                best = i;
            }
        }
        best as u32
    }

    pub fn probs(&self) -> Vec<f64> {
        self.logprobs.iter().map(|lp| lp.exp()).collect()
    }
}

/// Numerically stable `ln(sum(exp(x)))`. Returns -inf for an empty or all -inf input.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Uniform access to a tokenizer and token-level log-probabilities.
///
/// Implementations are immutable after construction and must tolerate
/// concurrent calls.
pub trait LanguageModel: Send + Sync {
    /// Human-readable identifier recorded in reports.
    fn name(&self) -> String;

    fn tokenize(&self, text: &str) -> Result<Vec<Token>>;

    /// Teacher-forced scores for every token of `continuation`, left to right,
    /// conditioned on `prefix` (which may be empty). Token spans index into
    /// `continuation`.
    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<Vec<ScoredToken>>;

    /// Distribution over the next token after `context`.
    fn next_token_logprobs(&self, context: &str) -> Result<VocabLogProbs>;

    /// Extends `context` with one generated token surface, following this
    /// backend's detokenization rule.
    fn append_token(&self, context: &str, surface: &str) -> String;
}

impl<M: LanguageModel + ?Sized> LanguageModel for Arc<M> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn tokenize(&self, text: &str) -> Result<Vec<Token>> {
        (**self).tokenize(text)
    }
    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<Vec<ScoredToken>> {
        (**self).score_continuation(prefix, continuation)
    }
    fn next_token_logprobs(&self, context: &str) -> Result<VocabLogProbs> {
        (**self).next_token_logprobs(context)
    }
    fn append_token(&self, context: &str, surface: &str) -> String {
        (**self).append_token(context, surface)
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn tokenize(&self, text: &str) -> Result<Vec<Token>> {
        (**self).tokenize(text)
    }
    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<Vec<ScoredToken>> {
        (**self).score_continuation(prefix, continuation)
    }
    fn next_token_logprobs(&self, context: &str) -> Result<VocabLogProbs> {
        (**self).next_token_logprobs(context)
    }
    fn append_token(&self, context: &str, surface: &str) -> String {
        (**self).append_token(context, surface)
    }
}

/// Which backend to construct, parsed from `toy:<model.json>` or `http:<url>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BackendSpec {
    Toy(String),
    Http(String),
}

impl std::str::FromStr for BackendSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("toy:") {
            Ok(BackendSpec::Toy(path.to_string()))
        } else if let Some(url) = s.strip_prefix("http:") {
            // accept both "http:URL" and a bare "http://..." URL
            let url = if url.starts_with("//") {
                format!("http:{url}")
            } else {
                url.to_string()
            };
            Ok(BackendSpec::Http(url))
        } else if s.starts_with("https://") {
            Ok(BackendSpec::Http(s.to_string()))
        } else {
            Err(Error::Config(format!(
                "backend must be toy:<model.json> or http:<url>, got {s:?}"
            )))
        }
    }
}

impl TryFrom<String> for BackendSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BackendSpec> for String {
    fn from(spec: BackendSpec) -> String {
        spec.to_string()
    }
}

impl std::fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendSpec::Toy(p) => write!(f, "toy:{p}"),
            BackendSpec::Http(u) => write!(f, "http:{u}"),
        }
    }
}

impl BackendSpec {
    /// Builds the backend. Relative toy paths resolve against `base_dir` when given.
    pub fn open(&self, base_dir: Option<&Path>) -> Result<Arc<dyn LanguageModel>> {
        match self {
            BackendSpec::Toy(p) => {
                let path = match base_dir {
                    Some(dir) if Path::new(p).is_relative() => dir.join(p),
                    _ => Path::new(p).to_path_buf(),
                };
                Ok(Arc::new(ToyNgramModel::load(&path)?))
            }
            BackendSpec::Http(url) => Ok(Arc::new(HttpBackend::new(HttpConfig::from_env(url))?)),
        }
    }
}
