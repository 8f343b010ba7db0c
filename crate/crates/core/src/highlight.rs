//! Key-token highlighting: per-token probabilities, key-token selection and
//! hesitation texts.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::{LanguageModel, Token};
use crate::error::{Error, Result};

/// Prefix that introduces the highlighted tokens.
pub const HESITATION_PREFIX: &str = "Pondering: ";

/// Separator placed between an input and its hesitation.
pub const DEFAULT_SEPARATOR: &str = "\n";

/// Tokens of a text with the log-probability of every scorable token.
///
/// Scored standalone, the first token has no left context and carries no
/// score; with a prefix, every token is scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSequence {
    pub source: String,
    pub tokens: Vec<Token>,
    logprobs: Vec<f64>,
    prefixed: bool,
}

impl ScoredSequence {
    pub fn new(source: String, tokens: Vec<Token>, logprobs: Vec<f64>, prefixed: bool) -> Result<Self> {
        let expected = if prefixed {
            tokens.len()
        } else {
            tokens.len().saturating_sub(1)
        };
        if logprobs.len() != expected {
            return Err(Error::Alignment(format!(
                "{} log-probabilities for {} tokens (prefixed: {prefixed})",
                logprobs.len(),
                tokens.len()
            )));
        }
        if let Some(lp) = logprobs.iter().find(|lp| lp.is_nan() || **lp > 0.0) {
            return Err(Error::OutOfDomain {
                field: "logprob",
                value: *lp,
                expected: "logprob <= 0",
            });
        }
        Ok(Self {
            source,
            tokens,
            logprobs,
            prefixed,
        })
    }

    pub fn is_prefixed(&self) -> bool {
        self.prefixed
    }

    pub fn logprobs(&self) -> &[f64] {
        &self.logprobs
    }

    /// Index of the first token that carries a score.
    pub fn first_scored(&self) -> usize {
        usize::from(!self.prefixed)
    }

    pub fn num_scored(&self) -> usize {
        self.logprobs.len()
    }

    pub fn logprob_at(&self, token_index: usize) -> Option<f64> {
        token_index
            .checked_sub(self.first_scored())
            .and_then(|i| self.logprobs.get(i).copied())
    }

    /// `(token index, logprob)` for every scored token, in text order.
    pub fn scored(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let first = self.first_scored();
        self.logprobs.iter().enumerate().map(move |(i, &lp)| (i + first, lp))
    }
}

/// Scores `text` on its own; the first token is unscored.
pub fn token_probabilities(text: &str, backend: &dyn LanguageModel) -> Result<ScoredSequence> {
    let tokens = backend.tokenize(text)?;
    if tokens.len() < 2 {
        return Err(Error::TooShort {
            tokens: tokens.len(),
            required: 2,
        });
    }
    let scored = backend.score_continuation("", text)?;
    let (tokens, logprobs): (Vec<_>, Vec<_>) = scored.into_iter().map(|s| (s.token, s.logprob)).unzip();
    if tokens.len() < 2 {
        return Err(Error::TooShort {
            tokens: tokens.len(),
            required: 2,
        });
    }
    ScoredSequence::new(text.to_string(), tokens, logprobs[1..].to_vec(), false)
}

/// Scores `text` conditioned on `prefix`; every token is scored.
pub fn token_probabilities_with_prefix(
    prefix: &str,
    text: &str,
    backend: &dyn LanguageModel,
) -> Result<ScoredSequence> {
    let scored = match backend.score_continuation(prefix, text) {
        Err(Error::EmptyContinuation) => {
            return Err(Error::TooShort {
                tokens: 0,
                required: 1,
            })
        }
        other => other?,
    };
    let (tokens, logprobs) = scored.into_iter().map(|s| (s.token, s.logprob)).unzip();
    ScoredSequence::new(text.to_string(), tokens, logprobs, true)
}

/// Which end of the probability ranking feeds the candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// Lowest-probability tokens.
    #[default]
    Hardest,
    /// Highest-probability tokens.
    Easiest,
    /// A uniformly random pool of the same size.
    Random,
}

impl std::str::FromStr for SelectionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hardest" => Ok(Self::Hardest),
            "easiest" => Ok(Self::Easiest),
            "random" => Ok(Self::Random),
            _ => Err(Error::Config(format!(
                "mode must be hardest|easiest|random, got {s:?}"
            ))),
        }
    }
}

/// The retained key tokens of one text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyTokenSet {
    /// Token indices into the scored sequence, strictly increasing.
    pub indices: Vec<usize>,
    pub eta: f64,
    pub lambda: f64,
    pub seed: u64,
    pub mode: SelectionMode,
}

impl KeyTokenSet {
    pub fn surfaces<'a>(&self, scored: &'a ScoredSequence) -> Vec<&'a str> {
        self.indices
            .iter()
            .map(|&i| scored.tokens[i].surface.as_str())
            .collect()
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            field: "eta",
            value: eta,
            expected: "0 < eta < 1",
        })
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            field: "lambda",
            value: lambda,
            expected: "0 <= lambda <= 1",
        })
    }
}

/// Candidate pool size: `max(1, floor(eta * n))`.
pub fn pool_size(n: usize, eta: f64) -> usize {
    ((eta * n as f64).floor() as usize).max(1)
}

/// Tokens kept after drop-out: `max(1, floor((1 - lambda) * pool))`.
pub fn retained_count(pool: usize, lambda: f64) -> usize {
    (((1.0 - lambda) * pool as f64).floor() as usize).max(1)
}

/// Selects key tokens: a pool of the `pool_size` most extreme tokens for
/// `mode` (ties broken by earlier position), thinned by drop-out to
/// `retained_count` tokens drawn uniformly with `seed`.
pub fn select_key_tokens(
    scored: &ScoredSequence,
    eta: f64,
    lambda: f64,
    seed: u64,
    mode: SelectionMode,
) -> Result<KeyTokenSet> {
    check_eta(eta)?;
    check_lambda(lambda)?;
    let mut candidates: Vec<(usize, f64)> = scored.scored().collect();
    let n = candidates.len();
    if n == 0 {
        return Err(Error::TooShort {
            tokens: scored.tokens.len(),
            required: scored.first_scored() + 1,
        });
    }
    let k1 = pool_size(n, eta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let pool: Vec<usize> = match mode {
        SelectionMode::Hardest => {
            candidates.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            candidates.iter().take(k1).map(|c| c.0).collect()
        }
        SelectionMode::Easiest => {
            candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            candidates.iter().take(k1).map(|c| c.0).collect()
        }
        SelectionMode::Random => index::sample(&mut rng, n, k1)
            .into_iter()
            .map(|i| candidates[i].0)
            .collect(),
    };

    let k2 = retained_count(k1, lambda);
    let mut indices: Vec<usize> = if k2 >= pool.len() {
        pool
    } else {
        index::sample(&mut rng, pool.len(), k2)
            .into_iter()
            .map(|i| pool[i])
            .collect()
    };
    indices.sort_unstable();

    Ok(KeyTokenSet {
        indices,
        eta,
        lambda,
        seed,
        mode,
    })
}

/// Per-record seed derived from a run seed, independent of processing order.
pub fn record_seed(global_seed: u64, record_id: u64) -> u64 {
    splitmix64(global_seed ^ splitmix64(record_id))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    #[default]
    Append,
    Prepend,
}

impl std::str::FromStr for Placement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "append" => Ok(Self::Append),
            "prepend" => Ok(Self::Prepend),
            _ => Err(Error::Config(format!("placement must be append|prepend, got {s:?}"))),
        }
    }
}

/// How the hesitation is written. Textual form: `key`, `pauses:K`, `repeat`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Manner {
    #[default]
    KeyTokens,
    Pauses(usize),
    Repetition,
}

impl std::str::FromStr for Manner {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "key" | "key_tokens" => Ok(Self::KeyTokens),
            "repeat" | "repetition" => Ok(Self::Repetition),
            _ => s
                .strip_prefix("pauses:")
                .and_then(|k| k.parse().ok())
                .map(Self::Pauses)
                .ok_or_else(|| Error::Config(format!("manner must be key|pauses:K|repeat, got {s:?}"))),
        }
    }
}

impl std::fmt::Display for Manner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Manner::KeyTokens => f.write_str("key"),
            Manner::Pauses(k) => write!(f, "pauses:{k}"),
            Manner::Repetition => f.write_str("repeat"),
        }
    }
}

impl TryFrom<String> for Manner {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Manner> for String {
    fn from(m: Manner) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hesitation {
    pub text: String,
    pub placement: Placement,
    pub manner: Manner,
}

/// Writes the hesitation text for `manner`.
pub fn build_hesitation(
    key_set: &KeyTokenSet,
    scored: &ScoredSequence,
    manner: Manner,
    placement: Placement,
) -> Result<Hesitation> {
    let text = match manner {
        Manner::KeyTokens => {
            if let Some(&bad) = key_set.indices.iter().find(|&&i| i >= scored.tokens.len()) {
                return Err(Error::Alignment(format!(
                    "key token index {bad} out of range for {} tokens",
                    scored.tokens.len()
                )));
            }
            format!("{HESITATION_PREFIX}{}.", key_set.surfaces(scored).join(" "))
        }
        Manner::Pauses(k) => pauses(k),
        Manner::Repetition => scored.source.clone(),
    };
    Ok(Hesitation {
        text,
        placement,
        manner,
    })
}

fn pauses(k: usize) -> String {
    vec!["."; k].join(" ")
}

/// Joins input and hesitation with [`DEFAULT_SEPARATOR`].
pub fn compose_input(input: &str, hesitation: &Hesitation) -> String {
    compose_input_with(input, hesitation, DEFAULT_SEPARATOR)
}

pub fn compose_input_with(input: &str, hesitation: &Hesitation, separator: &str) -> String {
    if hesitation.text.is_empty() {
        return input.to_string();
    }
    match hesitation.placement {
        Placement::Append => format!("{input}{separator}{}", hesitation.text),
        Placement::Prepend => format!("{}{separator}{input}", hesitation.text),
    }
}

/// Everything needed to hesitate on an input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HesitationPlan {
    pub eta: f64,
    pub lambda: f64,
    /// Run-level seed; each record derives its own via [`record_seed`].
    pub seed: u64,
    pub mode: SelectionMode,
    pub manner: Manner,
    pub placement: Placement,
    pub separator: String,
}

impl Default for HesitationPlan {
    fn default() -> Self {
        Self {
            eta: 0.1,
            lambda: 0.0,
            seed: 0,
            mode: SelectionMode::Hardest,
            manner: Manner::KeyTokens,
            placement: Placement::Append,
            separator: DEFAULT_SEPARATOR.to_string(),
        }
    }
}

/// An input with its hesitation applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hesitated {
    pub key_set: Option<KeyTokenSet>,
    pub hesitation: Hesitation,
    pub composed: String,
}

impl HesitationPlan {
    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta)?;
        check_lambda(self.lambda)
    }

    /// Builds the hesitation for `input`. Only the key-token manner scores the text.
    pub fn hesitate(&self, input: &str, backend: &dyn LanguageModel, record_id: u64) -> Result<Hesitated> {
        let (key_set, hesitation) = match self.manner {
            Manner::KeyTokens => {
                let scored = token_probabilities(input, backend)?;
                let seed = record_seed(self.seed, record_id);
                let keys = select_key_tokens(&scored, self.eta, self.lambda, seed, self.mode)?;
                let hes = build_hesitation(&keys, &scored, self.manner, self.placement)?;
                (Some(keys), hes)
            }
            Manner::Pauses(k) => (
                None,
                Hesitation {
                    text: pauses(k),
                    placement: self.placement,
                    manner: self.manner,
                },
            ),
            Manner::Repetition => (
                None,
                Hesitation {
                    text: input.to_string(),
                    placement: self.placement,
                    manner: self.manner,
                },
            ),
        };
        let composed = compose_input_with(input, &hesitation, &self.separator);
        Ok(Hesitated {
            key_set,
            hesitation,
            composed,
        })
    }
}
