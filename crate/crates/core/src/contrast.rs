//! Data-contrastive scoring: the hesitated pass is scaled by its ratio to the
//! plain pass, `softmax((1 + α)·log p(·|X') − α·log p(·|X))`.

use serde::{Deserialize, Serialize};

use crate::backend::{LanguageModel, VocabLogProbs};
use crate::error::{Error, Result};
use crate::highlight::{Hesitated, HesitationPlan};

/// Lower clamp for plain-pass log-probabilities, so a zero-probability entry
/// cannot produce an infinite bonus.
pub const LOG_FLOOR: f64 = -1.0e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContrastiveConfig {
    pub alpha: f64,
    pub max_new_tokens: usize,
    pub stop: Vec<String>,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            max_new_tokens: 50,
            stop: vec!["\n".into()],
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            field: "alpha",
            value: alpha,
            expected: "alpha >= 0",
        })
    }
}

fn combine(with: f64, without: f64, alpha: f64) -> f64 {
    if with == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    (1.0 + alpha) * with - alpha * without.max(LOG_FLOOR)
}

/// One contrastive decoding step over a shared vocabulary.
pub fn contrastive_step(
    logp_with: &VocabLogProbs,
    logp_without: &VocabLogProbs,
    alpha: f64,
) -> Result<VocabLogProbs> {
    check_alpha(alpha)?;
    if logp_with.len() != logp_without.len()
        || (!std::sync::Arc::ptr_eq(logp_with.surfaces(), logp_without.surfaces())
            && logp_with.surfaces() != logp_without.surfaces())
    {
        return Err(Error::VocabularyMismatch {
            left: logp_with.len(),
            right: logp_without.len(),
        });
    }
    if alpha == 0.0 {
        return Ok(logp_with.clone());
    }
    let weights = logp_with
        .as_slice()
        .iter()
        .zip(logp_without.as_slice())
        .map(|(&w, &wo)| combine(w, wo, alpha))
        .collect();
    Ok(VocabLogProbs::from_log_weights(weights, logp_with.surfaces().clone()))
}

/// Full decoding-step record: both passes and their combination.
#[derive(Debug, Clone, PartialEq)]
pub struct StepScores {
    pub logp_with: VocabLogProbs,
    pub logp_without: VocabLogProbs,
    pub combined: VocabLogProbs,
}

impl StepScores {
    pub fn compute(
        plain_ctx: &str,
        hes_ctx: &str,
        alpha: f64,
        backend: &dyn LanguageModel,
    ) -> Result<Self> {
        let logp_with = backend.next_token_logprobs(hes_ctx)?;
        let logp_without = backend.next_token_logprobs(plain_ctx)?;
        let combined = contrastive_step(&logp_with, &logp_without, alpha)?;
        Ok(Self {
            logp_with,
            logp_without,
            combined,
        })
    }
}

/// How option sequences are scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptionScoring {
    pub alpha: f64,
    /// Divide the sequence score by its token count.
    pub length_normalize: bool,
    /// Renormalize the combined distribution at every position instead of
    /// summing raw log-weights. Costs two full-vocabulary queries per token.
    pub step_normalized: bool,
}

impl Default for OptionScoring {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            length_normalize: false,
            step_normalized: false,
        }
    }
}

impl OptionScoring {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }
}

/// Teacher-forced token log-probabilities of an option under both contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionLogprobs {
    pub with_hesitation: Vec<f64>,
    pub without_hesitation: Vec<f64>,
}

impl OptionLogprobs {
    pub fn compute(
        plain_ctx: &str,
        hes_ctx: &str,
        option: &str,
        backend: &dyn LanguageModel,
    ) -> Result<Self> {
        let with = backend.score_continuation(hes_ctx, option)?;
        let without = backend.score_continuation(plain_ctx, option)?;
        if with.len() != without.len() {
            return Err(Error::Alignment(format!(
                "option {option:?} tokenized to {} vs {} tokens under the two contexts",
                with.len(),
                without.len()
            )));
        }
        Ok(Self {
            with_hesitation: with.into_iter().map(|t| t.logprob).collect(),
            without_hesitation: without.into_iter().map(|t| t.logprob).collect(),
        })
    }

    /// Summed per-token contrastive log-weight.
    pub fn contrastive_sum(&self, alpha: f64) -> f64 {
        if alpha == 0.0 {
            return self.with_hesitation.iter().sum();
        }
        self.with_hesitation
            .iter()
            .zip(&self.without_hesitation)
            .map(|(&w, &wo)| combine(w, wo, alpha))
            .sum()
    }
}

/// Unnormalized contrastive log-score of `option`:
/// `Σ_t (1 + α)·log p(y_t | X', y_<t) − α·log p(y_t | X, y_<t)`.
pub fn score_option(
    plain_ctx: &str,
    hes_ctx: &str,
    option: &str,
    alpha: f64,
    backend: &dyn LanguageModel,
) -> Result<f64> {
    score_option_with(plain_ctx, hes_ctx, option, &OptionScoring::with_alpha(alpha), backend)
}

pub fn score_option_with(
    plain_ctx: &str,
    hes_ctx: &str,
    option: &str,
    scoring: &OptionScoring,
    backend: &dyn LanguageModel,
) -> Result<f64> {
    check_alpha(scoring.alpha)?;
    let (total, len) = if scoring.step_normalized {
        step_normalized_score(plain_ctx, hes_ctx, option, scoring.alpha, backend)?
    } else if scoring.alpha == 0.0 {
        let with = backend.score_continuation(hes_ctx, option)?;
        (with.iter().map(|t| t.logprob).sum(), with.len())
    } else {
        let lp = OptionLogprobs::compute(plain_ctx, hes_ctx, option, backend)?;
        (lp.contrastive_sum(scoring.alpha), lp.with_hesitation.len())
    };
    Ok(if scoring.length_normalize {
        total / len as f64
    } else {
        total
    })
}

fn step_normalized_score(
    plain_ctx: &str,
    hes_ctx: &str,
    option: &str,
    alpha: f64,
    backend: &dyn LanguageModel,
) -> Result<(f64, usize)> {
    let tokens = backend.tokenize(option)?;
    if tokens.is_empty() {
        return Err(Error::EmptyContinuation);
    }
    let mut plain = plain_ctx.to_string();
    let mut hes = hes_ctx.to_string();
    let mut total = 0.0;
    for token in &tokens {
        let step = StepScores::compute(&plain, &hes, alpha, backend)?;
        let id = step.combined.id_of(&token.surface).ok_or_else(|| {
            Error::Alignment(format!("token {:?} is not in the vocabulary", token.surface))
        })?;
        total += step.combined.as_slice()[id as usize];
        plain = backend.append_token(&plain, &token.surface);
        hes = backend.append_token(&hes, &token.surface);
    }
    Ok((total, tokens.len()))
}

/// Greedy contrastive decoding. Each chosen token extends both contexts.
/// Stops after `max_new_tokens` tokens or when a stop sequence appears; the
/// stop sequence itself is cut from the output.
pub fn generate(
    plain_ctx: &str,
    hes_ctx: &str,
    config: &ContrastiveConfig,
    backend: &dyn LanguageModel,
) -> Result<String> {
    check_alpha(config.alpha)?;
    if config.max_new_tokens == 0 {
        return Err(Error::OutOfDomain {
            field: "max_new_tokens",
            value: 0.0,
            expected: "max_new_tokens >= 1",
        });
    }
    let mut plain = plain_ctx.to_string();
    let mut hes = hes_ctx.to_string();
    let mut out = String::new();
    for _ in 0..config.max_new_tokens {
        let with = backend.next_token_logprobs(&hes)?;
        let combined = if config.alpha == 0.0 {
            with
        } else {
            let without = backend.next_token_logprobs(&plain)?;
            contrastive_step(&with, &without, config.alpha)?
        };
        let surface = combined
            .surface(combined.argmax())
            .ok_or_else(|| Error::Protocol("empty vocabulary".into()))?
            .to_string();
        out = backend.append_token(&out, &surface);
        if let Some(cut) = config.stop.iter().filter(|s| !s.is_empty()).filter_map(|s| out.find(s.as_str())).min() {
            out.truncate(cut);
            break;
        }
        plain = backend.append_token(&plain, &surface);
        hes = backend.append_token(&hes, &surface);
    }
    Ok(out)
}

/// Binary judgment; `Yes` means the summary is judged hallucinated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Yes,
    No,
}

/// Prompt with `{document}` and `{summary}` slots plus the two answer verbalizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeTemplate {
    pub prompt: String,
    pub yes: String,
    pub no: String,
}

impl Default for JudgeTemplate {
    /// Non-canonical default wording.
    fn default() -> Self {
        Self {
            prompt: "You are given a document and a summary. Judge whether the summary contains \
                     non-factual or hallucinated information with respect to the document.\n\n\
                     #Document#: {document}\n#Summary#: {summary}\n#Your Judgement#:"
                .into(),
            yes: " Yes".into(),
            no: " No".into(),
        }
    }
}

impl JudgeTemplate {
    pub fn render(&self, document: &str, summary: &str) -> String {
        fill_slots(&self.prompt, &[("{document}", document), ("{summary}", summary)])
    }
}

/// Single-pass slot substitution; inserted values are never re-scanned.
pub fn fill_slots(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    'outer: while !rest.is_empty() {
        for (slot, value) in slots {
            if let Some(tail) = rest.strip_prefix(slot) {
                out.push_str(value);
                rest = tail;
                continue 'outer;
            }
        }
        let c = rest.chars().next().unwrap();
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub verdict: Verdict,
    pub yes_score: f64,
    pub no_score: f64,
}

/// Judges summaries against a hesitated document.
#[derive(Debug, Clone, Default)]
pub struct Judge {
    pub plan: HesitationPlan,
    pub scoring: OptionScoring,
    pub template: JudgeTemplate,
}

impl Judge {
    pub fn judge(
        &self,
        document: &str,
        summary: &str,
        backend: &dyn LanguageModel,
        record_id: u64,
    ) -> Result<Judgment> {
        let hesitated = self.plan.hesitate(document, backend, record_id)?;
        self.judge_hesitated(document, &hesitated, summary, backend)
    }

    /// Judges with a hesitation already built for `document`.
    pub fn judge_hesitated(
        &self,
        document: &str,
        hesitated: &Hesitated,
        summary: &str,
        backend: &dyn LanguageModel,
    ) -> Result<Judgment> {
        let plain = self.template.render(document, summary);
        let hes = self.template.render(&hesitated.composed, summary);
        let yes_score = score_option_with(&plain, &hes, &self.template.yes, &self.scoring, backend)?;
        let no_score = score_option_with(&plain, &hes, &self.template.no, &self.scoring, backend)?;
        Ok(Judgment {
            verdict: decide(yes_score, no_score),
            yes_score,
            no_score,
        })
    }
}

/// `Yes` only on a strictly higher score.
pub fn decide(yes_score: f64, no_score: f64) -> Verdict {
    if yes_score > no_score {
        Verdict::Yes
    } else {
        Verdict::No
    }
}

/// Judges with the default template.
pub fn binary_judge(
    document: &str,
    summary: &str,
    plan: &HesitationPlan,
    alpha: f64,
    backend: &dyn LanguageModel,
) -> Result<Verdict> {
    let judge = Judge {
        plan: plan.clone(),
        scoring: OptionScoring::with_alpha(alpha),
        template: JudgeTemplate::default(),
    };
    Ok(judge.judge(document, summary, backend, 0)?.verdict)
}
