use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::tokenizer::split_pieces;
use super::{LanguageModel, ScoredToken, Token, VocabLogProbs};
use crate::error::{Error, Result};

/// Sentence-start marker used in persisted contexts. Never part of the vocabulary.
pub const BOS: &str = "<s>";

const BOS_ID: u32 = u32::MAX;
const UNK_ID: u32 = u32::MAX - 1;

#[derive(Debug, Clone, Default)]
struct Successors {
    total: u64,
    next: HashMap<u32, u64>,
}

/// Add-δ smoothed n-gram model over whitespace+punctuation tokens.
///
/// Conditional probability of `w` after history `h`:
/// `(c(ctx, w) + δ) / (c(ctx) + δ·|V|)` where `ctx` is the last `order − 1`
/// tokens of `h` (history starts with [`BOS`]). Unseen contexts back off to
/// shorter ones down to length 1; an unseen length-1 context yields the
/// uniform distribution. Order 1 ignores history.
///
/// Out-of-vocabulary tokens in scored text receive the mass of an unseen
/// vocabulary item, `δ / (c(ctx) + δ·|V|)`, and act as unseen context.
#[derive(Debug, Clone)]
pub struct ToyNgramModel {
    order: usize,
    delta: f64,
    vocab: Arc<[String]>,
    index: HashMap<String, u32>,
    table: HashMap<Vec<u32>, Successors>,
}

#[derive(Serialize, Deserialize)]
struct NgramCount {
    context: Vec<String>,
    next: String,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    order: usize,
    delta: f64,
    vocab: Vec<String>,
    counts: Vec<NgramCount>,
}

impl ToyNgramModel {
    /// Counts every n-gram of length 1..=order in the corpus lines.
    pub fn train<S: AsRef<str>>(corpus: &[S], order: usize, delta: f64) -> Result<Self> {
        validate(order, delta)?;
        let lines: Vec<Vec<&str>> = corpus
            .iter()
            .map(|l| split_pieces(l.as_ref()).into_iter().map(|p| p.text).collect::<Vec<_>>())
            .filter(|l| !l.is_empty())
            .collect();
        if lines.is_empty() {
            return Err(Error::EmptyCorpus);
        }

        let vocab: BTreeSet<&str> = lines.iter().flatten().copied().collect();
        let vocab: Vec<String> = vocab.into_iter().map(str::to_string).collect();
        let mut model = Self::empty(order, delta, vocab);

        for line in &lines {
            let mut history = vec![BOS_ID];
            for word in line {
                let id = model.index[*word];
                let longest = (order - 1).min(history.len());
                for len in 0..=longest {
                    let ctx = history[history.len() - len..].to_vec();
                    let entry = model.table.entry(ctx).or_default();
                    entry.total += 1;
                    *entry.next.entry(id).or_default() += 1;
                }
                history.push(id);
            }
        }
        Ok(model)
    }

    fn empty(order: usize, delta: f64, vocab: Vec<String>) -> Self {
        let index = vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Self {
            order,
            delta,
            vocab: vocab.into(),
            index,
            table: HashMap::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn vocab(&self) -> &Arc<[String]> {
        &self.vocab
    }

    fn id_of(&self, surface: &str) -> u32 {
        self.index.get(surface).copied().unwrap_or(UNK_ID)
    }

    fn token_id(&self, surface: &str) -> u32 {
        match self.index.get(surface) {
            Some(&id) => id,
            None => self.vocab.len() as u32,
        }
    }

    /// Successor counts used to predict after `history`.
    fn successors(&self, history: &[u32]) -> Option<&Successors> {
        if self.order == 1 {
            return self.table.get(&[][..]);
        }
        let mut len = (self.order - 1).min(history.len());
        loop {
            let ctx = &history[history.len() - len..];
            if let Some(s) = self.table.get(ctx) {
                return Some(s);
            }
            if len <= 1 {
                return None;
            }
            len -= 1;
        }
    }

    fn logprob_after(&self, history: &[u32], id: u32) -> f64 {
        let v = self.vocab.len() as f64;
        let (count, total) = match self.successors(history) {
            Some(s) => (s.next.get(&id).copied().unwrap_or(0), s.total),
            None => (0, 0),
        };
        ((count as f64 + self.delta) / (total as f64 + self.delta * v)).ln()
    }

    fn history_of(&self, text: &str) -> Vec<u32> {
        let mut h = vec![BOS_ID];
        h.extend(split_pieces(text).iter().map(|p| self.id_of(p.text)));
        h
    }

    /// `ln P(token | context)` where `context` is a token list without the start marker.
    pub fn conditional_logprob(&self, context: &[&str], token: &str) -> f64 {
        let mut h = vec![BOS_ID];
        h.extend(context.iter().map(|w| self.id_of(w)));
        self.logprob_after(&h, self.id_of(token))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        validate(file.order, file.delta)?;
        if file.vocab.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut model = Self::empty(file.order, file.delta, file.vocab);
        for c in file.counts {
            if c.context.len() >= model.order {
                return Err(Error::Config(format!(
                    "context {:?} too long for order {}",
                    c.context, model.order
                )));
            }
            let ctx = c
                .context
                .iter()
                .map(|w| {
                    if w == BOS {
                        Ok(BOS_ID)
                    } else {
                        model
                            .index
                            .get(w)
                            .copied()
                            .ok_or_else(|| Error::Config(format!("context token {w:?} not in vocab")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let next = *model
                .index
                .get(&c.next)
                .ok_or_else(|| Error::Config(format!("token {:?} not in vocab", c.next)))?;
            let entry = model.table.entry(ctx).or_default();
            entry.total += c.count;
            *entry.next.entry(next).or_default() += c.count;
        }
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        let surface = |id: u32| {
            if id == BOS_ID {
                BOS.to_string()
            } else {
                self.vocab[id as usize].clone()
            }
        };
        let mut counts = BTreeMap::new();
        for (ctx, succ) in &self.table {
            let ctx: Vec<String> = ctx.iter().map(|&i| surface(i)).collect();
            for (&next, &count) in &succ.next {
                counts.insert((ctx.clone(), surface(next)), count);
            }
        }
        let file = ModelFile {
            order: self.order,
            delta: self.delta,
            vocab: self.vocab.to_vec(),
            counts: counts
                .into_iter()
                .map(|((context, next), count)| NgramCount {
                    context,
                    next,
                    count,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

fn validate(order: usize, delta: f64) -> Result<()> {
    if !(1..=5).contains(&order) {
        return Err(Error::OutOfDomain {
            field: "order",
            value: order as f64,
            expected: "1 <= order <= 5",
        });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::OutOfDomain {
            field: "delta",
            value: delta,
            expected: "delta > 0",
        });
    }
    Ok(())
}

impl LanguageModel for ToyNgramModel {
    fn name(&self) -> String {
        format!("toy-{}gram(delta={})", self.order, self.delta)
    }

    fn tokenize(&self, text: &str) -> Result<Vec<Token>> {
        Ok(split_pieces(text)
            .into_iter()
            .map(|p| Token {
                id: self.token_id(p.text),
                surface: p.text.to_string(),
                start: p.start,
                end: p.end,
            })
            .collect())
    }

    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<Vec<ScoredToken>> {
        let tokens = self.tokenize(continuation)?;
        if tokens.is_empty() {
            return Err(Error::EmptyContinuation);
        }
        let mut history = self.history_of(prefix);
        Ok(tokens
            .into_iter()
            .map(|token| {
                let id = self.id_of(&token.surface);
                let logprob = self.logprob_after(&history, id);
                history.push(id);
                ScoredToken { token, logprob }
            })
            .collect())
    }

    fn next_token_logprobs(&self, context: &str) -> Result<VocabLogProbs> {
        let history = self.history_of(context);
        let logprobs = (0..self.vocab.len() as u32)
            .map(|id| self.logprob_after(&history, id))
            .collect();
        Ok(VocabLogProbs::new(logprobs, self.vocab.clone()))
    }

    fn append_token(&self, context: &str, surface: &str) -> String {
        if context.is_empty() {
            surface.to_string()
        } else {
            format!("{context} {surface}")
        }
    }
}
