//! Which parts of speech concentrate among the hardest words of a document.
//!
//! Token log-probabilities are aggregated to words (a word is as hard as its
//! hardest token), the lowest-probability η share of words is taken per
//! document, and each tag's share in those subsets is compared with its share
//! of all words:
//!
//! `Δ_η(z) = Σ_i N(T(X_i, η), z) / (η · Σ_i N(X_i, z))`

mod tagger;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub use tagger::{read_tagged_corpus, tag_pos, HeuristicTagger, PassThroughTagger, PosTagger};

use crate::backend::LanguageModel;
use crate::error::{Error, Result};
use crate::highlight::{check_eta, token_probabilities, ScoredSequence};

/// Number of most frequent tags kept as matrix rows by default.
pub const DEFAULT_TOP_TAGS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub tag: String,
    /// Aggregated log-probability; `None` for words without a scored token.
    pub logprob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedDocument {
    pub text: String,
    pub words: Vec<Word>,
}

impl TaggedDocument {
    /// Lays the words out space-separated; probabilities are unset.
    pub fn from_tagged_words<S: AsRef<str>, T: AsRef<str>>(words: &[(S, T)]) -> Self {
        let mut text = String::new();
        let words = words
            .iter()
            .map(|(surface, tag)| {
                if !text.is_empty() {
                    text.push(' ');
                }
                let start = text.len();
                text.push_str(surface.as_ref());
                Word {
                    surface: surface.as_ref().to_string(),
                    start,
                    end: text.len(),
                    tag: tag.as_ref().to_string(),
                    logprob: None,
                }
            })
            .collect();
        Self { text, words }
    }

    /// Tags plain words with `tagger`.
    pub fn from_words(words: &[&str], tagger: &dyn PosTagger) -> Result<Self> {
        let tags = tag_pos(words, tagger)?;
        let pairs: Vec<(&str, &str)> = words.iter().copied().zip(tags.iter().map(String::as_str)).collect();
        Ok(Self::from_tagged_words(&pairs))
    }

    pub fn spans(&self) -> Vec<(usize, usize)> {
        self.words.iter().map(|w| (w.start, w.end)).collect()
    }

    /// Fills word probabilities from a standalone scoring of the text.
    /// A document too short to score keeps every word unscored.
    pub fn score(&mut self, backend: &dyn LanguageModel) -> Result<()> {
        let scored = match token_probabilities(&self.text, backend) {
            Ok(s) => s,
            Err(Error::TooShort { .. }) => {
                self.words.iter_mut().for_each(|w| w.logprob = None);
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        let probs = aggregate_word_probabilities(&scored, &self.spans())?;
        for (w, lp) in self.words.iter_mut().zip(probs) {
            w.logprob = lp;
        }
        Ok(())
    }

    pub fn scored_words(&self) -> usize {
        self.words.iter().filter(|w| w.logprob.is_some()).count()
    }
}

/// Minimum token log-probability inside each word span.
///
/// Tokens are trimmed of surrounding whitespace first. A token straddling a
/// word boundary is an error; a token outside every word must not contain
/// alphanumeric characters. Words whose only tokens are unscored get `None`.
pub fn aggregate_word_probabilities(
    scored: &ScoredSequence,
    word_spans: &[(usize, usize)],
) -> Result<Vec<Option<f64>>> {
    if word_spans.windows(2).any(|w| w[0].1 > w[1].0) || word_spans.iter().any(|s| s.0 > s.1) {
        return Err(Error::Alignment("word spans must be ordered and disjoint".into()));
    }
    let mut out: Vec<Option<f64>> = vec![None; word_spans.len()];
    for (i, token) in scored.tokens.iter().enumerate() {
        let raw = scored.source.get(token.start..token.end).ok_or_else(|| {
            Error::Alignment(format!("token span {}..{} outside source", token.start, token.end))
        })?;
        let lead = raw.len() - raw.trim_start().len();
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (start, end) = (token.start + lead, token.start + lead + trimmed.len());
        // last word starting at or before the token
        let w = word_spans.partition_point(|s| s.0 <= start);
        let inside = w > 0 && end <= word_spans[w - 1].1 && start < word_spans[w - 1].1;
        if !inside {
            let overlaps = word_spans.iter().any(|s| start < s.1 && s.0 < end);
            if overlaps || trimmed.chars().any(char::is_alphanumeric) {
                return Err(Error::Alignment(format!(
                    "token {:?} at {start}..{end} crosses a word boundary",
                    token.surface
                )));
            }
            continue;
        }
        if let Some(lp) = scored.logprob_at(i) {
            let slot = &mut out[w - 1];
            *slot = Some(slot.map_or(lp, |cur: f64| cur.min(lp)));
        }
    }
    Ok(out)
}

/// Indices (ascending) of the `max(1, floor(η·W))` lowest-probability scored
/// words; ties go to earlier words. Empty when no word is scored.
pub fn top_eta_words(doc: &TaggedDocument, eta: f64) -> Result<Vec<usize>> {
    check_eta(eta)?;
    let mut scored: Vec<(usize, f64)> = doc
        .words
        .iter()
        .enumerate()
        .filter_map(|(i, w)| w.logprob.map(|lp| (i, lp)))
        .collect();
    if scored.is_empty() {
        return Ok(Vec::new());
    }
    let k = ((eta * scored.len() as f64).floor() as usize).max(1);
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut picked: Vec<usize> = scored.into_iter().take(k).map(|(i, _)| i).collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Scored-word count per tag over the corpus.
pub fn tag_counts(corpus: &[TaggedDocument]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for w in corpus.iter().flat_map(|d| &d.words).filter(|w| w.logprob.is_some()) {
        *counts.entry(w.tag.clone()).or_insert(0) += 1;
    }
    counts
}

/// The `k` most frequent tags, ties broken alphabetically.
pub fn top_tags(corpus: &[TaggedDocument], k: usize) -> Vec<String> {
    let mut counts: Vec<(String, usize)> = tag_counts(corpus).into_iter().collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    counts.into_iter().take(k).map(|(t, _)| t).collect()
}

/// Δ_η(z) over tags × η grid. Cells are `None` where the tag never occurs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallMatrix {
    pub tags: Vec<String>,
    pub etas: Vec<f64>,
    /// `cells[tag][eta]`
    pub cells: Vec<Vec<Option<f64>>>,
    pub documents: usize,
    /// Scored words per tag, aligned with `tags`.
    pub tag_counts: Vec<usize>,
    pub total_words: usize,
}

impl RecallMatrix {
    pub fn get(&self, tag: &str, eta_index: usize) -> Option<f64> {
        let row = self.tags.iter().position(|t| t == tag)?;
        self.cells[row][eta_index]
    }

    /// Long-format CSV: `tag,eta,delta`, with an empty delta for undefined cells.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tag", "eta", "delta"])?;
        for (tag, row) in self.tags.iter().zip(&self.cells) {
            for (eta, cell) in self.etas.iter().zip(row) {
                let delta = cell.map(|d| d.to_string()).unwrap_or_default();
                w.write_record([tag.as_str(), &eta.to_string(), &delta])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Computes Δ_η for `tags` (or the [`DEFAULT_TOP_TAGS`] most frequent ones)
/// over an already scored corpus.
pub fn normalized_recall(
    corpus: &[TaggedDocument],
    etas: &[f64],
    tags: Option<&[String]>,
) -> Result<RecallMatrix> {
    if corpus.is_empty() {
        return Err(Error::EmptyRecords);
    }
    for &eta in etas {
        check_eta(eta)?;
    }
    let counts = tag_counts(corpus);
    let tags: Vec<String> = match tags {
        Some(t) => t.to_vec(),
        None => top_tags(corpus, DEFAULT_TOP_TAGS),
    };
    let row_of: BTreeMap<&str, usize> = tags.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

    let mut hits = vec![vec![0usize; etas.len()]; tags.len()];
    for doc in corpus {
        for (col, &eta) in etas.iter().enumerate() {
            for i in top_eta_words(doc, eta)? {
                if let Some(&row) = row_of.get(doc.words[i].tag.as_str()) {
                    hits[row][col] += 1;
                }
            }
        }
    }

    let tag_counts: Vec<usize> = tags.iter().map(|t| counts.get(t).copied().unwrap_or(0)).collect();
    let cells = hits
        .iter()
        .zip(&tag_counts)
        .map(|(row, &denom)| {
            row.iter()
                .zip(etas)
                .map(|(&n, &eta)| (denom > 0).then(|| n as f64 / (eta * denom as f64)))
                .collect()
        })
        .collect();
    Ok(RecallMatrix {
        tags,
        etas: etas.to_vec(),
        cells,
        documents: corpus.len(),
        tag_counts,
        total_words: counts.values().sum(),
    })
}

/// Parses `start:end:step` into an inclusive grid, e.g. `0.01:0.10:0.01`.
pub fn parse_eta_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("eta grid must be start:end:step, got {spec:?}")))?;
    let grid: Vec<f64> = match parts[..] {
        [single] => vec![single],
        [start, end, step] if step > 0.0 && end >= start => {
            let n = ((end - start) / step + 1e-9).floor() as usize;
            // round to the step's precision so 0.01*3 prints as 0.03
            (0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
        }
        _ => return Err(Error::Config(format!("eta grid must be start:end:step, got {spec:?}"))),
    };
    for &eta in &grid {
        check_eta(eta)?;
    }
    Ok(grid)
}
