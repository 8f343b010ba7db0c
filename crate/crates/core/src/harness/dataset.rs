use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::read_tagged_corpus;
use crate::error::{Error, Result};

use super::config::TaskKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McItem {
    pub question: String,
    pub best_answer: String,
    #[serde(default)]
    pub correct_answers: Vec<String>,
    pub incorrect_answers: Vec<String>,
}

impl McItem {
    /// True answers with the best answer first and not repeated.
    pub fn true_answers(&self) -> Vec<&str> {
        std::iter::once(self.best_answer.as_str())
            .chain(
                self.correct_answers
                    .iter()
                    .map(String::as_str)
                    .filter(|a| *a != self.best_answer),
            )
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenItem {
    pub question: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorItem {
    pub prefix: String,
    pub completions: Vec<String>,
    pub correct_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaluEvalItem {
    pub document: String,
    pub right_summary: String,
    pub hallucinated_summary: String,
}

/// Records of one benchmark, in file order.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    TruthfulqaMc(Vec<McItem>),
    TruthfulqaGen(Vec<GenItem>),
    Factor(Vec<FactorItem>),
    HaluevalSum(Vec<HaluEvalItem>),
    /// Documents of `(surface, tag)` pairs.
    Tagged(Vec<Vec<(String, String)>>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::TruthfulqaMc(v) => v.len(),
            Dataset::TruthfulqaGen(v) => v.len(),
            Dataset::Factor(v) => v.len(),
            Dataset::HaluevalSum(v) => v.len(),
            Dataset::Tagged(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn load_dataset(path: &Path, kind: TaskKind) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, kind)
}

/// Parses JSONL (or, for recall analysis, tagged TSV) and validates each record.
pub fn parse_dataset(text: &str, kind: TaskKind) -> Result<Dataset> {
    Ok(match kind {
        TaskKind::TruthfulqaMc => Dataset::TruthfulqaMc(parse_jsonl(text, |i, r: &McItem| {
            non_empty(i, "question", &r.question)?;
            non_empty(i, "best_answer", &r.best_answer)?;
            if r.incorrect_answers.is_empty() {
                return Err(schema(i, "incorrect_answers is empty"));
            }
            for a in r.correct_answers.iter().chain(&r.incorrect_answers) {
                non_empty(i, "answer", a)?;
            }
            Ok(())
        })?),
        TaskKind::TruthfulqaGen => Dataset::TruthfulqaGen(parse_jsonl(text, |i, r: &GenItem| {
            non_empty(i, "question", &r.question)
        })?),
        TaskKind::Factor => Dataset::Factor(parse_jsonl(text, |i, r: &FactorItem| {
            non_empty(i, "prefix", &r.prefix)?;
            if r.completions.len() < 2 {
                return Err(schema(i, "need at least 2 completions"));
            }
            if r.correct_index >= r.completions.len() {
                return Err(schema(i, "correct_index out of range"));
            }
            for c in &r.completions {
                non_empty(i, "completion", c)?;
            }
            Ok(())
        })?),
        TaskKind::HaluevalSum => Dataset::HaluevalSum(parse_jsonl(text, |i, r: &HaluEvalItem| {
            non_empty(i, "document", &r.document)?;
            non_empty(i, "right_summary", &r.right_summary)?;
            non_empty(i, "hallucinated_summary", &r.hallucinated_summary)
        })?),
        TaskKind::RecallAnalysis => Dataset::Tagged(read_tagged_corpus(text)?),
    })
}

fn schema(index: usize, reason: &str) -> Error {
    Error::Schema {
        index,
        reason: reason.to_string(),
    }
}

fn non_empty(index: usize, field: &str, value: &str) -> Result<()> {
    if value.trim().is_empty() {
        Err(schema(index, &format!("{field} is empty")))
    } else {
        Ok(())
    }
}

/// Blank lines are skipped; record indices count non-blank lines from 0.
fn parse_jsonl<T: DeserializeOwned>(
    text: &str,
    validate: impl Fn(usize, &T) -> Result<()>,
) -> Result<Vec<T>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            let record: T = serde_json::from_str(line).map_err(|e| schema(i, &e.to_string()))?;
            validate(i, &record)?;
            Ok(record)
        })
        .collect()
}
