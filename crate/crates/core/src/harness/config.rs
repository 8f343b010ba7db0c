use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backend::BackendSpec;
use crate::contrast::{check_alpha, JudgeTemplate};
use crate::error::{Error, Result};
use crate::highlight::{check_eta, check_lambda, HesitationPlan, Manner, Placement, SelectionMode, DEFAULT_SEPARATOR};

use super::profile::{profile_for, Profile, GENERIC_BACKBONE};

pub const DEFAULT_QA_TEMPLATE: &str = include_str!("../../templates/qa_prompt.txt");
pub const DEFAULT_JUDGE_TEMPLATE: &str = include_str!("../../templates/judge_prompt.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    TruthfulqaMc,
    TruthfulqaGen,
    Factor,
    HaluevalSum,
    RecallAnalysis,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::TruthfulqaMc => "truthfulqa_mc",
            TaskKind::TruthfulqaGen => "truthfulqa_gen",
            TaskKind::Factor => "factor",
            TaskKind::HaluevalSum => "halueval_sum",
            TaskKind::RecallAnalysis => "recall_analysis",
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
            Error::Config(format!(
                "task must be truthfulqa_mc|truthfulqa_gen|factor|halueval_sum|recall_analysis, got {s:?}"
            ))
        })
    }
}

/// FACTOR source; selects the matching hyper-parameter column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorSplit {
    #[default]
    Wiki,
    News,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

/// A full run description. Unset η/λ/α/placement come from the backbone's
/// default profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub task: TaskKind,
    pub data: PathBuf,
    pub backend: BackendSpec,
    /// Profile name, e.g. `llama-7b`, `llama2-7b`, `mistral-7b`.
    pub backbone: String,
    pub factor_split: FactorSplit,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub placement: Option<Placement>,
    pub manner: Manner,
    pub mode: SelectionMode,
    pub seed: u64,
    pub separator: String,
    pub length_normalize: bool,
    pub step_normalized: bool,
    pub max_new_tokens: usize,
    pub stop: Vec<String>,
    pub qa_template_file: Option<PathBuf>,
    pub judge_template_file: Option<PathBuf>,
    pub judge_yes: String,
    pub judge_no: String,
    pub eta_grid: Vec<f64>,
    pub tags: Option<Vec<String>>,
    pub workers: usize,
    /// Abort when more than this share of records fails.
    pub max_failure_rate: f64,
    pub out_dir: Option<PathBuf>,
    pub formats: Vec<ReportFormat>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            task: TaskKind::TruthfulqaMc,
            data: PathBuf::new(),
            backend: BackendSpec::Toy("model.json".into()),
            backbone: GENERIC_BACKBONE.into(),
            factor_split: FactorSplit::Wiki,
            eta: None,
            lambda: None,
            alpha: None,
            placement: None,
            manner: Manner::KeyTokens,
            mode: SelectionMode::Hardest,
            seed: 0,
            separator: DEFAULT_SEPARATOR.into(),
            length_normalize: false,
            step_normalized: false,
            max_new_tokens: 50,
            stop: vec!["\n".into()],
            qa_template_file: None,
            judge_template_file: None,
            judge_yes: " Yes".into(),
            judge_no: " No".into(),
            eta_grid: (1..=10).map(|i| i as f64 / 100.0).collect(),
            tags: None,
            workers: 1,
            max_failure_rate: 0.1,
            out_dir: None,
            formats: vec![ReportFormat::Json, ReportFormat::Csv],
        }
    }
}

/// Hyper-parameters after profile defaults are applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub eta: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub placement: Placement,
    pub profile: Profile,
}

impl TaskConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Applies profile defaults and checks every hyper-parameter's domain.
    pub fn resolve(&self) -> Result<Resolved> {
        let profile = profile_for(&self.backbone, self.task, self.factor_split);
        let eta = self.eta.unwrap_or(profile.eta);
        let lambda = self.lambda.unwrap_or(profile.lambda);
        let alpha = self.alpha.unwrap_or(profile.alpha);
        check_eta(eta)?;
        check_lambda(lambda)?;
        check_alpha(alpha)?;
        let placement = match (self.task, self.placement) {
            (TaskKind::Factor, Some(Placement::Append)) => {
                log::warn!("factor inputs are article prefixes; forcing prepend placement");
                Placement::Prepend
            }
            (TaskKind::Factor, _) => Placement::Prepend,
            (_, p) => p.unwrap_or(Placement::Append),
        };
        if let Manner::Pauses(0) = self.manner {
            return Err(Error::Config("manner: pauses needs at least one pause".into()));
        }
        if self.max_new_tokens == 0 {
            return Err(Error::OutOfDomain {
                field: "max_new_tokens",
                value: 0.0,
                expected: "max_new_tokens >= 1",
            });
        }
        if self.workers == 0 {
            return Err(Error::OutOfDomain {
                field: "workers",
                value: 0.0,
                expected: "workers >= 1",
            });
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(Error::OutOfDomain {
                field: "max_failure_rate",
                value: self.max_failure_rate,
                expected: "0 <= max_failure_rate <= 1",
            });
        }
        if self.task == TaskKind::RecallAnalysis {
            if self.eta_grid.is_empty() {
                return Err(Error::Config("eta_grid: empty".into()));
            }
            for &e in &self.eta_grid {
                check_eta(e)?;
            }
        }
        Ok(Resolved {
            eta,
            lambda,
            alpha,
            placement,
            profile,
        })
    }

    pub fn plan(&self, resolved: &Resolved) -> HesitationPlan {
        HesitationPlan {
            eta: resolved.eta,
            lambda: resolved.lambda,
            seed: self.seed,
            mode: self.mode,
            manner: self.manner,
            placement: resolved.placement,
            separator: self.separator.clone(),
        }
    }

    pub fn qa_template(&self) -> Result<String> {
        read_template(self.qa_template_file.as_deref(), DEFAULT_QA_TEMPLATE)
    }

    pub fn judge_template(&self) -> Result<JudgeTemplate> {
        Ok(JudgeTemplate {
            prompt: read_template(self.judge_template_file.as_deref(), DEFAULT_JUDGE_TEMPLATE)?,
            yes: self.judge_yes.clone(),
            no: self.judge_no.clone(),
        })
    }
}

fn read_template(path: Option<&Path>, default: &str) -> Result<String> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        None => default.to_string(),
    };
    Ok(text.strip_suffix('\n').unwrap_or(&text).to_string())
}
