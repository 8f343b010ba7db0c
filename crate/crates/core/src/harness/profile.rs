//! Per-(backbone, task) default hyper-parameters.

use serde::{Deserialize, Serialize};

use super::config::{FactorSplit, TaskKind};

pub const GENERIC_BACKBONE: &str = "generic-7b";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub eta: f64,
    pub lambda: f64,
    pub alpha: f64,
}

/// Column order: TruthfulQA discrimination, TruthfulQA generation,
/// FACTOR wiki, FACTOR news, HaluEval summarization.
type Row = [Option<(f64, f64)>; 5];

const LAMBDA: [f64; 5] = [0.0, 0.0, 0.33, 0.33, 0.33];

const LLAMA_7B: Row = [
    Some((0.10, 6.0)),
    Some((0.40, 3.7)),
    Some((0.24, 0.0)),
    Some((0.12, 0.1)),
    Some((0.06, 1.6)),
];

const LLAMA2_7B: Row = [
    Some((0.20, 27.0)),
    Some((0.30, 3.4)),
    Some((0.24, 0.0)),
    Some((0.18, 0.0)),
    Some((0.03, 1.6)),
];

const MISTRAL_7B: Row = [
    Some((0.25, 9.0)),
    None,
    Some((0.18, 0.0)),
    Some((0.12, 0.1)),
    Some((0.045, 2.2)),
];

fn column(task: TaskKind, split: FactorSplit) -> Option<usize> {
    match (task, split) {
        (TaskKind::TruthfulqaMc, _) => Some(0),
        (TaskKind::TruthfulqaGen, _) => Some(1),
        (TaskKind::Factor, FactorSplit::Wiki) => Some(2),
        (TaskKind::Factor, FactorSplit::News) => Some(3),
        (TaskKind::HaluevalSum, _) => Some(4),
        (TaskKind::RecallAnalysis, _) => None,
    }
}

fn row(backbone: &str) -> Option<&'static Row> {
    match backbone.to_ascii_lowercase().as_str() {
        "llama-7b" | "llama7b" => Some(&LLAMA_7B),
        "llama2-7b" | "llama-2-7b" | "llama27b" => Some(&LLAMA2_7B),
        "mistral-7b" | "mistral7b" => Some(&MISTRAL_7B),
        // the generic profile mirrors LLaMA-7b
        GENERIC_BACKBONE => Some(&LLAMA_7B),
        _ => None,
    }
}

/// Defaults for `backbone` on `task`. Unknown backbones and missing cells fall
/// back to the generic profile with a warning.
pub fn profile_for(backbone: &str, task: TaskKind, split: FactorSplit) -> Profile {
    let Some(col) = column(task, split) else {
        return Profile {
            eta: 0.1,
            lambda: 0.0,
            alpha: 0.0,
        };
    };
    let cell = match row(backbone) {
        Some(r) => r[col].or_else(|| {
            log::warn!("no {task} defaults for {backbone}; using {GENERIC_BACKBONE}");
            LLAMA_7B[col]
        }),
        None => {
            log::warn!("unknown backbone {backbone:?}; using {GENERIC_BACKBONE} defaults");
            LLAMA_7B[col]
        }
    };
    let (eta, alpha) = cell.expect("generic profile covers every task");
    Profile {
        eta,
        lambda: LAMBDA[col],
        alpha,
    }
}
