//! Sweeps over selection mode, hesitation manner and contrast strength on
//! the synthetic multiple-choice set.
//!
//!     cargo run --release --example ablations -- [BACKEND]
//!
//! BACKEND defaults to a toy bigram model, which only sees the last token of
//! the prompt, so every row comes out equal. Point it at `http:URL` to sweep
//! a real model.

use std::sync::Arc;

use sh2::backend::{BackendSpec, LanguageModel};
use sh2::harness::{run_with, Dataset, TaskConfig, TaskKind};
use sh2::highlight::{Manner, SelectionMode};
use sh2::synthetic::fact_world;

fn mc2(cfg: &TaskConfig, model: &dyn LanguageModel, data: &Dataset) -> sh2::error::Result<f64> {
    Ok(run_with(cfg, model, data)?.metrics.get("mc2").unwrap_or(f64::NAN))
}

fn main() -> sh2::error::Result<()> {
    let world = fact_world(24, 5);
    let model: Arc<dyn LanguageModel> = match std::env::args().nth(1) {
        Some(spec) => spec.parse::<BackendSpec>()?.open(None)?,
        None => Arc::new(world.model()?),
    };
    let model = &*model;
    let data = Dataset::TruthfulqaMc(world.mc_items());
    let base = TaskConfig {
        task: TaskKind::TruthfulqaMc,
        workers: 4,
        ..TaskConfig::default()
    };

    println!("mode");
    for mode in [SelectionMode::Hardest, SelectionMode::Easiest, SelectionMode::Random] {
        let cfg = TaskConfig { mode, ..base.clone() };
        println!("  {mode:?}: MC2 {:.4}", mc2(&cfg, model, &data)?);
    }
    println!("manner");
    for manner in [Manner::KeyTokens, Manner::Pauses(3), Manner::Repetition] {
        let cfg = TaskConfig { manner, ..base.clone() };
        println!("  {manner}: MC2 {:.4}", mc2(&cfg, model, &data)?);
    }
    println!("alpha");
    for alpha in [0.0, 0.5, 1.0, 3.0, 6.0, 12.0] {
        let cfg = TaskConfig {
            alpha: Some(alpha),
            ..base.clone()
        };
        println!("  {alpha}: MC2 {:.4}", mc2(&cfg, model, &data)?);
    }
    Ok(())
}
