//! Multiple-choice scoring on a synthetic fact world: plain hesitation
//! (α = 0) against the contrastive default profile.
//!
//!     cargo run --example truthfulqa_mc

use sh2::harness::{run_with, Dataset, TaskConfig, TaskKind};
use sh2::synthetic::fact_world;

fn main() -> sh2::error::Result<()> {
    let world = fact_world(20, 7);
    let model = world.model()?;
    let data = Dataset::TruthfulqaMc(world.mc_items());

    for alpha in [Some(0.0), None] {
        let cfg = TaskConfig {
            task: TaskKind::TruthfulqaMc,
            alpha,
            workers: 4,
            ..TaskConfig::default()
        };
        let report = run_with(&cfg, &model, &data)?;
        let m = &report.metrics;
        println!(
            "alpha={:<4} MC1={:.3} MC2={:.3} MC3={:.3}",
            report.resolved.alpha,
            m.get("mc1").unwrap_or(f64::NAN),
            m.get("mc2").unwrap_or(f64::NAN),
            m.get("mc3").unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
