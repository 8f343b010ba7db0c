//! Completion ranking with the hesitation placed before the prefix.
//!
//!     cargo run --example factor_completion

use sh2::harness::{run_with, Dataset, RecordOutput, TaskConfig, TaskKind};
use sh2::synthetic::fact_world;

fn main() -> sh2::error::Result<()> {
    let world = fact_world(20, 7);
    let model = world.model()?;
    let items = world.factor_items();
    let cfg = TaskConfig {
        task: TaskKind::Factor,
        eta: Some(0.3),
        alpha: Some(0.5),
        ..TaskConfig::default()
    };
    let report = run_with(&cfg, &model, &Dataset::Factor(items.clone()))?;
    for (item, rec) in items.iter().zip(&report.records).take(3) {
        if let RecordOutput::Factor { hesitation, scores, .. } = rec {
            println!("{hesitation}\n{}", item.prefix);
            for (c, s) in item.completions.iter().zip(scores) {
                println!("  {s:>8.3} {c}");
            }
        }
    }
    println!("accuracy {:.3}", report.metrics.get("factor_acc").unwrap_or(f64::NAN));
    Ok(())
}
