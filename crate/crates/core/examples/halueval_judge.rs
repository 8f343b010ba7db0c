//! Yes/No hallucination judging of document summaries.
//!
//!     cargo run --example halueval_judge

use sh2::contrast::{Judge, OptionScoring};
use sh2::harness::{run_with, Dataset, TaskConfig, TaskKind};
use sh2::highlight::HesitationPlan;
use sh2::synthetic::fact_world;

fn main() -> sh2::error::Result<()> {
    let world = fact_world(20, 7);
    let model = world.model()?;
    let items = world.halueval_items();

    let judge = Judge {
        plan: HesitationPlan {
            eta: 0.1,
            ..HesitationPlan::default()
        },
        scoring: OptionScoring::with_alpha(1.6),
        template: Default::default(),
    };
    let item = &items[0];
    for summary in [&item.right_summary, &item.hallucinated_summary] {
        let j = judge.judge(&item.document, summary, &model, 0)?;
        println!("{:?} (yes {:.3}, no {:.3})  {summary}", j.verdict, j.yes_score, j.no_score);
    }

    let cfg = TaskConfig {
        task: TaskKind::HaluevalSum,
        ..TaskConfig::default()
    };
    let report = run_with(&cfg, &model, &Dataset::HaluevalSum(items))?;
    for (name, value) in &report.metrics.values {
        println!("{name:>16} {value:.3}");
    }
    Ok(())
}
