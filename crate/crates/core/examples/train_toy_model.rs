//! Train the toy n-gram backend, save it, reload it and score a sentence.
//!
//!     cargo run --example train_toy_model -- [OUT.json]

use sh2::backend::{LanguageModel, ToyNgramModel};
use sh2::synthetic::fact_world;

fn main() -> sh2::error::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "toy_model.json".into());
    let world = fact_world(20, 7);
    let model = ToyNgramModel::train(&world.corpus, 3, 0.1)?;
    model.save(out.as_ref())?;
    let model = ToyNgramModel::load(out.as_ref())?;
    println!("saved {out}: order {}, {} types", model.order(), model.vocab().len());

    let fact = &world.facts[0];
    for color in [&fact.truth, &fact.myth, &fact.other] {
        let text = format!("the {} is {color} .", fact.subject);
        let scored = model.score_continuation("", &text)?;
        let total: f64 = scored.iter().map(|t| t.logprob).sum();
        println!("{total:>8.3}  {text}");
    }
    Ok(())
}
