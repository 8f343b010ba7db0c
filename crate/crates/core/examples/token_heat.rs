//! Write an HTML heat map of token probabilities.
//!
//!     cargo run --example token_heat -- [OUT.html]

use sh2::harness::emit_token_heat;
use sh2::highlight::token_probabilities;
use sh2::synthetic::fact_world;

fn main() -> sh2::error::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "heat.html".into());
    let world = fact_world(20, 7);
    let model = world.model()?;
    let text = "the sky is blue . people say the grass is purple . the snow is white .";
    let scored = token_probabilities(text, &model)?;
    emit_token_heat(&scored, out.as_ref())?;
    println!("wrote {out}");
    Ok(())
}
