//! Score a question token by token, pick its key tokens under each
//! selection mode and show every hesitation manner.
//!
//!     cargo run --example key_tokens

use sh2::highlight::{
    build_hesitation, compose_input, select_key_tokens, token_probabilities, Manner, Placement, SelectionMode,
};
use sh2::synthetic::fact_world;

fn main() -> sh2::error::Result<()> {
    let world = fact_world(20, 7);
    let model = world.model()?;
    let question = "people say the snow is purple , what color is the snow ?";

    let scored = token_probabilities(question, &model)?;
    for (i, lp) in scored.scored() {
        println!("{:>3} {:>12} {lp:>8.3}", i, scored.tokens[i].surface);
    }

    for mode in [SelectionMode::Hardest, SelectionMode::Easiest, SelectionMode::Random] {
        let keys = select_key_tokens(&scored, 0.25, 0.0, 11, mode)?;
        println!("{mode:?}: {:?}", keys.surfaces(&scored));
    }

    let keys = select_key_tokens(&scored, 0.4, 0.33, 11, SelectionMode::Hardest)?;
    for manner in [Manner::KeyTokens, Manner::Pauses(3), Manner::Repetition] {
        let h = build_hesitation(&keys, &scored, manner, Placement::Append)?;
        println!("--- {manner}\n{}", compose_input(question, &h));
    }
    Ok(())
}
