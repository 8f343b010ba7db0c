//! Serve a toy model over the JSON wire protocol and query it with the
//! HTTP client, as one would a remote model server.
//!
//!     cargo run --example wire_backend

use std::sync::Arc;

use sh2::backend::{serve, HttpBackend, HttpConfig, LanguageModel};
use sh2::contrast::score_option;
use sh2::synthetic::fact_world;

fn main() -> sh2::error::Result<()> {
    let world = fact_world(20, 7);
    let local = world.model()?;
    let server = serve(Arc::new(local.clone()), "127.0.0.1:0", 4, Some(512))?;
    let remote = HttpBackend::new(HttpConfig::from_env(&server.url()))?;
    println!("serving {} at {}", remote.name(), server.url());

    let text = "the sky is blue .";
    let a = local.score_continuation("", text)?;
    let b = remote.score_continuation("", text)?;
    for (x, y) in a.iter().zip(&b) {
        println!("{:>6} local {:>8.4} remote {:>8.4}", x.token.surface, x.logprob, y.logprob);
    }

    let next = remote.next_token_logprobs("the sky is")?;
    let best = next.argmax();
    println!("next after 'the sky is': {:?}", next.surface(best));

    let s = score_option("Q: color of sky ?\nA:", "Q: color of sky ?\nPondering: sky.\nA:", " blue", 2.0, &remote)?;
    println!("contrastive score of ' blue': {s:.4}");
    Ok(())
}
