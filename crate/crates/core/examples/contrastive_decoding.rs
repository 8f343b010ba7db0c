//! A three-token world where the hesitated context alone prefers the wrong
//! continuation and contrast against the plain context recovers the right one.
//!
//!     cargo run --example contrastive_decoding

use sh2::backend::LanguageModel;
use sh2::contrast::{contrastive_step, generate, score_option, ContrastiveConfig};
use sh2::synthetic::flip_fixture;

fn main() -> sh2::error::Result<()> {
    let f = flip_fixture()?;
    let plain = f.model.next_token_logprobs(&f.plain)?;
    let hes = f.model.next_token_logprobs(&f.hesitated)?;

    println!("alpha  p(a)   p(b)   p(c)   greedy  score(correct)-score(wrong)");
    for alpha in [0.0, 0.1, 0.25, 0.5, 1.0, 3.0, 6.0] {
        let step = contrastive_step(&hes, &plain, alpha)?;
        let p = step.probs();
        let config = ContrastiveConfig {
            alpha,
            max_new_tokens: 1,
            stop: vec![],
        };
        let out = generate(&f.plain, &f.hesitated, &config, &f.model)?;
        let margin = score_option(&f.plain, &f.hesitated, &format!(" {}", f.correct), alpha, &f.model)?
            - score_option(&f.plain, &f.hesitated, &format!(" {}", f.wrong), alpha, &f.model)?;
        println!("{alpha:<6} {:.3}  {:.3}  {:.3}  {:>6}  {margin:+.3}", p[0], p[1], p[2], out.trim());
    }
    Ok(())
}
