//! Which parts of speech dominate the hardest words? Runs the recall study
//! on a corpus with rare nouns and adjectives planted in it.
//!
//!     cargo run --example pos_recall

use sh2::analysis::{normalized_recall, TaggedDocument};
use sh2::synthetic::planted_corpus;

fn main() -> sh2::error::Result<()> {
    let corpus = planted_corpus(200, 3);
    let model = corpus.model()?;
    let mut docs: Vec<TaggedDocument> = corpus.documents.iter().map(|d| TaggedDocument::from_tagged_words(d)).collect();
    for d in &mut docs {
        d.score(&model)?;
    }
    let etas: Vec<f64> = (1..=10).map(|i| i as f64 / 100.0).collect();
    let m = normalized_recall(&docs, &etas, None)?;

    print!("{:>5}", "tag");
    for e in &m.etas {
        print!(" {e:>5.2}");
    }
    println!();
    for (t, tag) in m.tags.iter().enumerate() {
        print!("{tag:>5}");
        for cell in &m.cells[t] {
            match cell {
                Some(d) => print!(" {d:>5.2}"),
                None => print!(" {:>5}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
