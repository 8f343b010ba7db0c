//! Write a toy model and synthetic datasets for every task, ready for the
//! `sh2` binary.
//!
//!     cargo run --example write_benchmark_files -- DIR
//!     sh2 eval --task truthfulqa_mc --data DIR/truthfulqa_mc.jsonl --backend toy:DIR/model.json --out DIR/run

use std::fs;
use std::path::PathBuf;

use sh2::synthetic::{fact_world, planted_corpus, to_jsonl};

fn main() -> sh2::error::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "bench".into()));
    fs::create_dir_all(&dir).expect("create output directory");
    let world = fact_world(20, 7);
    world.model()?.save(&dir.join("model.json"))?;
    let write = |name: &str, text: String| fs::write(dir.join(name), text).expect("write dataset");
    write("corpus.txt", world.corpus.join("\n") + "\n");
    write("truthfulqa_mc.jsonl", to_jsonl(&world.mc_items())?);
    write("truthfulqa_gen.jsonl", to_jsonl(&world.gen_items())?);
    write("factor.jsonl", to_jsonl(&world.factor_items())?);
    write("halueval_sum.jsonl", to_jsonl(&world.halueval_items())?);

    let planted = planted_corpus(200, 3);
    planted.model()?.save(&dir.join("planted_model.json"))?;
    let tsv: String = planted
        .documents
        .iter()
        .map(|d| d.iter().map(|(w, t)| format!("{w}\t{t}\n")).collect::<String>())
        .collect::<Vec<_>>()
        .join("\n");
    write("tagged.tsv", tsv);
    println!("wrote benchmark files to {}", dir.display());
    Ok(())
}
