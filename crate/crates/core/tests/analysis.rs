use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sh2::analysis::{normalized_recall, read_tagged_corpus, top_eta_words, TaggedDocument};
use sh2::backend::ToyNgramModel;

const TAGS: [&str; 5] = ["NN", "VB", "DT", "IN", "JJ"];

fn etas() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 100.0).collect()
}

/// Words `w0 … w{n-1}` with the given tags and log-probabilities.
fn doc(tags: &[&str], logprobs: &[f64]) -> TaggedDocument {
    let pairs: Vec<(String, &str)> = tags.iter().enumerate().map(|(i, t)| (format!("w{i}"), *t)).collect();
    let mut d = TaggedDocument::from_tagged_words(&pairs);
    for (w, &lp) in d.words.iter_mut().zip(logprobs) {
        w.logprob = Some(lp);
    }
    d
}

fn random_doc(rng: &mut ChaCha8Rng, words: usize, tag_count: usize) -> TaggedDocument {
    let tags: Vec<&str> = (0..words).map(|_| TAGS[rng.gen_range(0..tag_count)]).collect();
    let lps: Vec<f64> = (0..words).map(|_| -rng.gen_range(0.0..10.0f64)).collect();
    doc(&tags, &lps)
}

#[test]
fn hand_computed_single_document() {
    let tags = ["NN", "DT", "VB", "IN", "DT", "NN", "JJ", "IN", "DT", "VB"];
    let mut lps = [-1.0; 10];
    lps[5] = -9.0;
    let m = normalized_recall(&[doc(&tags, &lps)], &[0.1], Some(&["NN".into(), "DT".into(), "RB".into()])).unwrap();
    assert_eq!(m.get("NN", 0), Some(5.0));
    assert_eq!(m.get("DT", 0), Some(0.0));
    assert_eq!(m.get("RB", 0), None);
}

#[test]
fn weighted_identity_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let grid = etas();
    for _ in 0..100 {
        let docs: Vec<TaggedDocument> = (0..rng.gen_range(1..8))
            .map(|_| {
                let w = if rng.gen_bool(0.5) { 100 } else { 200 };
                random_doc(&mut rng, w, 5)
            })
            .collect();
        let all: Vec<String> = TAGS.iter().map(|t| t.to_string()).collect();
        let m = normalized_recall(&docs, &grid, Some(&all)).unwrap();
        for (col, eta) in grid.iter().enumerate() {
            let total: f64 = (0..m.tags.len())
                .filter_map(|row| m.cells[row][col].map(|d| d * m.tag_counts[row] as f64 / m.total_words as f64))
                .sum();
            assert!((total - 1.0).abs() < 1e-6, "eta {eta} gave {total}");
        }
    }
}

#[test]
fn uniform_tag_has_unit_recall() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let docs: Vec<TaggedDocument> = (0..2000).map(|_| random_doc(&mut rng, 100, 4)).collect();
    let m = normalized_recall(&docs, &etas(), None).unwrap();
    for row in &m.cells {
        for cell in row {
            let d = cell.unwrap();
            assert!((d - 1.0).abs() <= 0.15, "delta {d}");
        }
    }
}

proptest! {
    #[test]
    fn top_eta_words_matches_sort_oracle(
        lps in prop::collection::vec((0u32..30).prop_map(|x| -(x as f64) * 0.5), 1..500),
        eta in 0.01f64..0.99,
    ) {
        let tags = vec!["NN"; lps.len()];
        let d = doc(&tags, &lps);
        let k = ((eta * lps.len() as f64).floor() as usize).max(1);
        let mut order: Vec<usize> = (0..lps.len()).collect();
        order.sort_by(|&a, &b| lps[a].partial_cmp(&lps[b]).unwrap().then(a.cmp(&b)));
        let mut want = order[..k].to_vec();
        want.sort();
        prop_assert_eq!(top_eta_words(&d, eta).unwrap(), want);
    }

    #[test]
    fn cells_are_non_negative_and_order_independent(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut docs: Vec<TaggedDocument> = (0..6).map(|_| random_doc(&mut rng, 40, 5)).collect();
        let a = normalized_recall(&docs, &etas(), None).unwrap();
        docs.reverse();
        let b = normalized_recall(&docs, &etas(), None).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.cells.iter().flatten().flatten().all(|&d| d >= 0.0 && d.is_finite()));
    }
}

#[test]
fn equal_probabilities_pick_earliest_words() {
    let d = doc(&["NN"; 20], &[-2.0; 20]);
    assert_eq!(top_eta_words(&d, 0.1).unwrap(), vec![0, 1]);
}

#[test]
fn tagged_corpus_end_to_end_is_deterministic() {
    let tsv = "The\tDT\ncat\tNN\nsat\tVBD\nquietly\tRB\n.\t.\n\nA\tDT\nzebra\tNN\nsat\tVBD\n.\t.\n";
    let model = ToyNgramModel::train(&["The cat sat .", "A cat sat .", "The dog sat quietly ."], 2, 0.1).unwrap();
    let run = || {
        let mut docs: Vec<TaggedDocument> = read_tagged_corpus(tsv)
            .unwrap()
            .iter()
            .map(|d| TaggedDocument::from_tagged_words(d))
            .collect();
        for d in &mut docs {
            d.score(&model).unwrap();
        }
        normalized_recall(&docs, &etas(), None).unwrap()
    };
    let m = run();
    assert_eq!(m, run());
    assert_eq!(m.documents, 2);
    // first words are unscored
    assert_eq!(m.total_words, 7);
    assert!(m.get("NN", 0).unwrap() > 0.0);
}
