use proptest::prelude::*;
use sh2::backend::{ToyNgramModel, Token};
use sh2::highlight::{
    build_hesitation, compose_input, pool_size, retained_count, select_key_tokens, token_probabilities,
    HesitationPlan, Manner, Placement, ScoredSequence, SelectionMode,
};

/// Standalone sequence `w0 w1 …` with the given scores for tokens 1..
fn seq(logprobs: &[f64]) -> ScoredSequence {
    let words: Vec<String> = (0..=logprobs.len()).map(|i| format!("w{i}")).collect();
    let mut at = 0;
    let tokens = words
        .iter()
        .map(|w| {
            let t = Token {
                id: 0,
                surface: w.clone(),
                start: at,
                end: at + w.len(),
            };
            at += w.len() + 1;
            t
        })
        .collect();
    ScoredSequence::new(words.join(" "), tokens, logprobs.to_vec(), false).unwrap()
}

/// Hardest-first selection by sorting every scored position.
fn sort_oracle(logprobs: &[f64], eta: f64) -> Vec<usize> {
    let n = logprobs.len();
    let k = ((eta * n as f64).floor() as usize).max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| logprobs[a].partial_cmp(&logprobs[b]).unwrap().then(a.cmp(&b)));
    let mut picked: Vec<usize> = order[..k].iter().map(|i| i + 1).collect();
    picked.sort();
    picked
}

fn logprob_vec() -> impl Strategy<Value = Vec<f64>> {
    // a coarse grid forces frequent ties
    prop::collection::vec((0u32..40).prop_map(|x| -(x as f64) * 0.25), 1..200)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn hardest_matches_sort_oracle(lps in logprob_vec(), step in 1usize..50) {
        let eta = step as f64 / 100.0;
        let keys = select_key_tokens(&seq(&lps), eta, 0.0, 0, SelectionMode::Hardest).unwrap();
        prop_assert_eq!(keys.indices, sort_oracle(&lps, eta));
    }

    #[test]
    fn selection_contract(lps in logprob_vec(), eta in 0.01f64..0.99, lambda in 0.0f64..=1.0, seed: u64) {
        let s = seq(&lps);
        for mode in [SelectionMode::Hardest, SelectionMode::Easiest, SelectionMode::Random] {
            let a = select_key_tokens(&s, eta, lambda, seed, mode).unwrap();
            let b = select_key_tokens(&s, eta, lambda, seed, mode).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.indices.len(), retained_count(pool_size(lps.len(), eta), lambda));
            prop_assert!(a.indices.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(a.indices.iter().all(|&i| (1..=lps.len()).contains(&i)));
        }
    }

    #[test]
    fn hardest_selected_never_easier_than_unselected(lps in logprob_vec(), eta in 0.01f64..0.99) {
        let keys = select_key_tokens(&seq(&lps), eta, 0.0, 3, SelectionMode::Hardest).unwrap();
        let worst_selected = keys.indices.iter().map(|&i| lps[i - 1]).fold(f64::NEG_INFINITY, f64::max);
        for i in 1..=lps.len() {
            if !keys.indices.contains(&i) {
                prop_assert!(lps[i - 1] >= worst_selected);
            }
        }
    }

    #[test]
    fn hesitation_keeps_source_order(lps in logprob_vec(), eta in 0.01f64..0.99, seed: u64) {
        let s = seq(&lps);
        let keys = select_key_tokens(&s, eta, 0.5, seed, SelectionMode::Random).unwrap();
        let h = build_hesitation(&keys, &s, Manner::KeyTokens, Placement::Append).unwrap();
        let body = h.text.strip_prefix("Pondering: ").unwrap().strip_suffix('.').unwrap();
        let positions: Vec<usize> = body.split(' ').map(|w| w[1..].parse().unwrap()).collect();
        prop_assert_eq!(positions, keys.indices);
    }
}

#[test]
fn retention_grid_is_exact() {
    let etas: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
    let lambdas: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    for n in 1..=50usize {
        let s = seq(&vec![-1.0; n]);
        for &eta in &etas {
            for &lambda in lambdas.iter().step_by(5) {
                let want = (((1.0 - lambda) * (((eta * n as f64).floor() as usize).max(1)) as f64).floor() as usize).max(1);
                let got = select_key_tokens(&s, eta, lambda, 1, SelectionMode::Hardest).unwrap();
                assert_eq!(got.indices.len(), want, "n={n} eta={eta} lambda={lambda}");
            }
        }
    }
}

#[test]
fn worked_selection_examples() {
    let s = seq(&[-0.1, -2.3, -0.7, -3.0]);
    let hard = select_key_tokens(&s, 0.5, 0.0, 0, SelectionMode::Hardest).unwrap();
    assert_eq!(hard.indices, vec![2, 4]);
    let easy = select_key_tokens(&s, 0.5, 0.0, 0, SelectionMode::Easiest).unwrap();
    assert_eq!(easy.indices, vec![1, 3]);
    assert_eq!(select_key_tokens(&s, 0.5, 1.0, 0, SelectionMode::Hardest).unwrap().indices.len(), 1);

    let question = seq(&[-1.0; 11]);
    assert_eq!(select_key_tokens(&question, 0.1, 0.0, 0, SelectionMode::Hardest).unwrap().indices.len(), 1);
}

#[test]
fn repeated_token_probability_from_counts() {
    // a→a seen 8 times, never a→b; δ=1 over {a, b} gives 9/10
    let model = ToyNgramModel::train(&["a a a a a a a a a", "b"], 2, 1.0).unwrap();
    let s = token_probabilities("a a", &model).unwrap();
    assert_eq!(s.logprobs().len(), 1);
    assert!((s.logprobs()[0] - 0.9f64.ln()).abs() < 1e-12);
    assert_eq!(s, token_probabilities("a a", &model).unwrap());
}

#[test]
fn hesitation_strings() {
    let tokens = vec![
        Token { id: 0, surface: "By".into(), start: 0, end: 2 },
        Token { id: 0, surface: "Schmidt".into(), start: 3, end: 10 },
        Token { id: 0, surface: "in".into(), start: 11, end: 13 },
        Token { id: 0, surface: "1936".into(), start: 14, end: 18 },
    ];
    let s = ScoredSequence::new("By Schmidt in 1936".into(), tokens, vec![-5.0, -0.1, -4.0], false).unwrap();
    let keys = select_key_tokens(&s, 0.7, 0.0, 0, SelectionMode::Hardest).unwrap();
    let h = build_hesitation(&keys, &s, Manner::KeyTokens, Placement::Append).unwrap();
    assert_eq!(h.text, "Pondering: Schmidt 1936.");
    let p = build_hesitation(&keys, &s, Manner::Pauses(6), Placement::Append).unwrap();
    assert_eq!(p.text, ". . . . . .");
    let r = build_hesitation(&keys, &s, Manner::Repetition, Placement::Prepend).unwrap();
    assert_eq!(r.text, "By Schmidt in 1936");
    assert_eq!(compose_input("Doc.", &r), "By Schmidt in 1936\nDoc.");
}

#[test]
fn planted_rare_words_are_recovered() {
    let corpus = sh2::synthetic::planted_corpus(200, 11);
    let model = corpus.model().unwrap();
    let mut hits = 0;
    for (doc, &at) in corpus.documents.iter().zip(&corpus.planted) {
        let text: Vec<&str> = doc.iter().map(|w| w.0.as_str()).collect();
        let s = token_probabilities(&text.join(" "), &model).unwrap();
        // one planted word per document: the smallest η with a pool of one
        let keys = select_key_tokens(&s, 1.0 / s.num_scored() as f64, 0.0, 0, SelectionMode::Hardest).unwrap();
        hits += usize::from(keys.indices == vec![at]);
    }
    assert!(hits as f64 >= 0.95 * 200.0, "recovered {hits}/200");
}

#[test]
fn plan_is_order_independent() {
    let model = ToyNgramModel::train(&["the cat sat on the mat", "a dog sat"], 2, 0.1).unwrap();
    let plan = HesitationPlan {
        eta: 0.5,
        lambda: 0.5,
        seed: 17,
        mode: SelectionMode::Random,
        ..HesitationPlan::default()
    };
    let texts = ["the cat sat on a dog", "a dog sat on the mat", "the mat sat"];
    let forward: Vec<_> = texts.iter().enumerate().map(|(i, t)| plan.hesitate(t, &model, i as u64).unwrap()).collect();
    let backward: Vec<_> = texts
        .iter()
        .enumerate()
        .rev()
        .map(|(i, t)| plan.hesitate(t, &model, i as u64).unwrap())
        .collect();
    assert!(forward.iter().eq(backward.iter().rev()));
}
