//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with the
//! measured quantity; run with `cargo test --test acceptance -- --nocapture`.

use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sh2::analysis::{normalized_recall, TaggedDocument};
use sh2::backend::{Token, VocabLogProbs};
use sh2::contrast::{contrastive_step, generate, score_option, ContrastiveConfig};
use sh2::highlight::{select_key_tokens, token_probabilities, ScoredSequence, SelectionMode};
use sh2::metrics::{halueval_metrics, mc_scores, Gold, JudgeRecord, MCRecord, ScoredOption};
use sh2::synthetic::{fact_world, flip_fixture, planted_corpus, to_jsonl, CONTENT_TAGS, FUNCTION_TAGS};

fn verdict(id: &str, name: &str, ok: bool, detail: String) {
    println!("{} {id} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} {name}: {detail}");
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.3}s (limit {}s)", t.as_secs_f64(), limit.as_secs()))
}

fn random_dist(rng: &mut ChaCha8Rng, surfaces: &Arc<[String]>) -> VocabLogProbs {
    let w = (0..surfaces.len()).map(|_| rng.gen_range(-12.0..0.0)).collect();
    VocabLogProbs::from_log_weights(w, surfaces.clone())
}

fn vocab(n: usize) -> Arc<[String]> {
    (0..n).map(|i| format!("t{i}")).collect()
}

fn seq(logprobs: &[f64]) -> ScoredSequence {
    let mut at = 0;
    let mut text = String::new();
    let tokens = (0..=logprobs.len())
        .map(|i| {
            let w = format!("w{i}");
            if i > 0 {
                text.push(' ');
                at += 1;
            }
            text.push_str(&w);
            let t = Token {
                id: 0,
                surface: w.clone(),
                start: at,
                end: at + w.len(),
            };
            at += w.len();
            t
        })
        .collect();
    ScoredSequence::new(text, tokens, logprobs.to_vec(), false).unwrap()
}

#[test]
fn a01_alpha_zero_reduces_to_hesitated_distribution() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let v = vocab(rng.gen_range(2..100));
        let with = random_dist(&mut rng, &v);
        let without = random_dist(&mut rng, &v);
        let out = contrastive_step(&with, &without, 0.0).unwrap();
        for (a, b) in out.as_slice().iter().zip(with.as_slice()) {
            worst = worst.max((a - b).abs());
        }
    }
    let (fast, time) = within(start, Duration::from_secs(1));
    verdict(
        "A1",
        "alpha=0 contrast equals the hesitated distribution",
        worst <= 1e-12 && fast,
        format!("max |diff| {worst:e} over 1000 distributions, {time}"),
    );
}

#[test]
fn a02_combined_distributions_normalize() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let v = vocab(rng.gen_range(2..100));
        let with = random_dist(&mut rng, &v);
        let without = random_dist(&mut rng, &v);
        let alpha = rng.gen_range(0.0..=30.0);
        worst = worst.max(contrastive_step(&with, &without, alpha).unwrap().logsumexp().abs());
    }
    let (fast, time) = within(start, Duration::from_secs(1));
    verdict(
        "A2",
        "combined distributions normalize for alpha in [0, 30]",
        worst <= 1e-6 && fast,
        format!("max |logsumexp| {worst:e}, {time}"),
    );
}

#[test]
fn a03_hardest_selection_matches_sort_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for case in 0..500 {
        let n = rng.gen_range(1..=200);
        let lps: Vec<f64> = (0..n).map(|_| -(rng.gen_range(0..50) as f64) * 0.2).collect();
        let eta = [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5][case % 7];
        let k = ((eta * n as f64).floor() as usize).max(1);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lps[a].partial_cmp(&lps[b]).unwrap().then(a.cmp(&b)));
        let mut want: Vec<usize> = order[..k].iter().map(|i| i + 1).collect();
        want.sort();
        let got = select_key_tokens(&seq(&lps), eta, 0.0, case as u64, SelectionMode::Hardest).unwrap();
        mismatches += usize::from(got.indices != want);
    }
    let (fast, time) = within(start, Duration::from_secs(5));
    verdict(
        "A3",
        "hardest-token selection equals a full-sort oracle",
        mismatches == 0 && fast,
        format!("{mismatches}/500 mismatches, {time}"),
    );
}

#[test]
fn a04_retention_count_grid() {
    let mut checked = 0;
    let mut wrong = 0;
    for n in 1..=50usize {
        let s = seq(&vec![-1.0; n]);
        for ei in 1..100 {
            let eta = ei as f64 / 100.0;
            for li in 0..=20 {
                let lambda = li as f64 / 20.0;
                let pool = ((eta * n as f64).floor() as usize).max(1);
                let want = (((1.0 - lambda) * pool as f64).floor() as usize).max(1);
                let got = select_key_tokens(&s, eta, lambda, (n * ei + li) as u64, SelectionMode::Hardest)
                    .unwrap()
                    .indices
                    .len();
                wrong += usize::from(got != want);
                checked += 1;
            }
        }
    }
    verdict(
        "A4",
        "retained count is max(1, floor((1-lambda) * max(1, floor(eta*n))))",
        wrong == 0,
        format!("{wrong}/{checked} grid points differ"),
    );
}

#[test]
fn a05_mc_fixture_and_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut oracle_misses = 0;
    for _ in 0..2000 {
        let nt = rng.gen_range(1..=3);
        let nf = rng.gen_range(1..=6 - nt);
        let scores: Vec<f64> = (0..nt + nf).map(|_| -(rng.gen_range(0..4) as f64)).collect();
        let (t, f) = scores.split_at(nt);
        let rec = MCRecord {
            question: String::new(),
            true_options: t.iter().map(|&s| ScoredOption::new("t", s)).collect(),
            false_options: f.iter().map(|&s| ScoredOption::new("f", s)).collect(),
        };
        let got = mc_scores(&[rec]).unwrap();
        let beats = |x: f64| f.iter().all(|&y| x > y);
        let mc1 = f64::from(u8::from(beats(t[0])));
        let mc3 = t.iter().filter(|&&x| beats(x)).count() as f64 / nt as f64;
        let pt: f64 = t.iter().map(|x| x.exp()).sum();
        let pa: f64 = scores.iter().map(|x| x.exp()).sum();
        if got.mc1 != mc1 || got.mc3 != mc3 || (got.mc2 - pt / pa).abs() > 1e-12 {
            oracle_misses += 1;
        }
    }
    let fixture = MCRecord {
        question: String::new(),
        true_options: vec![ScoredOption::new("t", -1.0)],
        false_options: vec![ScoredOption::new("f1", -2.0), ScoredOption::new("f2", -3.0)],
    };
    let m = mc_scores(&[fixture]).unwrap();
    let ok = oracle_misses == 0 && m.mc1 == 1.0 && m.mc3 == 1.0 && (m.mc2 - 0.7054).abs() <= 1e-4;
    verdict(
        "A5",
        "MC fixture (true -1; false -2, -3) and exhaustive oracle",
        ok,
        format!(
            "oracle misses {oracle_misses}/2000; MC1={} MC3={} MC2={:.4} (stated target 0.7054 ± 1e-4; \
             e^-1/(e^-1+e^-2+e^-3) = 0.6652)",
            m.mc1, m.mc3, m.mc2
        ),
    );
}

#[test]
fn a06_published_f1_arithmetic() {
    let mut recs = Vec::new();
    for (gold, predicted, n) in [
        (Gold::Hallucinated, sh2::contrast::Verdict::Yes, 1126),
        (Gold::Hallucinated, sh2::contrast::Verdict::No, 8874),
        (Gold::Right, sh2::contrast::Verdict::Yes, 1520),
        (Gold::Right, sh2::contrast::Verdict::No, 8480),
    ] {
        recs.extend(std::iter::repeat_n(JudgeRecord { gold, predicted }, n));
    }
    let m = halueval_metrics(&recs).unwrap();
    let ok = (m.precision - 0.4255).abs() < 5e-4 && (m.recall - 0.1126).abs() < 5e-4 && (m.f1 - 0.1781).abs() <= 5e-4;
    verdict(
        "A6",
        "F1 from P=0.4255, R=0.1126",
        ok,
        format!("P={:.4} R={:.4} F1={:.4} (target 0.1781 ± 5e-4)", m.precision, m.recall, m.f1),
    );
}

fn tagged(tags: &[&str], lps: &[f64]) -> TaggedDocument {
    let pairs: Vec<(String, &str)> = tags.iter().enumerate().map(|(i, t)| (format!("w{i}"), *t)).collect();
    let mut d = TaggedDocument::from_tagged_words(&pairs);
    for (w, &lp) in d.words.iter_mut().zip(lps) {
        w.logprob = Some(lp);
    }
    d
}

#[test]
fn a07_recall_hand_example_and_weighted_identity() {
    let start = Instant::now();
    let tags = ["NN", "DT", "VB", "IN", "DT", "NN", "JJ", "IN", "DT", "VB"];
    let mut lps = [-1.0; 10];
    lps[0] = -7.0;
    let hand = normalized_recall(&[tagged(&tags, &lps)], &[0.1], Some(&["NN".to_string()]))
        .unwrap()
        .get("NN", 0);

    let etas: Vec<f64> = (1..=10).map(|i| i as f64 / 100.0).collect();
    let all: Vec<String> = ["NN", "VB", "DT", "IN", "JJ", "RB"].iter().map(|s| s.to_string()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let docs: Vec<TaggedDocument> = (0..rng.gen_range(1..10))
            .map(|_| {
                let w = 100 * rng.gen_range(1..=3);
                let t: Vec<&str> = (0..w).map(|_| all[rng.gen_range(0..all.len())].as_str()).collect();
                let l: Vec<f64> = (0..w).map(|_| -rng.gen_range(0.0..12.0f64)).collect();
                tagged(&t, &l)
            })
            .collect();
        let m = normalized_recall(&docs, &etas, Some(&all)).unwrap();
        for col in 0..etas.len() {
            let s: f64 = (0..m.tags.len())
                .filter_map(|r| m.cells[r][col].map(|d| d * m.tag_counts[r] as f64 / m.total_words as f64))
                .sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    let (fast, time) = within(start, Duration::from_secs(10));
    verdict(
        "A7",
        "recall hand example and weighted identity",
        hand == Some(5.0) && worst <= 1e-6 && fast,
        format!("hand example {hand:?} (want 5.0); identity max error {worst:e} on 100 corpora; {time}"),
    );
}

#[test]
fn a08_content_words_dominate_the_hardest_words() {
    let corpus = planted_corpus(200, 8);
    let model = corpus.model().unwrap();
    let etas: Vec<f64> = (1..=10).map(|i| i as f64 / 100.0).collect();

    let mut planted_hits = 0;
    let mut docs = Vec::new();
    for (words, &at) in corpus.documents.iter().zip(&corpus.planted) {
        let text: Vec<&str> = words.iter().map(|w| w.0.as_str()).collect();
        let scored = token_probabilities(&text.join(" "), &model).unwrap();
        let keys = select_key_tokens(&scored, 1.0 / scored.num_scored() as f64, 0.0, 0, SelectionMode::Hardest).unwrap();
        planted_hits += usize::from(keys.indices.contains(&at));

        let class = |tag: &str| {
            if CONTENT_TAGS.contains(&tag) {
                "content"
            } else if FUNCTION_TAGS.contains(&tag) {
                "function"
            } else {
                "other"
            }
        };
        let pairs: Vec<(&str, &str)> = words.iter().map(|(w, t)| (w.as_str(), class(t))).collect();
        let mut d = TaggedDocument::from_tagged_words(&pairs);
        d.score(&model).unwrap();
        docs.push(d);
    }
    let m = normalized_recall(&docs, &etas, Some(&["content".into(), "function".into()])).unwrap();
    let rows: Vec<String> = etas
        .iter()
        .enumerate()
        .map(|(i, e)| format!("{e:.2}:{:.2}>{:.2}", m.get("content", i).unwrap(), m.get("function", i).unwrap()))
        .collect();
    let separated = (0..etas.len()).all(|i| m.get("content", i).unwrap() > m.get("function", i).unwrap());
    let recall = planted_hits as f64 / corpus.documents.len() as f64;
    verdict(
        "A8",
        "content tags outrank function tags; planted words recovered",
        separated && recall >= 0.95,
        format!("planted recall {recall:.3}; delta content>function {}", rows.join(" ")),
    );
}

#[test]
fn a09_contrast_flips_the_greedy_choice() {
    let f = flip_fixture().unwrap();
    let tokens = ["a", "b", "c"];
    let pick = |alpha: f64| -> (String, &'static str) {
        let scores: Vec<f64> = tokens
            .iter()
            .map(|t| {
                (1.0 + alpha) * f.model.conditional_logprob(&["a", "b"], t)
                    - alpha * f.model.conditional_logprob(&["a"], t)
            })
            .collect();
        let best = (0..3).fold(0, |b, i| if scores[i] > scores[b] { i } else { b });
        let config = ContrastiveConfig {
            alpha,
            max_new_tokens: 1,
            stop: vec![],
        };
        (generate(&f.plain, &f.hesitated, &config, &f.model).unwrap(), tokens[best])
    };
    let (greedy, enumerated) = pick(0.0);
    let mut ok = greedy == f.wrong && enumerated == f.wrong;
    let mut flipped = Vec::new();
    for alpha in [1.0, 1.5, 2.0, 4.0, 8.0, 16.0, 30.0] {
        let (g, e) = pick(alpha);
        ok &= g == f.correct && e == f.correct;
        let margin = score_option(&f.plain, &f.hesitated, &f.correct, alpha, &f.model).unwrap()
            - score_option(&f.plain, &f.hesitated, &f.wrong, alpha, &f.model).unwrap();
        ok &= margin > 0.0;
        flipped.push(format!("{alpha}->{g}"));
    }
    verdict(
        "A9",
        "hesitated greedy picks the wrong token, contrast picks the right one",
        ok,
        format!("alpha 0 -> {greedy}; {}", flipped.join(" ")),
    );
}

fn eval_hash(dir: &std::path::Path, out: &str, workers: usize) -> String {
    let status = Command::new(env!("CARGO_BIN_EXE_sh2"))
        .args(["eval", "--task", "truthfulqa_mc", "--seed", "13", "--lambda", "0.33"])
        .arg("--data")
        .arg(dir.join("mc.jsonl"))
        .arg("--backend")
        .arg(format!("toy:{}", dir.join("model.json").display()))
        .args(["--workers", &workers.to_string()])
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .expect("run sh2");
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join(out).join("report.json")).unwrap()).unwrap();
    report["content_hash"].as_str().unwrap().to_string()
}

#[test]
fn a10_end_to_end_runs_are_reproducible() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let world = fact_world(20, 10);
    world.model().unwrap().save(&dir.path().join("model.json")).unwrap();
    std::fs::write(dir.path().join("mc.jsonl"), to_jsonl(&world.mc_items()).unwrap()).unwrap();

    let first = eval_hash(dir.path(), "run1", 1);
    let second = eval_hash(dir.path(), "run2", 1);
    let parallel = eval_hash(dir.path(), "run8", 8);
    let (fast, time) = within(start, Duration::from_secs(30));
    verdict(
        "A10",
        "two seeded runs and a 1- vs 8-worker run give one report hash",
        first == second && first == parallel && fast,
        format!("{} / {} / {}; {time}", &first[..12], &second[..12], &parallel[..12]),
    );
}
