//! Small deterministic worlds for examples, smoke runs and tests: a colour
//! fact base with a recurring misconception, a planted-word corpus for the
//! recall study, and a fixture where contrast flips the greedy choice.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backend::ToyNgramModel;
use crate::error::Result;
use crate::harness::{FactorItem, GenItem, HaluEvalItem, McItem};

const SUBJECTS: &[&str] = &[
    "sky", "grass", "snow", "coal", "blood", "sun", "sea", "cloud", "rose", "lime", "ink", "milk", "leaf", "lemon",
    "plum", "salt", "rust", "ash", "pearl", "moss", "cherry", "slate", "wheat", "tar",
];
const COLORS: &[&str] = &["blue", "green", "white", "black", "red", "yellow", "purple", "grey", "brown", "orange"];

/// One fact: `subject` has colour `truth`, and folklore wrongly says `myth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub subject: String,
    pub truth: String,
    pub myth: String,
    pub other: String,
}

#[derive(Debug, Clone)]
pub struct FactWorld {
    pub facts: Vec<Fact>,
    /// Training sentences: each truth stated three times, each myth twice.
    pub corpus: Vec<String>,
}

/// Builds `n` facts (at most 24) deterministically from `seed`.
pub fn fact_world(n: usize, seed: u64) -> FactWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let facts: Vec<Fact> = SUBJECTS
        .iter()
        .take(n)
        .map(|s| {
            let picks: Vec<&&str> = COLORS.choose_multiple(&mut rng, 3).collect();
            Fact {
                subject: s.to_string(),
                truth: picks[0].to_string(),
                myth: picks[1].to_string(),
                other: picks[2].to_string(),
            }
        })
        .collect();
    let mut corpus = Vec::new();
    for f in &facts {
        for _ in 0..3 {
            corpus.push(format!("the {} is {} .", f.subject, f.truth));
        }
        for _ in 0..2 {
            corpus.push(format!("people say the {} is {} .", f.subject, f.myth));
        }
        corpus.push(format!(
            "Q: what color is the {} ?\nA: the {} is {} .",
            f.subject, f.subject, f.truth
        ));
    }
    FactWorld { facts, corpus }
}

impl FactWorld {
    /// Bigram model over the world's corpus.
    pub fn model(&self) -> Result<ToyNgramModel> {
        ToyNgramModel::train(&self.corpus, 2, 0.05)
    }

    fn question(f: &Fact) -> String {
        format!("what color is the {} ?", f.subject)
    }

    pub fn mc_items(&self) -> Vec<McItem> {
        self.facts
            .iter()
            .map(|f| McItem {
                question: Self::question(f),
                best_answer: format!("the {} is {} .", f.subject, f.truth),
                correct_answers: vec![format!("{} .", f.truth)],
                incorrect_answers: vec![
                    format!("the {} is {} .", f.subject, f.myth),
                    format!("the {} is {} .", f.subject, f.other),
                ],
            })
            .collect()
    }

    pub fn gen_items(&self) -> Vec<GenItem> {
        self.facts.iter().map(|f| GenItem { question: Self::question(f) }).collect()
    }

    pub fn factor_items(&self) -> Vec<FactorItem> {
        self.facts
            .iter()
            .map(|f| FactorItem {
                prefix: format!("everyone knows that the {} is", f.subject),
                completions: vec![format!(" {} .", f.truth), format!(" {} .", f.myth), format!(" {} .", f.other)],
                correct_index: 0,
            })
            .collect()
    }

    pub fn halueval_items(&self) -> Vec<HaluEvalItem> {
        self.facts
            .iter()
            .map(|f| HaluEvalItem {
                document: format!(
                    "the {s} is {t} . people say the {s} is {m} . the {s} is {t} .",
                    s = f.subject,
                    t = f.truth,
                    m = f.myth
                ),
                right_summary: format!("the {} is {} .", f.subject, f.truth),
                hallucinated_summary: format!("the {} is {} .", f.subject, f.other),
            })
            .collect()
    }
}

/// Serializes records one JSON object per line.
pub fn to_jsonl<T: serde::Serialize>(items: &[T]) -> Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    Ok(out)
}

const DETERMINERS: &[&str] = &["the", "a"];
const ADJECTIVES: &[&str] = &["big", "small", "old", "red"];
const NOUNS: &[&str] = &["cat", "dog", "house", "tree", "car", "bird"];
const VERBS: &[&str] = &["sits", "sleeps", "waits", "stands"];
const PREPOSITIONS: &[&str] = &["near", "under", "behind"];
const RARE_NOUNS: &[&str] = &["zygote", "quasar", "fjord", "obelisk", "nebula", "glacier", "tundra", "sphinx"];
const RARE_ADJECTIVES: &[&str] = &["ochre", "gaunt", "vivid", "feral", "lucid", "arcane"];

/// Tags treated as content words in the recall study.
pub const CONTENT_TAGS: &[&str] = &["NN", "JJ", "VBZ"];
/// Tags treated as function words in the recall study.
pub const FUNCTION_TAGS: &[&str] = &["DT", "IN"];

/// Pre-tagged documents whose planted words are rare for the model trained
/// on `training`.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub training: Vec<String>,
    pub documents: Vec<Vec<(String, String)>>,
    /// Word index of the planted word in each document.
    pub planted: Vec<usize>,
}

impl PlantedCorpus {
    pub fn model(&self) -> Result<ToyNgramModel> {
        ToyNgramModel::train(&self.training, 2, 0.01)
    }
}

fn sentence(rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
    let mut pick = |words: &[&str], tag: &str| (words[rng.gen_range(0..words.len())].to_string(), tag.to_string());
    vec![
        pick(DETERMINERS, "DT"),
        pick(ADJECTIVES, "JJ"),
        pick(NOUNS, "NN"),
        pick(VERBS, "VBZ"),
        pick(PREPOSITIONS, "IN"),
        pick(DETERMINERS, "DT"),
        pick(NOUNS, "NN"),
        (".".to_string(), ".".to_string()),
    ]
}

/// `docs` documents of three template sentences each, with one noun or
/// adjective per document replaced by a word the model has seen only once.
pub fn planted_corpus(docs: usize, seed: u64) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let join = |s: &[(String, String)]| s.iter().map(|w| w.0.as_str()).collect::<Vec<_>>().join(" ");

    let mut training: Vec<String> = (0..2000).map(|_| join(&sentence(&mut rng))).collect();
    for rare in RARE_NOUNS {
        training.push(format!("the {rare} sits near the cat ."));
    }
    for rare in RARE_ADJECTIVES {
        training.push(format!("a {rare} dog waits near a tree ."));
    }

    let mut documents = Vec::with_capacity(docs);
    let mut planted = Vec::with_capacity(docs);
    for _ in 0..docs {
        let mut doc: Vec<(String, String)> = (0..3).flat_map(|_| sentence(&mut rng)).collect();
        let slots: Vec<usize> = (0..doc.len()).filter(|&i| matches!(doc[i].1.as_str(), "NN" | "JJ")).collect();
        let at = slots[rng.gen_range(0..slots.len())];
        let pool = if doc[at].1 == "NN" { RARE_NOUNS } else { RARE_ADJECTIVES };
        doc[at].0 = pool[rng.gen_range(0..pool.len())].to_string();
        documents.push(doc);
        planted.push(at);
    }
    PlantedCorpus {
        training,
        documents,
        planted,
    }
}

/// A bigram model over `a`, `b`, `c` where the plain context ends in `a`
/// and the hesitated one in `b`:
///
/// | next after | a | b | c |
/// |------------|---|---|---|
/// | `a`        | 6 | 2 | 2 |
/// | `b`        | 5 | 1 | 4 |
///
/// With the hesitation alone `a` wins, but contrasting against the plain
/// context promotes `c` for any α above about 0.26.
#[derive(Debug, Clone)]
pub struct FlipFixture {
    pub model: ToyNgramModel,
    pub plain: String,
    pub hesitated: String,
    pub correct: String,
    pub wrong: String,
}

pub fn flip_fixture() -> Result<FlipFixture> {
    let mut corpus = Vec::new();
    for (text, n) in [("a a", 6), ("a b", 2), ("a c", 2), ("b a", 5), ("b b", 1), ("b c", 4)] {
        corpus.extend(std::iter::repeat_n(text, n));
    }
    Ok(FlipFixture {
        model: ToyNgramModel::train(&corpus, 2, 1e-9)?,
        plain: "a".into(),
        hesitated: "a\nb".into(),
        correct: "c".into(),
        wrong: "a".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worlds_are_deterministic() {
        let a = fact_world(20, 1);
        let b = fact_world(20, 1);
        assert_eq!(a.facts, b.facts);
        assert_eq!(a.mc_items().len(), 20);
        for f in &a.facts {
            assert!(f.truth != f.myth && f.truth != f.other && f.myth != f.other);
        }
        assert_ne!(fact_world(20, 2).facts, a.facts);
    }

    #[test]
    fn planted_words_are_content() {
        let c = planted_corpus(30, 4);
        assert_eq!(c.documents.len(), 30);
        for (doc, &at) in c.documents.iter().zip(&c.planted) {
            assert_eq!(doc.len(), 24);
            assert!(CONTENT_TAGS.contains(&doc[at].1.as_str()));
            assert!(RARE_NOUNS.contains(&doc[at].0.as_str()) || RARE_ADJECTIVES.contains(&doc[at].0.as_str()));
        }
    }

    #[test]
    fn flip_counts() {
        let f = flip_fixture().unwrap();
        let p = |ctx: &str, t: &str| f.model.conditional_logprob(&[ctx], t).exp();
        assert!((p("a", "a") - 0.6).abs() < 1e-6);
        assert!((p("b", "c") - 0.4).abs() < 1e-6);
    }
}
