//! Benchmark scoring rules: TruthfulQA MC1/MC2/MC3, FACTOR accuracy and the
//! HaluEval-Sum accuracy family.
//!
//! All comparisons are strict; ties count against the model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backend::logsumexp;
use crate::contrast::Verdict;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredOption {
    pub text: String,
    pub score: f64,
}

impl ScoredOption {
    pub fn new(text: impl Into<String>, score: f64) -> Self {
        Self {
            text: text.into(),
            score,
        }
    }
}

/// One multiple-choice question. The first true option is the best answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCRecord {
    pub question: String,
    pub true_options: Vec<ScoredOption>,
    pub false_options: Vec<ScoredOption>,
}

impl MCRecord {
    fn validate(&self, index: usize) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidRecord {
            index,
            reason: reason.to_string(),
        };
        if self.true_options.is_empty() {
            return Err(invalid("no true options"));
        }
        if self.false_options.is_empty() {
            return Err(invalid("no false options"));
        }
        if self
            .true_options
            .iter()
            .chain(&self.false_options)
            .any(|o| !o.score.is_finite())
        {
            return Err(invalid("non-finite option score"));
        }
        Ok(())
    }

    fn max_false(&self) -> f64 {
        self.false_options
            .iter()
            .map(|o| o.score)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn mc1(&self) -> f64 {
        f64::from(u8::from(self.true_options[0].score > self.max_false()))
    }

    fn mc2(&self) -> f64 {
        let trues: Vec<f64> = self.true_options.iter().map(|o| o.score).collect();
        let all: Vec<f64> = trues
            .iter()
            .copied()
            .chain(self.false_options.iter().map(|o| o.score))
            .collect();
        (logsumexp(&trues) - logsumexp(&all)).exp()
    }

    fn mc3(&self) -> f64 {
        let max_false = self.max_false();
        let above = self
            .true_options
            .iter()
            .filter(|o| o.score > max_false)
            .count();
        above as f64 / self.true_options.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McScores {
    pub mc1: f64,
    pub mc2: f64,
    pub mc3: f64,
}

/// Averages MC1, MC2 and MC3 over records.
///
/// * MC1: best answer scores strictly above every false option.
/// * MC2: `Σ exp(true) / Σ exp(all)`.
/// * MC3: fraction of true options scoring strictly above every false option.
pub fn mc_scores(records: &[MCRecord]) -> Result<McScores> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let (mut mc1, mut mc2, mut mc3) = (0.0, 0.0, 0.0);
    for (i, r) in records.iter().enumerate() {
        r.validate(i)?;
        mc1 += r.mc1();
        mc2 += r.mc2();
        mc3 += r.mc3();
    }
    let n = records.len() as f64;
    Ok(McScores {
        mc1: mc1 / n,
        mc2: mc2 / n,
        mc3: mc3 / n,
    })
}

/// Completion scores for one FACTOR prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub correct: f64,
    pub incorrect: Vec<f64>,
}

/// Fraction of records whose correct completion scores strictly highest.
pub fn factor_accuracy(records: &[FactorRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut hits = 0usize;
    for (index, r) in records.iter().enumerate() {
        if r.incorrect.is_empty() {
            return Err(Error::InvalidRecord {
                index,
                reason: "need at least 2 completions".into(),
            });
        }
        if r.incorrect.iter().all(|&s| r.correct > s) {
            hits += 1;
        }
    }
    Ok(hits as f64 / records.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gold {
    Hallucinated,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeRecord {
    pub gold: Gold,
    pub predicted: Verdict,
}

/// Hallucinated summaries are the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaluEvalMetrics {
    pub acc_hallucinated: f64,
    pub acc_right: f64,
    pub acc_a: f64,
    pub acc_h: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn halueval_metrics(records: &[JudgeRecord]) -> Result<HaluEvalMetrics> {
    let (mut tp, mut fn_, mut tn, mut fp) = (0usize, 0usize, 0usize, 0usize);
    for r in records {
        match (r.gold, r.predicted) {
            (Gold::Hallucinated, Verdict::Yes) => tp += 1,
            (Gold::Hallucinated, Verdict::No) => fn_ += 1,
            (Gold::Right, Verdict::No) => tn += 1,
            (Gold::Right, Verdict::Yes) => fp += 1,
        }
    }
    if tp + fn_ == 0 {
        return Err(Error::MissingClass("hallucinated"));
    }
    if tn + fp == 0 {
        return Err(Error::MissingClass("right"));
    }
    let acc_hallucinated = tp as f64 / (tp + fn_) as f64;
    let acc_right = tn as f64 / (tn + fp) as f64;
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = acc_hallucinated;
    Ok(HaluEvalMetrics {
        acc_hallucinated,
        acc_right,
        acc_a: (acc_hallucinated + acc_right) / 2.0,
        acc_h: harmonic_mean(acc_hallucinated, acc_right),
        precision,
        recall,
        f1: harmonic_mean(precision, recall),
    })
}

/// `2ab / (a + b)`, with 0 when either side is 0.
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Named metric values and counts, as emitted in reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub values: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, usize>,
}

impl MetricsReport {
    pub fn with_count(mut self, name: &str, n: usize) -> Self {
        self.counts.insert(name.to_string(), n);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

impl From<McScores> for MetricsReport {
    fn from(s: McScores) -> Self {
        let mut r = Self::default();
        r.values.insert("mc1".into(), s.mc1);
        r.values.insert("mc2".into(), s.mc2);
        r.values.insert("mc3".into(), s.mc3);
        r
    }
}

impl From<HaluEvalMetrics> for MetricsReport {
    fn from(m: HaluEvalMetrics) -> Self {
        let mut r = Self::default();
        for (k, v) in [
            ("acc_hallucinated", m.acc_hallucinated),
            ("acc_right", m.acc_right),
            ("acc_a", m.acc_a),
            ("acc_h", m.acc_h),
            ("precision", m.precision),
            ("recall", m.recall),
            ("f1", m.f1),
        ] {
            r.values.insert(k.into(), v);
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn record(trues: &[f64], falses: &[f64]) -> MCRecord {
        MCRecord {
            question: "q".into(),
            true_options: trues.iter().map(|&s| ScoredOption::new("t", s)).collect(),
            false_options: falses.iter().map(|&s| ScoredOption::new("f", s)).collect(),
        }
    }

    fn judged(gold: Gold, predicted: Verdict, n: usize) -> Vec<JudgeRecord> {
        vec![JudgeRecord { gold, predicted }; n]
    }

    #[test]
    fn single_record_example() {
        let s = mc_scores(&[record(&[-1.0], &[-2.0, -3.0])]).unwrap();
        assert_eq!(s.mc1, 1.0);
        assert_eq!(s.mc3, 1.0);
        let e = |x: f64| x.exp();
        assert_abs_diff_eq!(s.mc2, e(-1.0) / (e(-1.0) + e(-2.0) + e(-3.0)), epsilon = 1e-12);
        assert_abs_diff_eq!(s.mc2, 0.6652, epsilon = 1e-4);
    }

    #[test]
    fn all_tied() {
        let s = mc_scores(&[record(&[-1.0, -1.0], &[-1.0, -1.0, -1.0])]).unwrap();
        assert_eq!(s.mc1, 0.0);
        assert_eq!(s.mc3, 0.0);
        assert_abs_diff_eq!(s.mc2, 2.0 / 5.0, epsilon = 1e-12);
    }

    #[test]
    fn mc3_partial_credit() {
        let s = mc_scores(&[record(&[-1.0, -5.0, -0.5, -2.5], &[-2.0])]).unwrap();
        assert_eq!(s.mc1, 1.0);
        assert_abs_diff_eq!(s.mc3, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn mc_errors() {
        assert!(matches!(mc_scores(&[]), Err(Error::EmptyRecords)));
        assert!(matches!(
            mc_scores(&[record(&[-1.0], &[-2.0]), record(&[], &[-2.0])]),
            Err(Error::InvalidRecord { index: 1, .. })
        ));
        assert!(mc_scores(&[record(&[f64::NAN], &[-2.0])]).is_err());
    }

    #[test]
    fn factor_strictness() {
        let ok = FactorRecord {
            correct: -5.0,
            incorrect: vec![-6.0, -7.0, -8.0],
        };
        let tie = FactorRecord {
            correct: -5.0,
            incorrect: vec![-5.0, -7.0],
        };
        assert_eq!(factor_accuracy(std::slice::from_ref(&ok)).unwrap(), 1.0);
        assert_eq!(factor_accuracy(&[tie]).unwrap(), 0.0);
        assert!(factor_accuracy(&[]).is_err());
        let lone = FactorRecord {
            correct: -1.0,
            incorrect: vec![],
        };
        assert!(factor_accuracy(&[ok, lone]).is_err());
    }

    #[test]
    fn class_accuracy_means() {
        // hallucinated accuracy 0.2, right accuracy 0.6
        let mut r = judged(Gold::Hallucinated, Verdict::Yes, 1);
        r.extend(judged(Gold::Hallucinated, Verdict::No, 4));
        r.extend(judged(Gold::Right, Verdict::No, 3));
        r.extend(judged(Gold::Right, Verdict::Yes, 2));
        let m = halueval_metrics(&r).unwrap();
        assert_abs_diff_eq!(m.acc_a, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(m.acc_h, 0.3, epsilon = 1e-12);
        assert_eq!(m.recall, m.acc_hallucinated);
        assert_abs_diff_eq!(m.precision, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn perfect_predictor() {
        let mut r = judged(Gold::Hallucinated, Verdict::Yes, 3);
        r.extend(judged(Gold::Right, Verdict::No, 2));
        let m = halueval_metrics(&r).unwrap();
        for v in [m.acc_hallucinated, m.acc_right, m.acc_a, m.acc_h, m.precision, m.recall, m.f1] {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn degenerate_predictors() {
        let mut r = judged(Gold::Hallucinated, Verdict::No, 3);
        r.extend(judged(Gold::Right, Verdict::No, 2));
        let m = halueval_metrics(&r).unwrap();
        assert_eq!(m.acc_h, 0.0);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.f1, 0.0);
        assert_eq!(m.acc_a, 0.5);
    }

    #[test]
    fn missing_class() {
        assert!(matches!(
            halueval_metrics(&judged(Gold::Right, Verdict::No, 2)),
            Err(Error::MissingClass("hallucinated"))
        ));
        assert!(matches!(
            halueval_metrics(&judged(Gold::Hallucinated, Verdict::No, 2)),
            Err(Error::MissingClass("right"))
        ));
    }

    #[test]
    fn published_f1_arithmetic() {
        let f1 = harmonic_mean(0.4255, 0.1126);
        assert_abs_diff_eq!(f1, 0.1781, epsilon = 5e-4);
    }
}
