use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{normalized_recall, RecallMatrix, TaggedDocument};
use crate::backend::LanguageModel;
use crate::contrast::{
    fill_slots, generate, score_option_with, ContrastiveConfig, Judge, OptionScoring, Verdict,
};
use crate::error::{Error, Result};
use crate::highlight::{Hesitated, HesitationPlan};
use crate::metrics::{
    factor_accuracy, halueval_metrics, mc_scores, FactorRecord, Gold, JudgeRecord, MCRecord,
    MetricsReport, ScoredOption,
};

use super::config::{Resolved, TaskConfig, TaskKind};
use super::dataset::{load_dataset, Dataset};

/// Output for one processed record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordOutput {
    Mc {
        index: usize,
        question: String,
        hesitation: String,
        true_options: Vec<ScoredOption>,
        false_options: Vec<ScoredOption>,
    },
    Generation {
        index: usize,
        question: String,
        hesitation: String,
        output: String,
    },
    Factor {
        index: usize,
        hesitation: String,
        scores: Vec<f64>,
        correct_index: usize,
    },
    Judgment {
        index: usize,
        hesitation: String,
        gold: Gold,
        predicted: Verdict,
        yes_score: f64,
        no_score: f64,
    },
    Document {
        index: usize,
        words: usize,
        scored_words: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub dataset_size: usize,
    pub processed: usize,
    pub skipped: usize,
    pub workers: usize,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: TaskConfig,
    pub resolved: Resolved,
    pub backend: String,
    /// Short hash of everything that defines the run's results.
    pub config_hash: String,
    pub records: Vec<RecordOutput>,
    pub skipped: Vec<Skipped>,
    pub metrics: MetricsReport,
    pub recall: Option<RecallMatrix>,
    pub stats: RunStats,
    /// Hash of the results, independent of timing and worker count.
    pub content_hash: String,
}

/// Opens the configured backend and dataset, then runs.
pub fn run_task(config: &TaskConfig) -> Result<RunReport> {
    let resolved = config.resolve()?;
    let backend = config.backend.open(None)?;
    let dataset = load_dataset(&config.data, config.task)?;
    run_resolved(config, resolved, &*backend, &dataset)
}

/// Runs against an already constructed backend and dataset.
pub fn run_with(config: &TaskConfig, backend: &dyn LanguageModel, dataset: &Dataset) -> Result<RunReport> {
    run_resolved(config, config.resolve()?, backend, dataset)
}

struct Context<'a> {
    plan: HesitationPlan,
    scoring: OptionScoring,
    generation: ContrastiveConfig,
    qa_template: String,
    judge: Judge,
    backend: &'a dyn LanguageModel,
}

impl Context<'_> {
    fn hesitate(&self, input: &str, index: usize) -> Result<Hesitated> {
        self.plan.hesitate(input, self.backend, index as u64)
    }

    fn qa_prompt(&self, question: &str) -> String {
        fill_slots(&self.qa_template, &[("{question}", question)])
    }

    fn score(&self, plain: &str, hes: &str, option: &str) -> Result<f64> {
        score_option_with(plain, hes, option, &self.scoring, self.backend)
    }
}

fn process(ctx: &Context<'_>, dataset: &Dataset, index: usize) -> Result<Vec<RecordOutput>> {
    match dataset {
        Dataset::TruthfulqaMc(items) => {
            let item = &items[index];
            let hes = ctx.hesitate(&item.question, index)?;
            let plain = ctx.qa_prompt(&item.question);
            let hesitated = ctx.qa_prompt(&hes.composed);
            let score_all = |answers: &[&str]| -> Result<Vec<ScoredOption>> {
                answers
                    .iter()
                    .map(|a| Ok(ScoredOption::new(*a, ctx.score(&plain, &hesitated, &format!(" {a}"))?)))
                    .collect()
            };
            let incorrect: Vec<&str> = item.incorrect_answers.iter().map(String::as_str).collect();
            Ok(vec![RecordOutput::Mc {
                index,
                question: item.question.clone(),
                hesitation: hes.hesitation.text,
                true_options: score_all(&item.true_answers())?,
                false_options: score_all(&incorrect)?,
            }])
        }
        Dataset::TruthfulqaGen(items) => {
            let item = &items[index];
            let hes = ctx.hesitate(&item.question, index)?;
            let output = generate(
                &ctx.qa_prompt(&item.question),
                &ctx.qa_prompt(&hes.composed),
                &ctx.generation,
                ctx.backend,
            )?;
            Ok(vec![RecordOutput::Generation {
                index,
                question: item.question.clone(),
                hesitation: hes.hesitation.text,
                output: output.trim().to_string(),
            }])
        }
        Dataset::Factor(items) => {
            let item = &items[index];
            let hes = ctx.hesitate(&item.prefix, index)?;
            let scores = item
                .completions
                .iter()
                .map(|c| ctx.score(&item.prefix, &hes.composed, c))
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![RecordOutput::Factor {
                index,
                hesitation: hes.hesitation.text,
                scores,
                correct_index: item.correct_index,
            }])
        }
        Dataset::HaluevalSum(items) => {
            let item = &items[index];
            let hes = ctx.hesitate(&item.document, index)?;
            [(Gold::Right, &item.right_summary), (Gold::Hallucinated, &item.hallucinated_summary)]
                .into_iter()
                .map(|(gold, summary)| {
                    let j = ctx.judge.judge_hesitated(&item.document, &hes, summary, ctx.backend)?;
                    Ok(RecordOutput::Judgment {
                        index,
                        hesitation: hes.hesitation.text.clone(),
                        gold,
                        predicted: j.verdict,
                        yes_score: j.yes_score,
                        no_score: j.no_score,
                    })
                })
                .collect()
        }
        Dataset::Tagged(_) => unreachable!("tagged corpora are handled by run_recall"),
    }
}

fn run_resolved(
    config: &TaskConfig,
    resolved: Resolved,
    backend: &dyn LanguageModel,
    dataset: &Dataset,
) -> Result<RunReport> {
    let kind_matches = matches!(
        (config.task, dataset),
        (TaskKind::TruthfulqaMc, Dataset::TruthfulqaMc(_))
            | (TaskKind::TruthfulqaGen, Dataset::TruthfulqaGen(_))
            | (TaskKind::Factor, Dataset::Factor(_))
            | (TaskKind::HaluevalSum, Dataset::HaluevalSum(_))
            | (TaskKind::RecallAnalysis, Dataset::Tagged(_))
    );
    if !kind_matches {
        return Err(Error::Config(format!("dataset does not match task {}", config.task)));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("workers: {e}")))?;

    let ctx = Context {
        plan: config.plan(&resolved),
        scoring: OptionScoring {
            alpha: resolved.alpha,
            length_normalize: config.length_normalize,
            step_normalized: config.step_normalized,
        },
        generation: ContrastiveConfig {
            alpha: resolved.alpha,
            max_new_tokens: config.max_new_tokens,
            stop: config.stop.clone(),
        },
        qa_template: config.qa_template()?,
        judge: Judge {
            plan: config.plan(&resolved),
            scoring: OptionScoring {
                alpha: resolved.alpha,
                length_normalize: config.length_normalize,
                step_normalized: config.step_normalized,
            },
            template: config.judge_template()?,
        },
        backend,
    };

    let mut recall = None;
    let results: Vec<Result<Vec<RecordOutput>>> = match dataset {
        Dataset::Tagged(docs) => {
            let scored: Vec<Result<TaggedDocument>> = pool.install(|| {
                docs.par_iter()
                    .map(|words| {
                        let mut doc = TaggedDocument::from_tagged_words(words);
                        doc.score(backend)?;
                        Ok(doc)
                    })
                    .collect()
            });
            let mut corpus = Vec::new();
            let outputs = scored
                .into_iter()
                .enumerate()
                .map(|(index, doc)| {
                    doc.map(|doc| {
                        let out = RecordOutput::Document {
                            index,
                            words: doc.words.len(),
                            scored_words: doc.scored_words(),
                        };
                        corpus.push(doc);
                        vec![out]
                    })
                })
                .collect();
            if !corpus.is_empty() {
                recall = Some(normalized_recall(&corpus, &config.eta_grid, config.tags.as_deref())?);
            }
            outputs
        }
        _ => pool.install(|| {
            (0..dataset.len())
                .into_par_iter()
                .map(|i| process(&ctx, dataset, i))
                .collect()
        }),
    };

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(out) => records.extend(out),
            Err(e) => {
                log::warn!("skipping record {index}: {e}");
                skipped.push(Skipped {
                    index,
                    reason: e.to_string(),
                });
            }
        }
    }
    let total = dataset.len();
    if skipped.len() as f64 > config.max_failure_rate * total as f64 {
        return Err(Error::TooManyFailures {
            failed: skipped.len(),
            total,
        });
    }

    let metrics = aggregate(config.task, &records)?
        .with_count("records", total - skipped.len())
        .with_count("skipped", skipped.len());

    let config_hash = config_hash(config, &resolved)?;
    let mut report = RunReport {
        config: config.clone(),
        resolved,
        backend: backend.name(),
        config_hash,
        records,
        skipped,
        metrics,
        recall,
        stats: RunStats {
            dataset_size: total,
            processed: 0,
            skipped: 0,
            workers: config.workers,
            wall_ms: started.elapsed().as_millis(),
        },
        content_hash: String::new(),
    };
    report.stats.skipped = report.skipped.len();
    report.stats.processed = total - report.stats.skipped;
    report.content_hash = report.compute_content_hash()?;
    Ok(report)
}

fn aggregate(task: TaskKind, records: &[RecordOutput]) -> Result<MetricsReport> {
    Ok(match task {
        TaskKind::TruthfulqaMc => {
            let mc: Vec<MCRecord> = records
                .iter()
                .filter_map(|r| match r {
                    RecordOutput::Mc {
                        question,
                        true_options,
                        false_options,
                        ..
                    } => Some(MCRecord {
                        question: question.clone(),
                        true_options: true_options.clone(),
                        false_options: false_options.clone(),
                    }),
                    _ => None,
                })
                .collect();
            mc_scores(&mc)?.into()
        }
        TaskKind::Factor => {
            let recs: Vec<FactorRecord> = records
                .iter()
                .filter_map(|r| match r {
                    RecordOutput::Factor {
                        scores,
                        correct_index,
                        ..
                    } => Some(FactorRecord {
                        correct: scores[*correct_index],
                        incorrect: scores
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| i != correct_index)
                            .map(|(_, s)| *s)
                            .collect(),
                    }),
                    _ => None,
                })
                .collect();
            let mut m = MetricsReport::default();
            m.values.insert("factor_acc".into(), factor_accuracy(&recs)?);
            m
        }
        TaskKind::HaluevalSum => {
            let recs: Vec<JudgeRecord> = records
                .iter()
                .filter_map(|r| match r {
                    RecordOutput::Judgment { gold, predicted, .. } => Some(JudgeRecord {
                        gold: *gold,
                        predicted: *predicted,
                    }),
                    _ => None,
                })
                .collect();
            halueval_metrics(&recs)?.into()
        }
        TaskKind::TruthfulqaGen | TaskKind::RecallAnalysis => MetricsReport::default(),
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the result-defining configuration; worker count and output
/// locations are excluded.
pub fn config_hash(config: &TaskConfig, resolved: &Resolved) -> Result<String> {
    let mut c = config.clone();
    c.workers = 1;
    c.out_dir = None;
    c.formats.clear();
    let payload = serde_json::json!({
        "config": c,
        "resolved": resolved,
        "qa_template": config.qa_template()?,
        "judge_template": config.judge_template()?,
    });
    Ok(sha256_hex(serde_json::to_string(&payload)?.as_bytes())[..16].to_string())
}

impl RunReport {
    pub fn compute_content_hash(&self) -> Result<String> {
        let payload = serde_json::json!({
            "config_hash": self.config_hash,
            "backend": self.backend,
            "records": self.records,
            "skipped": self.skipped,
            "metrics": self.metrics,
            "recall": self.recall,
        });
        Ok(sha256_hex(serde_json::to_string(&payload)?.as_bytes()))
    }
}
