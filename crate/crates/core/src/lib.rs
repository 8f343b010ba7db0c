//! Key-token hesitation and data-contrastive scoring for language models.
//!
//! A model first scores its own input token by token. The least likely
//! tokens are copied into a short "hesitation" (`Pondering: … .`) that is
//! attached to the input, and answers are then scored or generated by
//! contrasting the model's distribution with and without that hesitation.
//!
//! * [`backend`]: the [`LanguageModel`](backend::LanguageModel) trait, a toy
//!   n-gram model and an HTTP client/server for real models.
//! * [`highlight`]: token probabilities, key-token selection, hesitations.
//! * [`contrast`]: contrastive steps, option scoring, greedy generation and
//!   Yes/No judging.
//! * [`metrics`]: MC1/MC2/MC3, completion accuracy and judge accuracies.
//! * [`analysis`]: which parts of speech the hardest words belong to.
//! * [`harness`]: configs, datasets, the parallel runner and reports.
//! * [`synthetic`]: small generated worlds used by examples and tests.

pub mod backend;
pub mod error;
pub mod highlight;
pub mod contrast;
pub mod metrics;
pub mod analysis;
pub mod harness;
pub mod synthetic;
