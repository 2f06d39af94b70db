//! Item-writing-flaw linting for multiple-choice questions.
//!
//! The crate is organised as a pipeline:
//!
//! - [`corpus`] reads and validates question files and gold annotations.
//! - [`textkit`] is the NLP substrate (tokens, lemmas, coarse POS, lexicons,
//!   static embeddings, stem well-formedness).
//! - [`detectors`] holds the 19 flaw detectors, grouped into text-match,
//!   NLP and LLM-verified tiers.
//! - [`llmgate`] is the language-model gateway with a disk cache and a
//!   scriptable stub backend.
//! - [`lingmetrics`] computes perplexity, Distinct-3, grammar errors, Bloom
//!   level and answerability.
//! - [`evalharness`] scores predictions against gold labels.
//! - [`report`] writes versioned JSON / CSV / text artifacts.
//! - [`batch`] fans work out over questions, in parallel when the
//!   `parallel` feature is on.

pub mod batch;
pub mod corpus;
pub mod criteria;
pub mod detectors;
pub mod error;
pub mod evalharness;
pub mod lingmetrics;
pub mod llmgate;
pub mod report;
pub mod textkit;

pub use corpus::{Dataset, GoldLabels, Mcq};
pub use criteria::{CriterionId, Tier};
pub use detectors::{DetectorConfig, FlawFinding, FlawReport};
pub use error::{Error, Result};
