//! Per-question fan-out. Output order always follows input order.

use crate::corpus::{Dataset, Mcq};
use crate::detectors::{DatasetContext, DetectorConfig, FlawReport, Linter};
use crate::error::Result;
use crate::lingmetrics::{self, LinguisticMetrics, MetricsConfig, PerplexityScorer};
use crate::llmgate::Gate;
use crate::textkit::TextKit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Sequential,
    /// Uses rayon when the `parallel` feature is on; otherwise sequential.
    #[default]
    Parallel,
}

impl Mode {
    /// Whether this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

pub fn map_ordered<T: Sync, R: Send>(mode: Mode, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    match mode {
        Mode::Sequential => items.iter().map(f).collect(),
        Mode::Parallel => par_map(items, f),
    }
}

/// Lints every question with dataset-level context (domain stem medians).
pub fn lint(mode: Mode, dataset: &Dataset, cfg: &DetectorConfig, kit: &TextKit, gate: &Gate) -> Vec<FlawReport> {
    let context = DatasetContext::from_dataset(kit, dataset);
    let linter = Linter {
        cfg,
        kit,
        gate,
        context: &context,
    };
    map_ordered(mode, &dataset.questions, |q| linter.run(q))
}

pub fn metrics(
    mode: Mode,
    questions: &[Mcq],
    kit: &TextKit,
    scorer: &dyn PerplexityScorer,
    gate: &Gate,
    cfg: &MetricsConfig,
) -> Result<Vec<LinguisticMetrics>> {
    map_ordered(mode, questions, |q| lingmetrics::compute(q, kit, scorer, gate, cfg))
        .into_iter()
        .collect()
}
