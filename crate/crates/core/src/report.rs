//! Versioned report documents and their JSON / CSV / text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{self, GoldLabels};
use crate::detectors::{DetectorConfig, FlawReport};
use crate::error::{Error, Result};
use crate::evalharness::{predictions_from_reports, EvalSummary};
use crate::lingmetrics::{GroupTable, LinguisticMetrics, MetricsConfig};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

/// What produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_digest: String,
    pub thresholds: DetectorConfig,
    pub backend: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl Provenance {
    pub fn new(cfg: &DetectorConfig, backend: &str, model: &str, timestamp: bool) -> Self {
        Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: cfg.digest(),
            thresholds: cfg.clone(),
            backend: backend.to_string(),
            model: model.to_string(),
            generated_at: timestamp.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintSummary {
    pub questions: usize,
    pub acceptable: usize,
    pub unacceptable: usize,
    /// Flaw count to number of questions.
    pub histogram: BTreeMap<usize, usize>,
    /// Questions with at least one finding that could not be produced.
    pub unavailable: Vec<String>,
}

impl LintSummary {
    pub fn of(reports: &[FlawReport]) -> Self {
        let mut histogram = BTreeMap::new();
        for r in reports {
            *histogram.entry(r.flaw_count).or_insert(0) += 1;
        }
        let acceptable = reports.iter().filter(|r| r.acceptable).count();
        LintSummary {
            questions: reports.len(),
            acceptable,
            unacceptable: reports.len() - acceptable,
            histogram,
            unavailable: reports
                .iter()
                .filter(|r| r.has_unavailable())
                .map(|r| r.question_id.clone())
                .collect(),
        }
    }

    pub fn line(&self) -> String {
        let hist: Vec<String> = self.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        format!(
            "{} questions, {} acceptable, {} unacceptable; flaw counts {}{}",
            self.questions,
            self.acceptable,
            self.unacceptable,
            hist.join(" "),
            if self.unavailable.is_empty() {
                String::new()
            } else {
                format!("; {} with unavailable findings", self.unavailable.len())
            }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LintReport {
    pub schema_version: String,
    #[serde(flatten)]
    pub provenance: Provenance,
    pub summary: LintSummary,
    pub reports: Vec<FlawReport>,
}

impl LintReport {
    pub fn new(provenance: Provenance, reports: Vec<FlawReport>) -> Self {
        LintReport {
            schema_version: SCHEMA_VERSION.to_string(),
            provenance,
            summary: LintSummary::of(&reports),
            reports,
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => Ok(corpus::write_gold_csv(&predictions_from_reports(&self.reports))),
            Format::Table => Ok(self.to_text()),
        }
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        let idw = self.reports.iter().map(|r| r.question_id.chars().count()).max().unwrap_or(2).max(2);
        let _ = writeln!(out, "{:<idw$}  flaws  acceptable  flagged", "id");
        for r in &self.reports {
            let mut flagged: Vec<String> = r.findings.iter().filter(|f| f.flagged).map(|f| f.criterion.key().to_string()).collect();
            flagged.extend(
                r.findings
                    .iter()
                    .filter(|f| f.unavailable())
                    .map(|f| format!("{}(unavailable)", f.criterion.key())),
            );
            let _ = writeln!(
                out,
                "{:<idw$}  {:>5}  {:>10}  {}",
                r.question_id,
                r.flaw_count,
                if r.acceptable { "yes" } else { "no" },
                flagged.join(", ")
            );
        }
        let _ = writeln!(out, "{}", self.summary.line());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: String,
    #[serde(flatten)]
    pub provenance: Provenance,
    pub metrics_config: MetricsConfig,
    pub scorer: String,
    /// Where the flaw bands came from: "gold", "predictions" or absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_source: Option<String>,
    pub questions: Vec<LinguisticMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<GroupTable>,
}

pub const METRIC_COLUMNS: [&str; 6] = ["question_id", "perplexity", "diversity", "grammar_errors", "bloom_level", "answerability"];

impl MetricsReport {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => match &self.groups {
                Some(g) => g.to_csv(),
                None => self.per_question_csv(),
            },
            Format::Table => {
                let mut out = self.per_question_text();
                if let Some(g) = &self.groups {
                    out.push('\n');
                    out.push_str(&g.to_text());
                }
                Ok(out)
            }
        }
    }

    fn row(m: &LinguisticMetrics) -> [String; 6] {
        [
            m.question_id.clone(),
            format!("{:.4}", m.perplexity),
            format!("{:.4}", m.diversity),
            m.grammar_errors.to_string(),
            m.bloom_level.to_string(),
            m.answerability.map_or_else(|| "-".to_string(), |a| a.to_string()),
        ]
    }

    pub fn per_question_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(METRIC_COLUMNS)?;
        for m in &self.questions {
            w.write_record(Self::row(m))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("writing csv", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    fn per_question_text(&self) -> String {
        let rows: Vec<[String; 6]> = self.questions.iter().map(Self::row).collect();
        let mut width: Vec<usize> = METRIC_COLUMNS.iter().map(|c| c.len()).collect();
        for r in &rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let header: Vec<String> = METRIC_COLUMNS.iter().map(|s| s.to_string()).collect();
        for r in std::iter::once(header.as_slice()).chain(rows.iter().map(|r| r.as_slice())) {
            let cells: Vec<String> = r
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: String,
    #[serde(flatten)]
    pub provenance: Provenance,
    /// "lint" for a fresh run, otherwise the predictions file name.
    pub predictions: String,
    pub summary: EvalSummary,
}

impl EvalReport {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => self.summary.grid_csv(),
            Format::Table => Ok(self.summary.to_text()),
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Reads saved predictions: a lint report (`.json`) or a label CSV in the
/// gold format.
pub fn load_predictions(path: &Path) -> Result<Vec<GoldLabels>> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_json {
        return corpus::parse_gold_csv(path);
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let report: LintReport = serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        message: format!("not a lint report: {e}"),
    })?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            message: format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", report.schema_version),
        });
    }
    Ok(predictions_from_reports(&report.reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Mcq;
    use crate::detectors::run_all;
    use crate::llmgate::Gate;
    use crate::textkit::TextKit;

    fn reports() -> Vec<FlawReport> {
        let cfg = DetectorConfig::default();
        ["None of the above", "Paris"]
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let q = Mcq::new(format!("q{i}"), "geo", "What is the capital of France?", vec!["Paris".into(), o.to_string(), "Rome".into()], 0).unwrap();
                run_all(&q, &cfg, TextKit::bundled(), &Gate::disabled())
            })
            .collect()
    }

    #[test]
    fn lint_report_round_trips_through_json() {
        let cfg = DetectorConfig::default();
        let r = LintReport::new(Provenance::new(&cfg, "disabled", "-", false), reports());
        let json = r.render(Format::Json).unwrap();
        assert!(json.contains("\"schema_version\": \"1\""));
        assert!(json.contains(&cfg.digest()));
        assert!(!json.contains("generated_at"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lint.json");
        std::fs::write(&p, &json).unwrap();
        let preds = load_predictions(&p).unwrap();
        assert_eq!(preds, predictions_from_reports(&r.reports));

        let csv = r.render(Format::Csv).unwrap();
        let pc = dir.path().join("lint.csv");
        std::fs::write(&pc, &csv).unwrap();
        assert_eq!(load_predictions(&pc).unwrap(), preds);
        assert!(r.render(Format::Table).unwrap().contains("2 questions"));
    }

    #[test]
    fn timestamps_only_on_request() {
        let cfg = DetectorConfig::default();
        assert!(Provenance::new(&cfg, "stub", "m", true).generated_at.is_some());
        assert!(Provenance::new(&cfg, "stub", "m", false).generated_at.is_none());
    }

    #[test]
    fn summary_line() {
        let s = LintSummary::of(&reports());
        assert_eq!(s.questions, 2);
        assert!(s.line().starts_with("2 questions"));
    }
}
