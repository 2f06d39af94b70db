//! Traditional linguistic quality metrics: perplexity, Distinct-3,
//! grammar errors, Bloom level and answerability, plus per-domain group
//! summaries split by flaw count.

mod grammar;
mod perplexity;

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use grammar::{check_text, grammar_hits, GrammarHit, GrammarRule};
pub use perplexity::{lm_tokens, PerplexityScorer, TrigramModel, UniformScorer};

use crate::corpus::Mcq;
use crate::criteria::is_acceptable;
use crate::error::{Error, Result};
use crate::llmgate::{AnswerVote, Gate};
use crate::textkit::{Pos, TextKit};

/// Which text the metrics look at.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextScope {
    #[default]
    StemAndOptions,
    StemOnly,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub scope: TextScope,
    /// Ask the gate for answerability (three answer prompts per question).
    pub answerability: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticMetrics {
    pub question_id: String,
    pub perplexity: f64,
    pub diversity: f64,
    pub grammar_errors: usize,
    pub bloom_level: u8,
    /// 1 when the gate's majority answer is the key; absent when not asked.
    pub answerability: Option<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grammar_hits: Vec<GrammarHit>,
}

fn segments(mcq: &Mcq, scope: TextScope) -> Vec<&str> {
    let mut out = vec![mcq.stem.as_str()];
    if scope == TextScope::StemAndOptions {
        out.extend(mcq.option_texts());
    }
    out
}

/// Unique word 3-grams over total word 3-grams in the given text.
pub fn distinct3_text(segments: &[&str]) -> f64 {
    let words: Vec<String> = segments
        .iter()
        .flat_map(|s| s.split_whitespace())
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect();
    if words.len() < 3 {
        return 1.0;
    }
    let grams: Vec<&[String]> = words.windows(3).collect();
    let unique: HashSet<&[String]> = grams.iter().copied().collect();
    unique.len() as f64 / grams.len() as f64
}

pub fn distinct3(mcq: &Mcq, scope: TextScope) -> f64 {
    distinct3_text(&segments(mcq, scope))
}

pub fn perplexity(mcq: &Mcq, scope: TextScope, scorer: &dyn PerplexityScorer) -> Result<f64> {
    scorer.perplexity(&segments(mcq, scope))
}

pub fn grammar_errors(kit: &TextKit, mcq: &Mcq, scope: TextScope) -> usize {
    grammar_hits(kit, mcq, scope == TextScope::StemAndOptions).len()
}

/// Highest Bloom level among the stem's verbs (and its first word, which
/// is often an imperative); 0 when none is listed.
pub fn bloom_level(kit: &TextKit, mcq: &Mcq) -> u8 {
    let toks = kit.tokenize(&mcq.stem);
    let verbs = toks.iter().filter(|t| t.pos == Pos::Verb).map(|t| t.lemma.clone());
    let first = toks
        .iter()
        .find(|t| t.surface.chars().next().is_some_and(char::is_alphabetic))
        .map(|t| t.surface.to_lowercase());
    verbs
        .chain(first)
        .filter_map(|v| kit.lexicons.bloom_verbs.get(&v).copied())
        .max()
        .unwrap_or(0)
}

/// 1 iff the gate's majority answer is the keyed option. An abstention
/// scores 0.
pub fn answerability(mcq: &Mcq, gate: &Gate) -> Result<u8> {
    Ok(match gate.ask_answer(mcq)? {
        AnswerVote::Option(i) if i == mcq.key => 1,
        _ => 0,
    })
}

/// All five metrics for one question.
pub fn compute(
    mcq: &Mcq,
    kit: &TextKit,
    scorer: &dyn PerplexityScorer,
    gate: &Gate,
    cfg: &MetricsConfig,
) -> Result<LinguisticMetrics> {
    let hits = grammar_hits(kit, mcq, cfg.scope == TextScope::StemAndOptions);
    let answerability = if cfg.answerability {
        if !gate.enabled() {
            return Err(Error::Config("answerability needs an LLM backend".into()));
        }
        Some(answerability(mcq, gate)?)
    } else {
        None
    };
    Ok(LinguisticMetrics {
        question_id: mcq.id.clone(),
        perplexity: perplexity(mcq, cfg.scope, scorer)?,
        diversity: distinct3(mcq, cfg.scope),
        grammar_errors: hits.len(),
        bloom_level: bloom_level(kit, mcq),
        answerability,
        grammar_hits: hits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "0-1")]
    Acceptable,
    #[serde(rename = "2+")]
    Flawed,
}

impl Band {
    pub fn of(flaw_count: usize) -> Band {
        if is_acceptable(flaw_count) {
            Band::Acceptable
        } else {
            Band::Flawed
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Band::Acceptable => "0-1",
            Band::Flawed => "2+",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub domain: String,
    pub band: Band,
    pub n: usize,
    pub perplexity: f64,
    pub diversity: f64,
    pub grammar_errors: f64,
    pub bloom_level: f64,
    pub answerability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTable {
    pub rows: Vec<GroupSummary>,
    /// Bands with no questions, as "domain band".
    pub empty_bands: Vec<String>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Per (domain, band) means. `flaw_counts[i]` belongs to `questions[i]`,
/// as does `metrics[i]`. Domains keep their first-appearance order.
pub fn group_summaries(questions: &[Mcq], flaw_counts: &[usize], metrics: &[LinguisticMetrics]) -> Result<GroupTable> {
    if questions.len() != flaw_counts.len() || questions.len() != metrics.len() {
        return Err(Error::Config(format!(
            "group summary needs aligned inputs ({} questions, {} flaw counts, {} metric rows)",
            questions.len(),
            flaw_counts.len(),
            metrics.len()
        )));
    }
    let mut domains: Vec<&str> = Vec::new();
    for q in questions {
        if !domains.contains(&q.domain.as_str()) {
            domains.push(&q.domain);
        }
    }
    let mut rows = Vec::new();
    let mut empty_bands = Vec::new();
    for d in domains {
        for band in [Band::Acceptable, Band::Flawed] {
            let idx: Vec<usize> = (0..questions.len())
                .filter(|&i| questions[i].domain == d && Band::of(flaw_counts[i]) == band)
                .collect();
            if idx.is_empty() {
                empty_bands.push(format!("{d} {}", band.label()));
                continue;
            }
            let m = |f: &dyn Fn(&LinguisticMetrics) -> f64| mean(idx.iter().map(|&i| f(&metrics[i])));
            let answerability = if idx.iter().all(|&i| metrics[i].answerability.is_some()) {
                Some(m(&|x| f64::from(x.answerability.unwrap_or(0))))
            } else {
                None
            };
            rows.push(GroupSummary {
                domain: d.to_string(),
                band,
                n: idx.len(),
                perplexity: m(&|x| x.perplexity),
                diversity: m(&|x| x.diversity),
                grammar_errors: m(&|x| x.grammar_errors as f64),
                bloom_level: m(&|x| f64::from(x.bloom_level)),
                answerability,
            });
        }
    }
    Ok(GroupTable { rows, empty_bands })
}

pub const GROUP_COLUMNS: [&str; 8] = [
    "Domain",
    "IWF band",
    "N",
    "Perplexity",
    "Diversity",
    "GrammaticalError",
    "CognitiveComplexity",
    "Answerability",
];

fn cells(r: &GroupSummary) -> [String; 8] {
    [
        r.domain.clone(),
        r.band.label().to_string(),
        r.n.to_string(),
        format!("{:.2}", r.perplexity),
        format!("{:.2}", r.diversity),
        format!("{:.2}", r.grammar_errors),
        format!("{:.2}", r.bloom_level),
        r.answerability.map_or_else(|| "-".to_string(), |a| format!("{a:.2}")),
    ]
}

impl GroupTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(GROUP_COLUMNS)?;
        for r in &self.rows {
            w.write_record(cells(r))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("writing csv", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let body: Vec<[String; 8]> = self.rows.iter().map(cells).collect();
        let mut width: Vec<usize> = GROUP_COLUMNS.iter().map(|h| h.len()).collect();
        for row in &body {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: &[String]| {
            let parts: Vec<String> = row
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        let header: Vec<String> = GROUP_COLUMNS.iter().map(|s| s.to_string()).collect();
        line(&mut out, &header);
        let _ = writeln!(out, "{}", "-".repeat(width.iter().sum::<usize>() + 2 * (width.len() - 1)));
        for row in &body {
            line(&mut out, row);
        }
        for e in &self.empty_bands {
            let _ = writeln!(out, "(no questions in {e})");
        }
        out
    }
}
