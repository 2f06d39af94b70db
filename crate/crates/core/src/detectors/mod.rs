//! The 19 item-writing-flaw detectors.
//!
//! Detectors come in three tiers. Text-match detectors look for literal
//! patterns, NLP detectors use the [`TextKit`] (lemmas, tags, embeddings,
//! well-formedness) and LLM-verified detectors first find a lexical or
//! structural candidate and then, if a backend is available, ask the
//! [`Gate`] to confirm it. With no backend the candidate stands.

mod config;
mod llm;
mod nlp;
pub mod shape;
mod text_match;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

pub use config::DetectorConfig;

use crate::corpus::{Dataset, Mcq};
use crate::criteria::{is_acceptable, CriterionId, FlagSet, Tier};
use crate::llmgate::Gate;
use crate::textkit::{TextKit, Token};

/// Where a piece of evidence lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Stem,
    Option(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Stem => f.write_str("STEM"),
            Location::Option(i) => write!(f, "OPTION({i})"),
        }
    }
}

impl Serialize for Location {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Location {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "STEM" {
            return Ok(Location::Stem);
        }
        s.strip_prefix("OPTION(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|n| n.parse().ok())
            .map(Location::Option)
            .ok_or_else(|| serde::de::Error::custom(format!("bad location `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub location: Location,
    /// Byte offsets into the stem or option text.
    pub span: (usize, usize),
    pub note: String,
}

impl Evidence {
    pub fn new(location: Location, span: (usize, usize), note: impl Into<String>) -> Self {
        Evidence {
            location,
            span,
            note: note.into(),
        }
    }

    /// Evidence covering a whole option (trimmed).
    pub fn option(mcq: &Mcq, i: usize, note: impl Into<String>) -> Self {
        Evidence::new(Location::Option(i), trimmed_span(&mcq.options[i].text), note)
    }

    pub fn stem(mcq: &Mcq, note: impl Into<String>) -> Self {
        Evidence::new(Location::Stem, trimmed_span(&mcq.stem), note)
    }
}

pub(crate) fn trimmed_span(s: &str) -> (usize, usize) {
    let start = s.len() - s.trim_start().len();
    (start, s.trim_end().len().max(start))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlawFinding {
    pub criterion: CriterionId,
    pub flagged: bool,
    pub tier: Tier,
    pub evidence: Vec<Evidence>,
    pub llm_consulted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Set when the verdict could not be produced (gate failure).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl FlawFinding {
    pub fn clear(criterion: CriterionId) -> Self {
        FlawFinding {
            criterion,
            flagged: false,
            tier: criterion.tier(),
            evidence: Vec::new(),
            llm_consulted: false,
            note: None,
            error: None,
        }
    }

    pub fn flag(criterion: CriterionId, evidence: Vec<Evidence>) -> Self {
        debug_assert!(!evidence.is_empty(), "{criterion} flagged without evidence");
        FlawFinding {
            flagged: true,
            evidence,
            ..FlawFinding::clear(criterion)
        }
    }

    /// Flags iff `evidence` is non-empty.
    pub fn from_evidence(criterion: CriterionId, evidence: Vec<Evidence>) -> Self {
        if evidence.is_empty() {
            FlawFinding::clear(criterion)
        } else {
            FlawFinding::flag(criterion, evidence)
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn unavailable(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlawReport {
    pub question_id: String,
    pub findings: Vec<FlawFinding>,
    pub flaw_count: usize,
    pub acceptable: bool,
}

impl FlawReport {
    pub fn new(question_id: impl Into<String>, findings: Vec<FlawFinding>) -> Self {
        debug_assert_eq!(findings.len(), CriterionId::COUNT);
        let flaw_count = findings.iter().filter(|f| f.flagged).count();
        FlawReport {
            question_id: question_id.into(),
            findings,
            flaw_count,
            acceptable: is_acceptable(flaw_count),
        }
    }

    pub fn finding(&self, c: CriterionId) -> &FlawFinding {
        &self.findings[c.index()]
    }

    pub fn flags(&self) -> FlagSet {
        let mut f = FlagSet::default();
        for x in &self.findings {
            f.set(x.criterion, x.flagged);
        }
        f
    }

    pub fn has_unavailable(&self) -> bool {
        self.findings.iter().any(FlawFinding::unavailable)
    }
}

/// Per-question analysis shared by the detectors.
pub(crate) struct Analysis<'a> {
    pub mcq: &'a Mcq,
    pub stem: Vec<Token>,
    pub options: Vec<Vec<Token>>,
}

impl<'a> Analysis<'a> {
    fn new(kit: &TextKit, mcq: &'a Mcq) -> Self {
        Analysis {
            mcq,
            stem: kit.tokenize(&mcq.stem),
            options: mcq.options.iter().map(|o| kit.tokenize(&o.text)).collect(),
        }
    }
}

/// Dataset-level statistics some detectors compare against.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetContext {
    /// Median stem length in word tokens, per domain.
    pub median_stem_len: HashMap<String, f64>,
}

impl DatasetContext {
    pub fn from_dataset(kit: &TextKit, dataset: &Dataset) -> Self {
        let mut lens: HashMap<String, Vec<usize>> = HashMap::new();
        for q in &dataset.questions {
            lens.entry(q.domain.clone())
                .or_default()
                .push(shape::word_count(kit, &q.stem));
        }
        let median_stem_len = lens
            .into_iter()
            .map(|(d, mut v)| {
                v.sort_unstable();
                let n = v.len();
                let m = if n % 2 == 1 {
                    v[n / 2] as f64
                } else {
                    (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
                };
                (d, m)
            })
            .collect();
        DatasetContext { median_stem_len }
    }

    fn median_for(&self, kit: &TextKit, mcq: &Mcq) -> f64 {
        self.median_stem_len
            .get(&mcq.domain)
            .copied()
            .unwrap_or_else(|| shape::word_count(kit, &mcq.stem) as f64)
    }
}

/// Everything a detector needs besides the question.
#[derive(Debug, Clone, Copy)]
pub struct Linter<'a> {
    pub cfg: &'a DetectorConfig,
    pub kit: &'a TextKit,
    pub gate: &'a Gate,
    pub context: &'a DatasetContext,
}

impl Linter<'_> {
    /// Whether LLM confirmation is both wanted and possible.
    pub fn llm_active(&self) -> bool {
        self.cfg.llm_enabled && self.gate.enabled()
    }

    /// Runs every detector in canonical order.
    pub fn run(&self, mcq: &Mcq) -> FlawReport {
        let a = Analysis::new(self.kit, mcq);
        let mut findings: Vec<FlawFinding> = Vec::with_capacity(CriterionId::COUNT);
        let tf = if self.cfg.is_enabled(CriterionId::TrueOrFalse) {
            text_match::true_or_false(self, &a)
        } else {
            FlawFinding::clear(CriterionId::TrueOrFalse).with_note("disabled")
        };
        for c in CriterionId::ALL {
            if !self.cfg.is_enabled(c) {
                findings.push(FlawFinding::clear(c).with_note("disabled"));
                continue;
            }
            let f = match c {
                CriterionId::TrueOrFalse => tf.clone(),
                CriterionId::LongestOptionCorrect => text_match::longest_option_correct(self, &a, tf.flagged),
                _ => self.detect(c, &a),
            };
            debug_assert_eq!(f.criterion, c);
            findings.push(f);
        }
        FlawReport::new(mcq.id.clone(), findings)
    }

    /// Runs one detector on its own.
    pub fn run_one(&self, c: CriterionId, mcq: &Mcq) -> FlawFinding {
        let a = Analysis::new(self.kit, mcq);
        match c {
            CriterionId::LongestOptionCorrect => {
                let tf = text_match::true_or_false(self, &a).flagged;
                text_match::longest_option_correct(self, &a, tf)
            }
            _ => self.detect(c, &a),
        }
    }

    fn detect(&self, c: CriterionId, a: &Analysis<'_>) -> FlawFinding {
        use CriterionId::*;
        match c {
            LongestOptionCorrect => text_match::longest_option_correct(self, a, false),
            TrueOrFalse => text_match::true_or_false(self, a),
            NoneOfTheAbove => text_match::none_of_the_above(self, a),
            AllOfTheAbove => text_match::all_of_the_above(self, a),
            FillInTheBlank => text_match::fill_in_the_blank(self, a),
            NegativelyWorded => text_match::negatively_worded(self, a),
            LostSequence => text_match::lost_sequence(self, a),
            VagueTerms => text_match::vague_terms(self, a),
            ImplausibleDistractors => nlp::implausible_distractors(self, a),
            WordRepeats => nlp::word_repeats(self, a),
            LogicalCues => nlp::logical_cues(self, a),
            AmbiguousInformation => nlp::ambiguous_information(self, a),
            GrammaticalCues => nlp::grammatical_cues(self, a),
            AbsoluteTerms => llm::absolute_terms(self, a),
            MoreThanOneCorrect => llm::more_than_one_correct(self, a),
            ComplexKType => llm::complex_k_type(self, a),
            GratuitousInformation => llm::gratuitous_information(self, a),
            UnfocusedStem => llm::unfocused_stem(self, a),
            ConvergenceCues => llm::convergence_cues(self, a),
        }
    }
}

/// Lints a single question with no dataset context.
pub fn run_all(mcq: &Mcq, cfg: &DetectorConfig, kit: &TextKit, gate: &Gate) -> FlawReport {
    let context = DatasetContext::default();
    Linter {
        cfg,
        kit,
        gate,
        context: &context,
    }
    .run(mcq)
}
