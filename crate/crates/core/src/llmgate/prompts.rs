//! Versioned prompt templates and strict response parsers.

use std::collections::BTreeMap;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::Deserialize;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::Mcq;
use crate::criteria::{CriterionId, Tier};

const BUNDLED: &str = include_str!("../../data/prompts.toml");

#[derive(Debug, Clone, Deserialize)]
pub struct Templates {
    pub version: String,
    pub system: String,
    pub answer: Vec<String>,
    pub verify: BTreeMap<String, String>,
}

static TEMPLATES: Lazy<Templates> = Lazy::new(|| {
    let t: Templates = toml::from_str(BUNDLED).expect("bundled prompts parse");
    assert_eq!(t.answer.len(), ANSWER_PROMPTS, "three answer prompts");
    t
});

pub const ANSWER_PROMPTS: usize = 3;

pub fn templates() -> &'static Templates {
    &TEMPLATES
}

pub const LABELS: [char; 5] = ['A', 'B', 'C', 'D', 'E'];

/// Options as `A. text` lines, in their original order.
pub fn render_options(mcq: &Mcq) -> String {
    mcq.options
        .iter()
        .enumerate()
        .map(|(i, o)| format!("{}. {}", LABELS[i], o.text.trim()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn fill(template: &str, mcq: &Mcq, evidence: &str) -> String {
    template
        .replace("{stem}", mcq.stem.trim())
        .replace("{options}", &render_options(mcq))
        .replace("{evidence}", evidence.trim())
        .nfc()
        .collect()
}

pub fn render_answer(mcq: &Mcq, variant: usize) -> String {
    fill(&templates().answer[variant], mcq, "")
}

pub fn render_verify(criterion: CriterionId, mcq: &Mcq, evidence: &str) -> Option<String> {
    if criterion.tier() != Tier::LlmVerified {
        return None;
    }
    let t = templates().verify.get(criterion.key())?;
    Some(fill(t, mcq, evidence))
}

static PAREN_LETTER: Lazy<Regex> = Lazy::new(|| Regex::new(r"\(([A-E])\)").unwrap());
static ANSWER_IS: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i:answer|option|choice)\s*(?:(?i:is)|:)?\s*\(?([A-E])\b").unwrap());
static LEADING: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^\s*\*{0,2}\(?([A-E])\s*(?:[\).:,*]|$)").unwrap());

/// Extracts an option index from a free-text answer. Letters beyond the
/// option count are rejected.
pub fn parse_letter(response: &str, n_options: usize) -> Option<usize> {
    let idx = |c: &str| c.chars().next().map(|ch| ch as usize - 'A' as usize);
    for re in [&*LEADING, &*PAREN_LETTER, &*ANSWER_IS] {
        if let Some(c) = re.captures(response) {
            let i = idx(&c[1])?;
            return (i < n_options).then_some(i);
        }
    }
    None
}

/// Reads a leading yes/no token. `None` when neither is present.
pub fn parse_yes_no(response: &str) -> Option<bool> {
    let first = response
        .split(|c: char| !c.is_alphanumeric())
        .find(|w| !w.is_empty())?
        .to_lowercase();
    match first.as_str() {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    }
}

/// Majority of three; `None` (abstain) when fewer than two parse or no
/// option gets two votes.
pub fn majority(votes: &[Option<usize>]) -> Option<usize> {
    let parsed: Vec<usize> = votes.iter().flatten().copied().collect();
    if parsed.len() < 2 {
        return None;
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for v in &parsed {
        *counts.entry(*v).or_default() += 1;
    }
    let (best, n) = counts.iter().max_by_key(|(_, n)| **n)?;
    let ties = counts.values().filter(|c| *c == n).count();
    (*n * 2 > parsed.len() && ties == 1).then_some(*best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Mcq {
        Mcq::new(
            "q1",
            "chemistry",
            "What is protons?",
            vec![
                "positively charged particles".into(),
                "sum the number of protons and neutrons".into(),
                "negatively charged subatomic particles".into(),
                "he discovered the charge of electron".into(),
            ],
            0,
        )
        .unwrap()
    }

    #[test]
    fn letters() {
        assert_eq!(parse_letter("The answer is (B).", 4), Some(1));
        assert_eq!(parse_letter("A", 4), Some(0));
        assert_eq!(parse_letter("C. negatively charged", 4), Some(2));
        assert_eq!(parse_letter("Answer: D", 4), Some(3));
        assert_eq!(parse_letter("I am not sure about this one.", 4), None);
        assert_eq!(parse_letter("A good question, hard to say.", 4), None);
        assert_eq!(parse_letter("E", 4), None);
    }

    #[test]
    fn yes_no() {
        assert_eq!(parse_yes_no("Yes"), Some(true));
        assert_eq!(parse_yes_no("No \u{2014} the term is used literally"), Some(false));
        assert_eq!(parse_yes_no("  yes, clearly"), Some(true));
        assert_eq!(parse_yes_no("Maybe"), None);
        assert_eq!(parse_yes_no(""), None);
    }

    #[test]
    fn votes() {
        assert_eq!(majority(&[Some(0), Some(0), Some(0)]), Some(0));
        assert_eq!(majority(&[Some(1), None, Some(1)]), Some(1));
        assert_eq!(majority(&[Some(1), None, None]), None);
        assert_eq!(majority(&[Some(0), Some(1), Some(2)]), None);
        assert_eq!(majority(&[Some(0), Some(1), None]), None);
    }

    #[test]
    fn rendering_labels_options_in_order() {
        let q = fig1();
        for v in 0..ANSWER_PROMPTS {
            let p = render_answer(&q, v);
            assert!(p.contains("A. positively charged particles\nB. sum the number"));
            assert!(p.contains("D. he discovered"));
            assert!(p.contains("What is protons?"));
        }
    }

    #[test]
    fn every_llm_criterion_has_a_template() {
        for c in CriterionId::ALL {
            let r = render_verify(c, &fig1(), "x");
            assert_eq!(r.is_some(), c.tier() == Tier::LlmVerified, "{c}");
        }
    }
}
