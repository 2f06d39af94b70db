//! Literal and pattern detectors.

use once_cell::sync::Lazy;
use regex::Regex;

use super::shape::{self, blank_markers, normalize_phrase, parse_scalar, term_hits};
use super::{Analysis, Evidence, FlawFinding, Linter, Location};
use crate::criteria::CriterionId;

fn phrase_options(a: &Analysis<'_>, phrases: &[String], c: CriterionId) -> FlawFinding {
    let ev = a
        .mcq
        .options
        .iter()
        .enumerate()
        .filter(|(_, o)| {
            let n = normalize_phrase(&o.text);
            phrases.contains(&n)
        })
        .map(|(i, _)| Evidence::option(a.mcq, i, "catch-all option"))
        .collect();
    FlawFinding::from_evidence(c, ev)
}

pub(super) fn none_of_the_above(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    phrase_options(a, &l.kit.lexicons.noa_phrases, CriterionId::NoneOfTheAbove)
}

pub(super) fn all_of_the_above(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    phrase_options(a, &l.kit.lexicons.aota_phrases, CriterionId::AllOfTheAbove)
}

pub(super) fn fill_in_the_blank(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let stem = &a.mcq.stem;
    let ev = blank_markers(stem, l.cfg.min_blank_run)
        .into_iter()
        .filter(|&(_, end)| stem[end..].chars().any(char::is_alphanumeric))
        .map(|span| Evidence::new(Location::Stem, span, "blank inside the stem"))
        .collect();
    FlawFinding::from_evidence(CriterionId::FillInTheBlank, ev)
}

static TF_LEAD: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)^\s*(true|false|yes|no)\b\s*(?:$|[,:;.\-\u{2013}\u{2014}(]|because\b)").unwrap()
});
static WHICH_TRUE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\bwhich\b[^?]*\b(is|are)\s+(true|false|untrue|not true)\b|\b(true|false)\s*\?\s*$").unwrap()
});

pub(super) fn true_or_false(_l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let c = CriterionId::TrueOrFalse;
    let q = a.mcq;
    if q.options.len() == 2 {
        let labels: Vec<Option<String>> = q
            .options
            .iter()
            .map(|o| TF_LEAD.captures(&o.text).map(|m| m[1].to_lowercase()))
            .collect();
        if let [Some(x), Some(y)] = &labels[..] {
            let pair = [x.as_str(), y.as_str()];
            let tf = pair.contains(&"true") && pair.contains(&"false");
            let yn = pair.contains(&"yes") && pair.contains(&"no");
            if tf || yn {
                let ev = (0..2)
                    .map(|i| Evidence::option(q, i, "binary true/false or yes/no choice"))
                    .collect();
                return FlawFinding::flag(c, ev);
            }
        }
    }
    if let Some(m) = WHICH_TRUE.find(&q.stem) {
        if a.options.iter().all(|t| shape::is_clause(t)) {
            let ev = vec![Evidence::new(
                Location::Stem,
                (m.start(), m.end()),
                "asks which statement is true or false; every option is a statement",
            )];
            return FlawFinding::flag(c, ev);
        }
    }
    FlawFinding::clear(c)
}

pub(super) fn longest_option_correct(l: &Linter<'_>, a: &Analysis<'_>, true_false: bool) -> FlawFinding {
    let c = CriterionId::LongestOptionCorrect;
    let q = a.mcq;
    if true_false {
        return FlawFinding::clear(c);
    }
    let len = |i: usize| q.options[i].text.trim().chars().count();
    let correct = len(q.key);
    let longest_distractor = q.distractors().map(len).max().unwrap_or(0);
    let ratio = l.cfg.longest_ratio_for(&q.domain);
    if correct > longest_distractor && (longest_distractor as f64) < ratio * correct as f64 {
        let note = format!(
            "keyed option has {correct} characters; longest distractor has {longest_distractor}"
        );
        return FlawFinding::flag(c, vec![Evidence::option(q, q.key, note)]);
    }
    FlawFinding::clear(c)
}

/// Byte ranges inside double quotes.
fn quoted_spans(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        match ch {
            '"' => match open.take() {
                Some(s) => out.push((s, i)),
                None => open = Some(i),
            },
            '\u{201c}' => open = Some(i),
            '\u{201d}' => {
                if let Some(s) = open.take() {
                    out.push((s, i));
                }
            }
            _ => {}
        }
    }
    out
}

pub(super) fn negatively_worded(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let quotes = quoted_spans(&a.mcq.stem);
    let ev = term_hits(&a.stem, &l.kit.lexicons.negation_markers)
        .into_iter()
        .filter(|t| {
            let caps = t.surface.chars().count() > 1 && t.surface.chars().all(|c| !c.is_lowercase());
            caps || !quotes.iter().any(|&(s, e)| s < t.span.0 && t.span.1 <= e)
        })
        .map(|t| Evidence::new(Location::Stem, t.span, format!("negation `{}`", t.surface)))
        .collect();
    FlawFinding::from_evidence(CriterionId::NegativelyWorded, ev)
}

pub(super) fn lost_sequence(_l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let c = CriterionId::LostSequence;
    let q = a.mcq;
    let Some(values) = q
        .options
        .iter()
        .map(|o| parse_scalar(&o.text))
        .collect::<Option<Vec<_>>>()
    else {
        return FlawFinding::clear(c);
    };
    let same_kind = values.iter().all(|v| v.is_date == values[0].is_date);
    let same_unit = values.iter().all(|v| v.unit == values[0].unit);
    if !same_kind || !same_unit {
        return FlawFinding::clear(c);
    }
    let ascending = values.windows(2).all(|w| w[0].value <= w[1].value);
    let descending = values.windows(2).all(|w| w[0].value >= w[1].value);
    if ascending || descending {
        return FlawFinding::clear(c);
    }
    let shown: Vec<String> = values.iter().map(|v| format!("{}", v.value)).collect();
    let ev = (0..q.options.len())
        .map(|i| Evidence::option(q, i, format!("values in option order: {}", shown.join(", "))))
        .collect();
    FlawFinding::flag(c, ev)
}

pub(super) fn vague_terms(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let mut ev = Vec::new();
    for (i, toks) in a.options.iter().enumerate() {
        for t in term_hits(toks, &l.kit.lexicons.vague_terms) {
            ev.push(Evidence::new(Location::Option(i), t.span, format!("vague term `{}`", t.surface)));
        }
    }
    FlawFinding::from_evidence(CriterionId::VagueTerms, ev)
}
