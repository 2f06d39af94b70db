//! Detectors built on lemmas, tags, embeddings and stem well-formedness.

use std::collections::HashSet;

use super::shape::{self, expected_type, fits_expected, is_clause, signature, Expected};
use super::{Analysis, Evidence, FlawFinding, Linter, Location};
use crate::criteria::CriterionId;
use crate::textkit::{vowel_sound, Pos, TextKit, Token};

fn content<'t>(kit: &TextKit, toks: &'t [Token]) -> Vec<&'t Token> {
    toks.iter()
        .filter(|t| {
            matches!(t.pos, Pos::Noun | Pos::Verb | Pos::Adj | Pos::Adv | Pos::Num)
                && shape::is_word(t)
                && !kit.lexicons.is_stopword(&t.lemma)
                && !kit.lexicons.is_stopword(&t.surface.to_lowercase())
        })
        .collect()
}

fn lemmas(kit: &TextKit, toks: &[Token]) -> Vec<String> {
    content(kit, toks).into_iter().map(|t| t.lemma.clone()).collect()
}

/// Whether a distractor answers a different kind of question than the key.
fn structural_mismatch(a: &Analysis<'_>, expected: Option<Expected>, i: usize) -> bool {
    match expected {
        Some(e) => !fits_expected(&a.options[i], e),
        None => is_clause(&a.options[i]) != is_clause(&a.options[a.mcq.key]),
    }
}

pub(super) fn implausible_distractors(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let q = a.mcq;
    let expected = expected_type(&q.stem);
    let key_lemmas = lemmas(l.kit, &a.options[q.key]);
    let mut ev = Vec::new();
    for i in q.distractors() {
        let sim = l.kit.lemma_set_similarity(&lemmas(l.kit, &a.options[i]), &key_lemmas);
        if sim < l.cfg.implausible_sim_threshold && structural_mismatch(a, expected, i) {
            ev.push(Evidence::option(
                q,
                i,
                format!("similarity to key {sim:.3}; does not fit the form of answer the stem asks for"),
            ));
        }
    }
    FlawFinding::from_evidence(CriterionId::ImplausibleDistractors, ev)
}

pub(super) fn word_repeats(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let q = a.mcq;
    let stem = content(l.kit, &a.stem);
    let key = content(l.kit, &a.options[q.key]);
    let in_distractors: HashSet<&str> = q
        .distractors()
        .flat_map(|i| content(l.kit, &a.options[i]))
        .map(|t| t.lemma.as_str())
        .collect();
    let mut ev = Vec::new();
    let mut seen = HashSet::new();
    for s in &stem {
        if in_distractors.contains(s.lemma.as_str()) || !seen.insert(s.lemma.as_str()) {
            continue;
        }
        let hits: Vec<&&Token> = key.iter().filter(|k| k.lemma == s.lemma).collect();
        if hits.is_empty() {
            continue;
        }
        let note = format!("`{}` repeated only between stem and key", s.lemma);
        ev.push(Evidence::new(Location::Stem, s.span, note.clone()));
        for k in hits {
            ev.push(Evidence::new(Location::Option(q.key), k.span, note.clone()));
        }
    }
    FlawFinding::from_evidence(CriterionId::WordRepeats, ev)
}

/// Strongest non-identical lemma association between stem and option, with
/// the pair that produced it. Pairs below `floor` do not count.
fn association(kit: &TextKit, stem: &[String], option: &[String], floor: f64) -> (f64, Option<(String, String)>) {
    let mut best = (0.0, None);
    for s in stem {
        for o in option {
            if s == o {
                continue;
            }
            if let Some(c) = kit.embeddings.word_similarity(s, o) {
                if c >= floor && c > best.0 {
                    best = (c, Some((s.clone(), o.clone())));
                }
            }
        }
    }
    best
}

pub(super) fn logical_cues(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let q = a.mcq;
    let stem = lemmas(l.kit, &a.stem);
    let floor = l.cfg.synonym_threshold;
    let scores: Vec<(f64, Option<(String, String)>)> = a
        .options
        .iter()
        .map(|o| association(l.kit, &stem, &lemmas(l.kit, o), floor))
        .collect();
    let key = scores[q.key].0;
    let rival = q.distractors().map(|i| scores[i].0).fold(0.0, f64::max);
    if key > rival && key - rival >= l.cfg.logical_margin {
        let (s, o) = scores[q.key].1.clone().expect("positive association has a pair");
        let ev = vec![Evidence::option(
            q,
            q.key,
            format!("`{o}` associates with stem word `{s}` ({key:.3} vs best distractor {rival:.3})"),
        )];
        return FlawFinding::flag(CriterionId::LogicalCues, ev);
    }
    FlawFinding::clear(CriterionId::LogicalCues)
}

pub(super) fn ambiguous_information(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let q = a.mcq;
    let mut ev = Vec::new();
    let wf = l.kit.wellformedness(&q.stem);
    if wf < l.cfg.wellformedness_threshold {
        ev.push(Evidence::stem(q, format!("well-formedness {wf:.2}")));
    }
    if let Some(span) = l.kit.dangling_pronoun(&q.stem) {
        ev.push(Evidence::new(Location::Stem, span, "pronoun with no referent in the stem"));
    }
    if q.options.len() >= 3 {
        let clauses: Vec<bool> = a.options.iter().map(|t| is_clause(t)).collect();
        for i in 0..q.options.len() {
            let others_all_sentences = (0..q.options.len()).filter(|j| *j != i).all(|j| clauses[j]);
            if !clauses[i] && others_all_sentences {
                ev.push(Evidence::option(q, i, "fragment among full-sentence options"));
            }
        }
    }
    FlawFinding::from_evidence(CriterionId::AmbiguousInformation, ev)
}

/// The stem's final word, skipping blank markers and trailing punctuation.
fn final_word(toks: &[Token]) -> Option<&Token> {
    toks.iter().rev().find(|t| shape::is_word(t))
}

pub(super) fn grammatical_cues(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let q = a.mcq;
    let c = CriterionId::GrammaticalCues;
    let _ = l;

    if let Some(last) = final_word(&a.stem) {
        let art = last.surface.to_lowercase();
        if art == "a" || art == "an" {
            let agrees = |i: usize| {
                a.options[i]
                    .iter()
                    .find(|t| shape::is_word(t))
                    .is_some_and(|t| vowel_sound(&t.surface) == (art == "an"))
            };
            let bad: Vec<usize> = q.distractors().filter(|&i| !agrees(i)).collect();
            if agrees(q.key) && !bad.is_empty() {
                let mut ev = vec![Evidence::new(
                    Location::Stem,
                    last.span,
                    format!("stem ends in `{art}`, which fits the key"),
                )];
                ev.extend(bad.into_iter().map(|i| Evidence::option(q, i, format!("does not follow `{art}`"))));
                return FlawFinding::flag(c, ev);
            }
        }
    }

    let sigs: Vec<(Pos, Pos)> = a.options.iter().map(|t| signature(t)).collect();
    if sigs.iter().all(|s| *s == sigs[0]) {
        return FlawFinding::clear(c);
    }
    let Some(expected) = expected_type(&q.stem) else {
        return FlawFinding::clear(c);
    };
    if !fits_expected(&a.options[q.key], expected) {
        return FlawFinding::clear(c);
    }
    let odd: Vec<usize> = q
        .distractors()
        .filter(|&i| !fits_expected(&a.options[i], expected))
        .collect();
    if odd.is_empty() {
        return FlawFinding::clear(c);
    }
    let ev = odd
        .into_iter()
        .map(|i| {
            let (f, h) = sigs[i];
            Evidence::option(q, i, format!("form {f:?}/{h:?} differs from the key's {:?}/{:?}", sigs[q.key].0, sigs[q.key].1))
        })
        .collect();
    FlawFinding::flag(c, ev)
}
