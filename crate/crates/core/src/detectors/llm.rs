//! Detectors that find a candidate lexically and then ask the gate.

use std::collections::{BTreeSet, HashMap};

use once_cell::sync::Lazy;
use regex::Regex;

use super::shape::{self, components, normalize_phrase, term_hits};
use super::{Analysis, Evidence, FlawFinding, Linter, Location};
use crate::criteria::CriterionId;
use crate::llmgate::AnswerVote;
use crate::llmgate::prompts::LABELS;
use crate::textkit::sentences;

/// Turns a candidate into a finding. With the LLM inactive the candidate
/// stands; otherwise one verify call decides.
fn confirm(l: &Linter<'_>, a: &Analysis<'_>, c: CriterionId, ev: Vec<Evidence>) -> FlawFinding {
    if ev.is_empty() {
        return FlawFinding::clear(c);
    }
    if !l.llm_active() {
        return FlawFinding::flag(c, ev);
    }
    let summary = ev.iter().map(|e| e.note.as_str()).collect::<Vec<_>>().join("; ");
    verdict(c, ev, l.gate.verify(c, a.mcq, &summary))
}

fn verdict(c: CriterionId, ev: Vec<Evidence>, r: crate::Result<bool>) -> FlawFinding {
    let mut f = match r {
        Ok(true) => FlawFinding::flag(c, ev),
        Ok(false) => FlawFinding::clear(c).with_note("candidate rejected by verification"),
        Err(e) => {
            let mut f = FlawFinding::clear(c);
            f.error = Some(e.to_string());
            f
        }
    };
    f.llm_consulted = true;
    f
}

pub(super) fn absolute_terms(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let terms = &l.kit.lexicons.absolute_terms;
    let lex = &l.kit.lexicons;
    let mut ev: Vec<Evidence> = term_hits(&a.stem, terms)
        .into_iter()
        .map(|t| Evidence::new(Location::Stem, t.span, format!("absolute term `{}`", t.surface)))
        .collect();
    for (i, toks) in a.options.iter().enumerate() {
        let n = normalize_phrase(&a.mcq.options[i].text);
        if lex.noa_phrases.contains(&n) || lex.aota_phrases.contains(&n) {
            continue;
        }
        for t in term_hits(toks, terms) {
            ev.push(Evidence::new(Location::Option(i), t.span, format!("absolute term `{}`", t.surface)));
        }
    }
    confirm(l, a, CriterionId::AbsoluteTerms, ev)
}

static SELECT_ALL: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\b(select|choose|mark|pick|circle|check|identify)\s+all\b|\ball\s+that\s+apply\b|\bwhich\s+of\s+the\s+following\s+are\b").unwrap()
});

pub(super) fn more_than_one_correct(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let c = CriterionId::MoreThanOneCorrect;
    let q = a.mcq;
    if let Some(m) = SELECT_ALL.find(&q.stem) {
        let ev = vec![Evidence::new(Location::Stem, (m.start(), m.end()), "select-all phrasing")];
        return FlawFinding::flag(c, ev);
    }

    let n = q.options.len();
    let norm: Vec<String> = q.options.iter().map(|o| normalize_phrase(&o.text)).collect();
    let mut dup = Vec::new();
    let mut close = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let edit = strsim::normalized_levenshtein(&norm[i], &norm[j]);
            let emb = l.kit.text_similarity(&q.options[i].text, &q.options[j].text);
            if edit >= l.cfg.near_dup_edit || emb >= l.cfg.near_dup_embedding {
                dup.push((i, j, edit, emb));
            } else if emb >= l.cfg.mtoc_candidate_threshold {
                close.push((i, j, emb));
            }
        }
    }
    if !dup.is_empty() {
        let ev = dup
            .into_iter()
            .flat_map(|(i, j, edit, emb)| {
                let note = format!(
                    "options {} and {} are near-duplicates (edit {edit:.2}, embedding {emb:.2})",
                    LABELS[i], LABELS[j]
                );
                [Evidence::option(q, i, note.clone()), Evidence::option(q, j, note)]
            })
            .collect();
        return FlawFinding::flag(c, ev);
    }

    if close.is_empty() || !l.llm_active() {
        return FlawFinding::clear(c);
    }
    let ev: Vec<Evidence> = close
        .iter()
        .flat_map(|&(i, j, emb)| {
            let note = format!("options {} and {} are close in meaning ({emb:.2})", LABELS[i], LABELS[j]);
            [Evidence::option(q, i, note.clone()), Evidence::option(q, j, note)]
        })
        .collect();
    let picked = match l.gate.ask_answer(q) {
        Ok(AnswerVote::Option(i)) => format!("an independent answer round chose {}", LABELS[i]),
        Ok(AnswerVote::Abstain) => "an independent answer round did not agree on one option".to_string(),
        Err(e) => return verdict(c, ev, Err(e)),
    };
    let mut summary = ev.iter().step_by(2).map(|e| e.note.as_str()).collect::<Vec<_>>().join("; ");
    summary.push_str("; ");
    summary.push_str(&picked);
    let r = l.gate.verify(c, q, &summary);
    verdict(c, ev, r)
}

static LABEL_REF: Lazy<Regex> = Lazy::new(|| {
    let label = r"(?:[a-e]|[1-9]|i{1,3}|iv|v)";
    Regex::new(&format!(
        r"(?i)^\s*(?:(?:both|neither|either)\s+)?\(?{label}\)?(?:\s*(?:,|and|or|&|nor)\s*\(?{label}\)?)+\s*\.?\s*$|^\s*\(?{label}\)?\s+only\s*\.?\s*$|^\s*(?:all|none)\s+of\s+(?:them|these|those)\s*\.?\s*$|^\s*(?:both|neither)\s*\.?\s*$"
    ))
    .unwrap()
});

pub(super) fn complex_k_type(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let q = a.mcq;
    let refs: Vec<usize> = (0..q.options.len())
        .filter(|&i| LABEL_REF.is_match(&q.options[i].text))
        .collect();
    let ev: Vec<Evidence> = if refs.len() >= 2 {
        refs.into_iter()
            .map(|i| Evidence::option(q, i, "option refers to other option labels"))
            .collect()
    } else {
        let parts: Vec<Vec<String>> = q.options.iter().map(|o| components(&o.text)).collect();
        let lists: Vec<usize> = (0..parts.len()).filter(|&i| parts[i].len() >= 3).collect();
        let shared: Vec<usize> = lists
            .iter()
            .copied()
            .filter(|&i| {
                lists
                    .iter()
                    .any(|&j| j != i && parts[i].iter().any(|p| parts[j].contains(p)))
            })
            .collect();
        if shared.len() >= 2 {
            shared
                .into_iter()
                .map(|i| Evidence::option(q, i, "enumerated list sharing parts with another option"))
                .collect()
        } else {
            Vec::new()
        }
    };
    confirm(l, a, CriterionId::ComplexKType, ev)
}

pub(super) fn gratuitous_information(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let c = CriterionId::GratuitousInformation;
    let q = a.mcq;
    let len = shape::word_count(l.kit, &q.stem) as f64;
    let median = l.context.median_for(l.kit, q);
    if len <= 2.0 * median {
        return FlawFinding::clear(c);
    }
    let spans = sentences(&q.stem);
    if spans.len() < 2 {
        return FlawFinding::clear(c);
    }
    let option_lemmas: BTreeSet<String> = q
        .options
        .iter()
        .flat_map(|o| l.kit.content_lemmas(&o.text))
        .collect();
    let ev = spans
        .into_iter()
        .filter(|&(s, e)| {
            let lemmas = l.kit.content_lemmas(&q.stem[s..e]);
            !lemmas.is_empty() && lemmas.iter().all(|x| !option_lemmas.contains(x))
        })
        .map(|span| {
            Evidence::new(
                Location::Stem,
                span,
                format!("sentence shares no content words with any option; stem has {len} words against a median of {median}"),
            )
        })
        .collect();
    confirm(l, a, c, ev)
}

static EVALUATIVE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\bwhich\s+(?:of\s+the\s+following\s+|one\s+|statements?\s+)?(?:is|are)\s+(?:correct|true|false|incorrect|right|wrong|accurate|valid)\s*\??\s*$").unwrap()
});

pub(super) fn unfocused_stem(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let q = a.mcq;
    let mut ev = Vec::new();
    let wf = l.kit.wellformedness(&q.stem);
    if wf < l.cfg.wellformedness_threshold {
        ev.push(Evidence::stem(q, format!("well-formedness {wf:.2}")));
    }
    if l.kit.frame(&q.stem).is_none() {
        ev.push(Evidence::stem(q, "no question, instruction or completion frame"));
    }
    if let Some(m) = EVALUATIVE.find(&q.stem) {
        ev.push(Evidence::new(
            Location::Stem,
            (m.start(), m.end()),
            "asks what is correct without saying about what",
        ));
    }
    confirm(l, a, CriterionId::UnfocusedStem, ev)
}

pub(super) fn convergence_cues(l: &Linter<'_>, a: &Analysis<'_>) -> FlawFinding {
    let q = a.mcq;
    let parts: Vec<BTreeSet<String>> = q
        .options
        .iter()
        .map(|o| components(&o.text).into_iter().collect())
        .collect();
    let multi = parts.iter().filter(|p| p.len() >= 2).count();
    if 2 * multi < parts.len() {
        return FlawFinding::clear(CriterionId::ConvergenceCues);
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for p in &parts {
        for x in p {
            *freq.entry(x.as_str()).or_default() += 1;
        }
    }
    let total: Vec<usize> = parts
        .iter()
        .map(|p| p.iter().map(|x| freq[x.as_str()]).sum())
        .collect();
    let key = total[q.key];
    let beats_all = q.distractors().all(|i| key >= total[i]);
    let beats_one = q.distractors().any(|i| key > total[i]);
    let ev = if beats_all && beats_one {
        vec![Evidence::option(
            q,
            q.key,
            format!("keyed option's parts recur most across options (total {key})"),
        )]
    } else {
        Vec::new()
    };
    confirm(l, a, CriterionId::ConvergenceCues, ev)
}
