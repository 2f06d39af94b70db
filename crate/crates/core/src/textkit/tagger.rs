//! Coarse POS tagging and lemmatization.
//!
//! Closed-class words come from a fixed table. Open-class words take their
//! candidate readings from the lexicon and are disambiguated by a handful of
//! left/right context rules; unknown words fall back to suffix shape. All
//! decisions are made on the lowercased form so tagging is case-blind.

use super::lexicon::Morphology;
use super::tokenize::{segment, RawKind};
use super::{Pos, Token};

fn closed_class(w: &str) -> Option<Pos> {
    Some(match w {
        "the" | "a" | "an" | "this" | "that" | "these" | "those" | "each" | "every" | "some"
        | "any" | "no" | "all" | "both" | "either" | "neither" | "another" | "such" | "my"
        | "your" | "his" | "her" | "its" | "our" | "their" | "whose" => Pos::Det,
        "i" | "you" | "he" | "she" | "it" | "we" | "they" | "me" | "him" | "us" | "them"
        | "what" | "who" | "whom" | "which" | "myself" | "yourself" | "himself" | "herself"
        | "itself" | "ourselves" | "themselves" | "something" | "anything" | "nothing"
        | "everything" | "someone" | "anyone" | "everyone" | "none" | "mine" | "yours"
        | "hers" | "ours" | "theirs" => Pos::Pron,
        "is" | "are" | "was" | "were" | "be" | "been" | "being" | "am" | "do" | "does"
        | "did" | "have" | "has" | "had" | "can" | "could" | "will" | "would" | "shall"
        | "should" | "may" | "might" | "must" | "isn't" | "aren't" | "wasn't" | "weren't"
        | "doesn't" | "don't" | "didn't" | "can't" | "cannot" | "won't" | "hasn't"
        | "haven't" => Pos::Verb,
        "not" | "very" | "too" | "also" | "how" | "when" | "where" | "why" | "then" | "there"
        | "here" | "just" | "only" | "never" | "always" => Pos::Adv,
        "of" | "in" | "on" | "at" | "by" | "for" | "with" | "from" | "to" | "into" | "onto"
        | "about" | "above" | "below" | "between" | "through" | "during" | "before"
        | "after" | "over" | "under" | "without" | "within" | "among" | "against"
        | "across" | "along" | "around" | "than" | "as" | "and" | "or" | "but" | "nor"
        | "so" | "yet" | "if" | "because" | "while" | "although" | "though" | "whether"
        | "per" | "via" | "upon" | "toward" | "towards" | "until" | "unless" | "since" => {
            Pos::Other
        }
        _ => return None,
    })
}

const MODALS: &[&str] = &[
    "can", "could", "will", "would", "shall", "should", "may", "might", "must", "do", "does",
    "did", "to", "cannot", "can't", "won't", "don't", "doesn't", "didn't",
];

const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "he", "she", "it", "we", "they", "who"];

const NUMBER_WORDS: &[&str] = &[
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "twenty", "thirty", "forty", "fifty", "hundred", "thousand", "million",
    "billion",
];

fn shape_guess(w: &str) -> Pos {
    if w.ends_with("ly") && w.len() > 4 {
        Pos::Adv
    } else if w.ends_with("ing") || w.ends_with("ed") || w.ends_with("ize") || w.ends_with("ise")
    {
        Pos::Verb
    } else if ["ous", "ful", "ive", "al", "ic", "able", "ible", "less", "ary"]
        .iter()
        .any(|s| w.ends_with(s))
    {
        Pos::Adj
    } else {
        Pos::Noun
    }
}

fn is_inflected_verb(morph: &Morphology, w: &str) -> bool {
    ((w.ends_with('s') && !w.ends_with("ss")) || w.ends_with("ed")) && !morph.is_base(Pos::Verb, w)
}

/// Capitalized words read only as verbs that are not plausibly opening an
/// imperative ("Mars", "Will") are names.
fn proper_noun(morph: &Morphology, forms: &[(String, RawKind)], i: usize, reading: &[Pos]) -> bool {
    let w = forms[i].0.as_str();
    if reading.is_empty() || reading.iter().any(|p| *p != Pos::Verb) || w.ends_with("ed") || w.ends_with("ing") {
        return false;
    }
    let opens = i == 0 || matches!(forms[i - 1].0.as_str(), "." | "?" | "!" | ":" | ";");
    let lone = forms.iter().filter(|(_, k)| *k == RawKind::Word).count() == 1;
    !opens || lone || is_inflected_verb(morph, w)
}

/// Picks one POS for each lowercase word form. `capitalized[i]` marks
/// forms whose surface starts with an uppercase letter.
fn tag_forms(morph: &Morphology, forms: &[(String, RawKind)], capitalized: &[bool]) -> Vec<Pos> {
    let n = forms.len();
    let mut cands: Vec<Vec<Pos>> = Vec::with_capacity(n);
    for (i, (w, kind)) in forms.iter().enumerate() {
        let c = match kind {
            RawKind::Punct => vec![Pos::Other],
            RawKind::Number => vec![Pos::Num],
            RawKind::Word => {
                if NUMBER_WORDS.contains(&w.as_str()) {
                    vec![Pos::Num]
                } else if let Some(p) = closed_class(w) {
                    vec![p]
                } else {
                    let s = morph.pos_set(w);
                    if capitalized[i] && proper_noun(morph, forms, i, &s) {
                        vec![Pos::Noun]
                    } else if s.is_empty() {
                        vec![shape_guess(w)]
                    } else {
                        s
                    }
                }
            }
        };
        cands.push(c);
    }

    let mut tags: Vec<Pos> = Vec::with_capacity(n);
    for i in 0..n {
        let c = &cands[i];
        if c.len() == 1 {
            tags.push(c[0]);
            continue;
        }
        let w = forms[i].0.as_str();
        let has = |p: Pos| c.contains(&p);
        let prev_form = if i > 0 { Some(forms[i - 1].0.as_str()) } else { None };
        let prev_tag = tags.last().copied();
        let next = cands.get(i + 1);
        let next_is = |p: Pos| next.is_some_and(|nc| nc.contains(&p));
        let next_noun_like = next.is_some_and(|nc| nc.iter().any(|p| matches!(p, Pos::Noun | Pos::Adj)));
        let sentence_start = i == 0
            || forms[i - 1].1 == RawKind::Punct
                && matches!(forms[i - 1].0.as_str(), "." | "?" | "!" | ":" | ";");

        let after_subject = prev_form.is_some_and(|p| MODALS.contains(&p) || SUBJECT_PRONOUNS.contains(&p));
        let imperative = sentence_start
            && next.is_some_and(|nc| nc.iter().any(|p| matches!(p, Pos::Det | Pos::Pron | Pos::Num)));
        let pick = if has(Pos::Verb) && (after_subject || imperative) {
            Pos::Verb
        } else if matches!(prev_tag, Some(Pos::Det | Pos::Adj | Pos::Num)) {
            if has(Pos::Adj) && next_is(Pos::Noun) {
                Pos::Adj
            } else if has(Pos::Noun) {
                Pos::Noun
            } else if has(Pos::Adj) {
                Pos::Adj
            } else {
                c[0]
            }
        } else if has(Pos::Adj) && next_noun_like && !matches!(prev_tag, Some(Pos::Noun)) {
            Pos::Adj
        } else if has(Pos::Verb) && matches!(prev_tag, Some(Pos::Noun)) && is_inflected_verb(morph, w) {
            Pos::Verb
        } else if has(Pos::Noun) {
            Pos::Noun
        } else if has(Pos::Verb) {
            Pos::Verb
        } else if has(Pos::Adj) {
            Pos::Adj
        } else {
            c[0]
        };
        tags.push(pick);
    }
    tags
}

fn strip_possessive(w: &str) -> &str {
    w.strip_suffix("'s")
        .or_else(|| w.strip_suffix("\u{2019}s"))
        .or_else(|| w.strip_suffix('\''))
        .filter(|s| !s.is_empty())
        .unwrap_or(w)
}

/// Lemma of a surface form under a POS. Unknown words pass through
/// lowercased.
pub fn lemmatize(morph: &Morphology, surface: &str, pos: Pos) -> String {
    let lower = surface.to_lowercase();
    if matches!(pos, Pos::Num | Pos::Other | Pos::Det | Pos::Pron) {
        return lower;
    }
    let w = strip_possessive(&lower);
    if morph.is_base(pos, w) {
        return w.to_string();
    }
    if let Some(l) = morph.irregular_lemma(w, pos) {
        return l.to_string();
    }
    if let Some(l) = morph.lexicon_lemma(w, pos) {
        return l.to_string();
    }
    let known = |s: &str| morph.knows(s) && s.len() > 1;
    let candidates: Vec<String> = match pos {
        Pos::Noun => {
            let mut v = Vec::new();
            if let Some(s) = w.strip_suffix("ies") {
                v.push(format!("{s}y"));
            }
            if let Some(s) = w.strip_suffix("es") {
                v.push(s.to_string());
            }
            if let Some(s) = w.strip_suffix('s').filter(|s| !s.ends_with('s')) {
                v.push(s.to_string());
            }
            v
        }
        Pos::Verb => {
            let mut v = Vec::new();
            for suf in ["ing", "ed"] {
                if let Some(s) = w.strip_suffix(suf) {
                    v.push(s.to_string());
                    v.push(format!("{s}e"));
                    let b = s.as_bytes();
                    if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
                        v.push(s[..s.len() - 1].to_string());
                    }
                }
            }
            if let Some(s) = w.strip_suffix("ied") {
                v.push(format!("{s}y"));
            }
            if let Some(s) = w.strip_suffix("ies") {
                v.push(format!("{s}y"));
            }
            if let Some(s) = w.strip_suffix("es") {
                v.push(s.to_string());
            }
            if let Some(s) = w.strip_suffix('s').filter(|s| !s.ends_with('s')) {
                v.push(s.to_string());
            }
            v
        }
        _ => Vec::new(),
    };
    candidates
        .into_iter()
        .find(|c| known(c))
        .unwrap_or_else(|| w.to_string())
}

/// Tokenizes and tags `text`.
pub fn tokenize(morph: &Morphology, text: &str) -> Vec<Token> {
    let raw = segment(text);
    let forms: Vec<(String, RawKind)> = raw
        .iter()
        .map(|t| (text[t.start..t.end].to_lowercase(), t.kind))
        .collect();
    let capitalized: Vec<bool> = raw
        .iter()
        .map(|t| text[t.start..t.end].chars().next().is_some_and(char::is_uppercase))
        .collect();
    let tags = tag_forms(morph, &forms, &capitalized);
    raw.iter()
        .zip(tags)
        .map(|(t, pos)| {
            let surface = &text[t.start..t.end];
            let mut lemma = lemmatize(morph, surface, pos);
            if lemma.is_empty() {
                lemma = surface.to_string();
            }
            Token {
                surface: surface.to_string(),
                lemma,
                pos,
                span: (t.start, t.end),
            }
        })
        .collect()
}
