//! A small fixed catalog of grammar rules.

use serde::{Deserialize, Serialize};

use crate::corpus::Mcq;
use crate::detectors::Location;
use crate::textkit::{sentences, vowel_sound, Pos, TextKit, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrammarRule {
    SubjectVerbAgreement,
    ArticleForm,
    DoubledWord,
    LowercaseSentenceStart,
    Spelling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarHit {
    pub rule: GrammarRule,
    pub location: Location,
    pub span: (usize, usize),
}

const SINGULAR_AUX: &[&str] = &["is", "was", "has", "does"];
const DOUBLE_OK: &[&str] = &["that", "had", "is"];

fn is_alpha_word(t: &Token) -> bool {
    t.surface.chars().all(|c| c.is_alphabetic() || c == '\'' || c == '\u{2019}' || c == '-')
        && t.surface.chars().next().is_some_and(char::is_alphabetic)
}

fn is_plural_noun(t: &Token) -> bool {
    let s = t.surface.to_lowercase();
    t.pos == Pos::Noun && s != t.lemma && s.ends_with('s') && !s.ends_with("ss")
}

fn words(tokens: &[Token]) -> Vec<&Token> {
    tokens
        .iter()
        .filter(|t| t.surface.chars().next().is_some_and(char::is_alphanumeric))
        .collect()
}

fn subject_verb(tokens: &[Token], out: &mut Vec<(GrammarRule, (usize, usize))>) {
    let w = words(tokens);
    for i in 0..w.len() {
        let aux = w[i].surface.to_lowercase();
        if !SINGULAR_AUX.contains(&aux.as_str()) {
            continue;
        }
        // "is protons", "is the protons"
        let mut j = i + 1;
        if w.get(j).is_some_and(|t| t.surface.eq_ignore_ascii_case("the")) {
            j += 1;
        }
        while w.get(j).is_some_and(|t| t.pos == Pos::Adj) {
            j += 1;
        }
        if let Some(n) = w.get(j) {
            let compound = w.get(j + 1).is_some_and(|t| t.pos == Pos::Noun);
            if is_plural_noun(n) && !compound && j > i {
                out.push((GrammarRule::SubjectVerbAgreement, (w[i].span.0, n.span.1)));
                continue;
            }
        }
        // "the protons is"
        if i >= 1 && is_plural_noun(w[i - 1]) {
            let det = i >= 2 && w[i - 2].surface.eq_ignore_ascii_case("the");
            if det || i == 1 {
                out.push((GrammarRule::SubjectVerbAgreement, (w[i - 1].span.0, w[i].span.1)));
            }
        }
    }
}

fn article_form(tokens: &[Token], out: &mut Vec<(GrammarRule, (usize, usize))>) {
    let w = words(tokens);
    for (i, pair) in w.windows(2).enumerate() {
        let (art, next) = (pair[0], pair[1]);
        let article = match art.surface.as_str() {
            "a" | "an" | "An" => true,
            "A" => i == 0,
            _ => false,
        };
        if !article || !is_alpha_word(next) || next.surface.chars().count() < 2 {
            continue;
        }
        if next.surface.chars().all(|c| !c.is_lowercase()) {
            continue;
        }
        let wants_an = vowel_sound(&next.surface);
        if wants_an != art.surface.eq_ignore_ascii_case("an") {
            out.push((GrammarRule::ArticleForm, (art.span.0, next.span.1)));
        }
    }
}

fn doubled(tokens: &[Token], out: &mut Vec<(GrammarRule, (usize, usize))>) {
    for pair in tokens.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let l = a.surface.to_lowercase();
        if is_alpha_word(a) && l == b.surface.to_lowercase() && !DOUBLE_OK.contains(&l.as_str()) {
            out.push((GrammarRule::DoubledWord, (a.span.0, b.span.1)));
        }
    }
}

fn lowercase_start(kit: &TextKit, text: &str, out: &mut Vec<(GrammarRule, (usize, usize))>) {
    for (s, e) in sentences(text) {
        let toks = kit.tokenize(&text[s..e]);
        let Some(first) = toks.iter().find(|t| t.surface.chars().next().is_some_and(char::is_alphanumeric)) else {
            continue;
        };
        let mut chars = first.surface.chars();
        let c0 = chars.next().expect("non-empty token");
        let camel = chars.any(char::is_uppercase);
        if c0.is_lowercase() && is_alpha_word(first) && !camel {
            out.push((GrammarRule::LowercaseSentenceStart, (s + first.span.0, s + first.span.1)));
        }
    }
}

fn spelling(kit: &TextKit, tokens: &[Token], out: &mut Vec<(GrammarRule, (usize, usize))>) {
    for t in tokens {
        let s = &t.surface;
        if !is_alpha_word(t) || s.chars().any(char::is_uppercase) || s.contains(['\'', '\u{2019}']) {
            continue;
        }
        if s.chars().count() < 2 {
            continue;
        }
        let known = |w: &str| kit.morphology.knows(w) || !kit.morphology.pos_set(w).is_empty();
        if !known(s) && !s.split('-').all(known) {
            out.push((GrammarRule::Spelling, t.span));
        }
    }
}

/// Rule hits for one piece of text. Sentence-initial case applies to stems
/// only, since options are often fragments.
pub fn check_text(kit: &TextKit, text: &str, is_stem: bool) -> Vec<(GrammarRule, (usize, usize))> {
    let toks = kit.tokenize(text);
    let mut out = Vec::new();
    subject_verb(&toks, &mut out);
    article_form(&toks, &mut out);
    doubled(&toks, &mut out);
    if is_stem {
        lowercase_start(kit, text, &mut out);
    }
    spelling(kit, &toks, &mut out);
    out
}

/// Hits over the stem and, when `with_options`, every option.
pub fn grammar_hits(kit: &TextKit, mcq: &Mcq, with_options: bool) -> Vec<GrammarHit> {
    let mut hits: Vec<GrammarHit> = check_text(kit, &mcq.stem, true)
        .into_iter()
        .map(|(rule, span)| GrammarHit {
            rule,
            location: Location::Stem,
            span,
        })
        .collect();
    if with_options {
        for (i, o) in mcq.options.iter().enumerate() {
            hits.extend(check_text(kit, &o.text, false).into_iter().map(|(rule, span)| GrammarHit {
                rule,
                location: Location::Option(i),
                span,
            }));
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules(text: &str) -> Vec<GrammarRule> {
        check_text(TextKit::bundled(), text, true).into_iter().map(|(r, _)| r).collect()
    }

    #[test]
    fn catalog() {
        assert_eq!(rules("What is protons?"), [GrammarRule::SubjectVerbAgreement]);
        assert!(rules("An apple a day.").is_empty());
        let r = rules("the the cat sat");
        assert!(r.len() >= 2);
        assert!(r.contains(&GrammarRule::DoubledWord) && r.contains(&GrammarRule::LowercaseSentenceStart));
        assert_eq!(rules("It is a apple."), [GrammarRule::ArticleForm]);
        assert_eq!(rules("It is an banana."), [GrammarRule::ArticleForm]);
        assert!(rules("It took an hour and a unicorn.").is_empty());
        assert_eq!(rules("The protons is small."), [GrammarRule::SubjectVerbAgreement]);
        assert!(rules("What is the mass of protons?").is_empty());
        assert_eq!(rules("Which planett is red?"), [GrammarRule::Spelling]);
        assert!(rules("What does my_function return in Python?").is_empty());
        assert!(rules("Option A is correct.").is_empty());
    }
}
