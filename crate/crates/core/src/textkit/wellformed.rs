//! Question framing and the default well-formedness scorer.

use super::{Pos, TextKit, Token};

/// How a stem asks for its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Interrogative,
    Imperative,
    /// Sentence to be completed by the option ("The capital of France is").
    Completion,
}

/// A scorer in [0, 1] for how well a stem reads as a complete question.
pub trait WellformednessScorer: Send + Sync {
    fn score(&self, kit: &TextKit, stem: &str) -> f64;
}

/// Weighted sum of four binary signals.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicScorer {
    pub w_verb: f64,
    pub w_frame: f64,
    pub w_complete: f64,
    pub w_referent: f64,
    pub min_tokens: usize,
}

impl Default for HeuristicScorer {
    fn default() -> Self {
        HeuristicScorer {
            w_verb: 0.35,
            w_frame: 0.25,
            w_complete: 0.25,
            w_referent: 0.15,
            min_tokens: 4,
        }
    }
}

impl WellformednessScorer for HeuristicScorer {
    fn score(&self, kit: &TextKit, stem: &str) -> f64 {
        let toks = kit.tokenize(stem);
        let words = toks.iter().filter(|t| is_word(t)).count();
        if words == 0 {
            return 0.0;
        }
        let mut s = 0.0;
        if has_finite_verb(&toks) {
            s += self.w_verb;
        }
        if frame_of(&toks).is_some() {
            s += self.w_frame;
        }
        let terminal = toks
            .last()
            .is_some_and(|t| matches!(t.surface.as_str(), "?" | "." | "!"));
        if terminal || words >= self.min_tokens {
            s += self.w_complete;
        }
        if dangling_in(&toks).is_none() {
            s += self.w_referent;
        }
        s
    }
}

pub(crate) fn is_word(t: &Token) -> bool {
    t.pos != Pos::Other || t.surface.chars().next().is_some_and(char::is_alphanumeric)
}

const WH: &[&str] = &["what", "which", "who", "whom", "whose", "where", "when", "why", "how"];
const AUX: &[&str] = &[
    "is", "are", "was", "were", "do", "does", "did", "can", "could", "will", "would", "should",
    "has", "have", "had", "may", "might", "must", "shall",
];

pub(crate) fn has_finite_verb(toks: &[Token]) -> bool {
    toks.iter().enumerate().any(|(i, t)| {
        t.pos == Pos::Verb
            && !t.surface.to_lowercase().ends_with("ing")
            && !(i > 0 && toks[i - 1].surface.eq_ignore_ascii_case("to"))
    })
}

fn is_blank_marker(t: &Token) -> bool {
    t.surface.len() >= 3 && t.surface.chars().all(|c| c == '_')
}

pub(crate) fn frame_of(toks: &[Token]) -> Option<Frame> {
    let words: Vec<&Token> = toks.iter().filter(|t| is_word(t)).collect();
    let first = words.first()?;
    let first_l = first.surface.to_lowercase();
    let last = toks.last()?;
    if last.surface == "?" || WH.contains(&first_l.as_str()) || AUX.contains(&first_l.as_str()) {
        return Some(Frame::Interrogative);
    }
    if first.pos == Pos::Verb && first.lemma == first_l && words.len() > 1 {
        return Some(Frame::Imperative);
    }
    if toks.iter().any(is_blank_marker) {
        return Some(Frame::Completion);
    }
    let lower: String = toks.iter().map(|t| t.surface.to_lowercase()).collect::<Vec<_>>().join(" ");
    if lower.contains("( blank )") {
        return Some(Frame::Completion);
    }
    let trailing = words.last()?;
    if words.len() > 1 && matches!(trailing.pos, Pos::Verb | Pos::Det | Pos::Other) {
        return Some(Frame::Completion);
    }
    let ends_open = last.surface == ":" || last.surface == "\u{2026}" || lower.ends_with(". . .");
    if ends_open && has_finite_verb(toks) {
        return Some(Frame::Completion);
    }
    None
}

const DANGLING: &[&str] = &["it", "they", "them", "this", "he", "she", "its", "their", "his", "her"];
const EXPLETIVE_AFTER_IT: &[&str] = &[
    "true", "false", "possible", "necessary", "likely", "important", "correct", "known", "said",
];

/// Byte span of the first pronoun with no preceding noun in the text.
pub(crate) fn dangling_in(toks: &[Token]) -> Option<(usize, usize)> {
    let mut seen_noun = false;
    for (i, t) in toks.iter().enumerate() {
        if matches!(t.pos, Pos::Noun | Pos::Num) {
            seen_noun = true;
            continue;
        }
        let l = t.surface.to_lowercase();
        if seen_noun || !DANGLING.contains(&l.as_str()) {
            continue;
        }
        let next = toks.get(i + 1);
        if l == "this" && next.is_some_and(|n| matches!(n.pos, Pos::Noun | Pos::Adj)) {
            continue;
        }
        if l == "it" {
            let after = toks.get(i + 2).map(|n| n.surface.to_lowercase());
            if next.is_some_and(|n| n.lemma == "be")
                && after.is_some_and(|a| EXPLETIVE_AFTER_IT.contains(&a.as_str()))
            {
                continue;
            }
            // "is it true that ..."
            if i > 0 && toks[i - 1].lemma == "be" && next.is_some_and(|n| EXPLETIVE_AFTER_IT.contains(&n.surface.to_lowercase().as_str())) {
                continue;
            }
        }
        return Some(t.span);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::TextKit;
    use super::*;

    fn wf(s: &str) -> f64 {
        TextKit::bundled().wellformedness(s)
    }

    #[test]
    fn reference_scores() {
        assert!(wf("What is the capital of France?") >= 0.8);
        assert_eq!(wf(""), 0.0);
        assert!(wf("The mitochondria") <= 0.4);
        assert!(wf("What is protons?") >= 0.45);
        assert!(wf("Photosynthesis:") < 0.45);
    }

    #[test]
    fn frames() {
        let kit = TextKit::bundled();
        let f = |s: &str| frame_of(&kit.tokenize(s));
        assert_eq!(f("Which gas is most abundant?"), Some(Frame::Interrogative));
        assert_eq!(f("Design an experiment to test gravity."), Some(Frame::Imperative));
        assert_eq!(f("The capital of France is"), Some(Frame::Completion));
        assert_eq!(f("The ____ is the powerhouse of the cell."), Some(Frame::Completion));
        assert_eq!(f("The French Revolution:"), None);
        assert_eq!(f("Photosynthesis:"), None);
    }

    #[test]
    fn dangling_pronouns() {
        let kit = TextKit::bundled();
        let d = |s: &str| dangling_in(&kit.tokenize(s));
        assert_eq!(d("It is which?"), Some((0, 2)));
        assert_eq!(d("The cell divides when it grows."), None);
        assert_eq!(d("Is it true that water boils at 100 C?"), None);
        assert_eq!(d("What does this process produce?"), None);
    }
}
