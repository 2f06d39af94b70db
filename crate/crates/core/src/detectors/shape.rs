//! Small structural helpers shared by several detectors.

use chrono::{Datelike, NaiveDate};
use once_cell::sync::Lazy;
use regex::Regex;

use crate::textkit::{segment, Pos, RawKind, TextKit, Token};

pub fn word_count(_kit: &TextKit, text: &str) -> usize {
    segment(text)
        .iter()
        .filter(|t| t.kind != RawKind::Punct)
        .count()
}

/// Lowercase, punctuation to spaces, whitespace collapsed.
pub fn normalize_phrase(text: &str) -> String {
    text.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '\'' { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

pub(crate) fn is_word(t: &Token) -> bool {
    t.surface.chars().next().is_some_and(char::is_alphanumeric)
}

/// Tokens that are whole-word, case-insensitive hits of `terms`.
pub(crate) fn term_hits<'t>(tokens: &'t [Token], terms: &[String]) -> Vec<&'t Token> {
    tokens
        .iter()
        .filter(|t| {
            let l = t.surface.to_lowercase();
            is_word(t) && terms.contains(&l)
        })
        .collect()
}

/// Answer type a stem asks for, from its wh-phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Noun,
    Num,
}

static NUM_Q: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\b(how many|how much|how long|how old|how far|what year|in which year|when|what percentage|what proportion|what fraction|what is the value|what number)\b").unwrap()
});
static NOUN_Q: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)\b(what|which|who|whom|where)\b").unwrap());

pub fn expected_type(stem: &str) -> Option<Expected> {
    if NUM_Q.is_match(stem) {
        Some(Expected::Num)
    } else if NOUN_Q.is_match(stem) {
        Some(Expected::Noun)
    } else {
        None
    }
}

const RELATIVES: &[&str] = &["which", "that", "who", "whom", "whose", "where", "when"];

fn finite_verb_at(tokens: &[Token], i: usize) -> bool {
    let t = &tokens[i];
    t.pos == Pos::Verb
        && !t.surface.to_lowercase().ends_with("ing")
        && !(i > 0 && tokens[i - 1].surface.eq_ignore_ascii_case("to"))
}

/// A clause has a subject (noun or pronoun) followed by a finite verb that
/// is not inside a relative clause.
pub fn is_clause(tokens: &[Token]) -> bool {
    let words: Vec<&Token> = tokens.iter().filter(|t| is_word(t)).collect();
    let mut subject = false;
    for (i, t) in tokens.iter().enumerate() {
        if !is_word(t) {
            continue;
        }
        let l = t.surface.to_lowercase();
        if RELATIVES.contains(&l.as_str()) && subject {
            return false;
        }
        if matches!(t.pos, Pos::Noun | Pos::Pron | Pos::Num) {
            subject = true;
        } else if finite_verb_at(tokens, i) && subject {
            return true;
        } else if t.pos == Pos::Other && std::ptr::eq(*words.first().unwrap(), t) {
            // leading preposition: a prepositional phrase, not a clause
            return false;
        }
    }
    false
}

/// Coarse head category of an option.
pub fn head_pos(tokens: &[Token]) -> Pos {
    let words: Vec<&Token> = tokens.iter().filter(|t| is_word(t)).collect();
    let Some(first) = words.first() else {
        return Pos::Other;
    };
    if is_clause(tokens) || first.pos == Pos::Verb {
        return Pos::Verb;
    }
    let mut head = None;
    for t in &words {
        if t.pos == Pos::Other {
            if head.is_some() {
                break;
            }
            continue;
        }
        if matches!(t.pos, Pos::Noun | Pos::Num | Pos::Pron) {
            head = Some(t.pos);
        }
    }
    head.unwrap_or(words.last().map_or(Pos::Other, |t| t.pos))
}

/// (first word POS, head POS).
pub fn signature(tokens: &[Token]) -> (Pos, Pos) {
    let first = tokens.iter().find(|t| is_word(t)).map_or(Pos::Other, |t| t.pos);
    (first, head_pos(tokens))
}

pub fn fits_expected(tokens: &[Token], e: Expected) -> bool {
    match e {
        Expected::Noun => matches!(head_pos(tokens), Pos::Noun | Pos::Num | Pos::Pron),
        Expected::Num => tokens.iter().any(|t| t.pos == Pos::Num),
    }
}

static SPLIT: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\s*(?:,|;|/|\band\b|\bor\b|&)\s*").unwrap());

/// Components of an option split on commas, semicolons, slashes, "and"
/// and "or", lowercased.
pub fn components(text: &str) -> Vec<String> {
    SPLIT
        .split(text.trim().trim_end_matches('.'))
        .map(normalize_phrase)
        .map(|c| {
            c.strip_prefix("both ")
                .or_else(|| c.strip_prefix("either "))
                .or_else(|| c.strip_prefix("neither "))
                .unwrap_or(&c)
                .to_string()
        })
        .filter(|c| !c.is_empty())
        .collect()
}

/// A parsed option value for ordering checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalar {
    pub value: f64,
    pub is_date: bool,
    pub unit: String,
}

static NUMBER: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"^(?P<cur>[$€£¥])?\s*(?P<num>[-+−]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|[-+]?\.\d+)\s*(?P<rest>.*)$",
    )
    .unwrap()
});
static RANGE_TAIL: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"^(?:[-–—]|to)\s*[$€£¥]?\s*(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?\s*(?P<rest>.*)$")
        .unwrap()
});
static UNIT: Lazy<Regex> = Lazy::new(|| Regex::new(r"^(?:%|°\s*[a-zA-Z]?|[a-zA-Zµ°/²³]+(?:\s+[a-zA-Z]+)?)$").unwrap());

/// Full or month-year dates with a four-digit year.
fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim().trim_end_matches('.');
    let full = ["%Y-%m-%d", "%B %d, %Y", "%B %d %Y", "%d %B %Y", "%b %d, %Y", "%d %b %Y", "%b %d %Y"]
        .into_iter()
        .map(|f| NaiveDate::parse_from_str(s, f));
    let month = ["%d %B %Y", "%d %b %Y"]
        .into_iter()
        .map(|f| NaiveDate::parse_from_str(&format!("1 {s}"), f));
    full.chain(month).flatten().find(|d| d.year() >= 1000)
}

pub fn parse_scalar(text: &str) -> Option<Scalar> {
    let t = text.trim();
    if let Some(d) = parse_date(t) {
        let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date");
        return Some(Scalar {
            value: (d - epoch).num_days() as f64,
            is_date: true,
            unit: String::new(),
        });
    }
    let c = NUMBER.captures(t)?;
    let num = c["num"].replace(',', "").replace('−', "-");
    let value: f64 = num.parse().ok()?;
    let mut rest = c["rest"].trim().to_string();
    if let Some(r) = RANGE_TAIL.captures(&rest) {
        rest = r["rest"].trim().to_string();
    }
    let rest = rest.trim_end_matches('.').trim();
    if !rest.is_empty() && !UNIT.is_match(rest) {
        return None;
    }
    let mut unit = rest.to_lowercase().replace(' ', "");
    if c.name("cur").is_some() {
        unit = format!("{}{unit}", &c["cur"]);
    }
    Some(Scalar {
        value,
        is_date: false,
        unit: unit.trim_end_matches('s').to_string(),
    })
}

/// Blank markers in a stem: underscore runs of at least `min_run` that are
/// not part of an identifier and not inside backticks, plus "(blank)".
pub fn blank_markers(stem: &str, min_run: usize) -> Vec<(usize, usize)> {
    let code: Vec<(usize, usize)> = {
        let ticks: Vec<usize> = stem.match_indices('`').map(|(i, _)| i).collect();
        ticks.chunks(2).filter(|c| c.len() == 2).map(|c| (c[0], c[1])).collect()
    };
    let in_code = |i: usize| code.iter().any(|&(a, b)| a < i && i < b);
    let bytes = stem.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'_' {
            let start = i;
            while i < bytes.len() && bytes[i] == b'_' {
                i += 1;
            }
            let before = stem[..start].chars().next_back().is_some_and(char::is_alphanumeric);
            let after = stem[i..].chars().next().is_some_and(char::is_alphanumeric);
            if i - start >= min_run && !(before && after) && !in_code(start) {
                out.push((start, i));
            }
        } else {
            i += 1;
        }
    }
    let lower = stem.to_lowercase();
    for (pos, m) in lower.match_indices("(blank)") {
        if !in_code(pos) {
            out.push((pos, pos + m.len()));
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kit() -> &'static TextKit {
        TextKit::bundled()
    }

    #[test]
    fn scalars() {
        let v = |s: &str| parse_scalar(s).map(|x| x.value);
        assert_eq!(v("5"), Some(5.0));
        assert_eq!(v("1 %"), Some(1.0));
        assert_eq!(v("$1,200.50"), Some(1200.5));
        assert_eq!(v("10–20"), Some(10.0));
        assert_eq!(v("30 to 40 years"), Some(30.0));
        assert_eq!(v("Paris"), None);
        assert_eq!(v("3 apples and 2 pears"), None);
        assert!(parse_scalar("1914-07-28").unwrap().is_date);
        assert!(v("March 5, 1990").unwrap() < v("June 1990").unwrap());
        assert_eq!(parse_scalar("25 %").unwrap().unit, "%");
    }

    #[test]
    fn component_split() {
        assert_eq!(components("A and B"), ["a", "b"]);
        assert_eq!(components("1, 2 and 3"), ["1", "2", "3"]);
        assert_eq!(components("Both i and ii"), ["i", "ii"]);
        assert_eq!(components("sodium"), ["sodium"]);
    }

    #[test]
    fn blanks() {
        assert_eq!(blank_markers("The ____ is the powerhouse.", 3), [(4, 8)]);
        assert!(blank_markers("What does my_function return?", 3).is_empty());
        assert!(blank_markers("What does `x ___ y` mean?", 3).is_empty());
        assert!(blank_markers("A __ B", 3).is_empty());
        assert_eq!(blank_markers("Fill (blank) here", 3).len(), 1);
    }

    #[test]
    fn heads_and_clauses() {
        let k = kit();
        let t = |s: &str| k.tokenize(s);
        assert_eq!(head_pos(&t("positively charged particles")), Pos::Noun);
        assert_eq!(head_pos(&t("sum the number of protons and neutrons")), Pos::Verb);
        assert_eq!(head_pos(&t("he discovered the charge of electron")), Pos::Verb);
        assert_eq!(head_pos(&t("the process by which plants make food")), Pos::Noun);
        assert!(is_clause(&t("Gases always expand when heated")));
        assert!(!is_clause(&t("negatively charged subatomic particles")));
        assert_eq!(expected_type("What is protons?"), Some(Expected::Noun));
        assert_eq!(expected_type("How many protons does carbon have?"), Some(Expected::Num));
        assert_eq!(expected_type("Photosynthesis:"), None);
    }
}
