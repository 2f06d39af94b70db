//! Byte-span tokenizer.
//!
//! Words are runs of alphanumerics joined by internal apostrophes, hyphens
//! or underscores; numbers may carry internal `.`/`,` digit separators.
//! Every other non-whitespace character becomes its own token, except that
//! runs of underscores stay together (fill-in blanks).

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawKind {
    Word,
    Number,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawToken {
    pub kind: RawKind,
    pub start: usize,
    pub end: usize,
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-' | '_')
}

pub fn segment(text: &str) -> Vec<RawToken> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_alphanumeric() {
            let mut j = i + 1;
            let mut all_digits = c.is_ascii_digit();
            while j < chars.len() {
                let ch = chars[j].1;
                if ch.is_alphanumeric() {
                    all_digits &= ch.is_ascii_digit();
                    j += 1;
                    continue;
                }
                let next = chars.get(j + 1).map(|&(_, n)| n);
                let prev = chars[j - 1].1;
                let joins = match next {
                    Some(n) if is_joiner(ch) => n.is_alphanumeric(),
                    Some(n) if matches!(ch, '.' | ',') => prev.is_ascii_digit() && n.is_ascii_digit(),
                    _ => false,
                };
                if !joins {
                    break;
                }
                if !matches!(ch, '.' | ',') {
                    all_digits = false;
                }
                j += 1;
            }
            out.push(RawToken {
                kind: if all_digits { RawKind::Number } else { RawKind::Word },
                start,
                end: end_of(j),
            });
            i = j;
            continue;
        }
        let mut j = i + 1;
        if c == '_' {
            while j < chars.len() && chars[j].1 == '_' {
                j += 1;
            }
        }
        out.push(RawToken {
            kind: RawKind::Punct,
            start,
            end: end_of(j),
        });
        i = j;
    }
    out
}

/// Lowercased word tokens with punctuation dropped.
pub fn words(text: &str) -> Vec<String> {
    segment(text)
        .into_iter()
        .filter(|t| t.kind != RawKind::Punct)
        .map(|t| text[t.start..t.end].to_lowercase())
        .collect()
}

/// Byte ranges of sentences. A sentence ends at `.`, `!` or `?` followed by
/// whitespace and then an uppercase letter, digit or quote, or at end of text.
pub fn sentences(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (k, &(b, c)) in chars.iter().enumerate() {
        if start.is_none() && !c.is_whitespace() {
            start = Some(b);
        }
        if matches!(c, '.' | '!' | '?') {
            let mut m = k + 1;
            while m < chars.len() && matches!(chars[m].1, '.' | '!' | '?' | '"' | '\'' | ')') {
                m += 1;
            }
            let boundary = match chars.get(m) {
                None => true,
                Some(&(_, w)) if w.is_whitespace() => {
                    let mut n = m;
                    while n < chars.len() && chars[n].1.is_whitespace() {
                        n += 1;
                    }
                    chars.get(n).is_none_or(|&(_, f)| {
                        f.is_uppercase() || f.is_ascii_digit() || matches!(f, '"' | '\u{201c}' | '(')
                    })
                }
                _ => false,
            };
            if boundary {
                if let Some(s) = start.take() {
                    let e = chars.get(m).map_or(text.len(), |&(b, _)| b);
                    out.push((s, e));
                }
            }
        }
    }
    if let Some(s) = start {
        let e = text.trim_end().len();
        if e > s {
            out.push((s, e));
        }
    }
    out
}
