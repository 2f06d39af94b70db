//! Question and gold-label data model, with JSONL / CSV ingestion.
//!
//! Questions are line-delimited JSON:
//!
//! ```text
//! {"id": "q1", "domain": "chemistry", "stem": "...", "options": ["...", "..."], "key": 0}
//! ```
//!
//! `"answer": "A".."E"` may stand in for `"key"`. All text is NFC-normalized
//! on the way in. Gold labels are a flat CSV whose header is `question_id`
//! followed by the 19 criterion keys in canonical order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;
#[cfg(test)]
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::criteria::{CriterionId, FlagSet};
use crate::error::{Error, Result};

pub const MIN_OPTIONS: usize = 2;
pub const MAX_OPTIONS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptionEntry {
    pub text: String,
    pub is_correct: bool,
}

/// One multiple-choice question with exactly one keyed answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mcq {
    pub id: String,
    pub domain: String,
    pub stem: String,
    pub options: Vec<OptionEntry>,
    pub key: usize,
    pub metadata: BTreeMap<String, String>,
}

impl Mcq {
    /// Builds a validated question. Text is NFC-normalized.
    pub fn new(
        id: impl Into<String>,
        domain: impl Into<String>,
        stem: impl Into<String>,
        options: Vec<String>,
        key: usize,
    ) -> std::result::Result<Self, String> {
        let options: Vec<String> = options.into_iter().map(|o| nfc(&o)).collect();
        let mcq = Mcq {
            id: nfc(&id.into()),
            domain: nfc(&domain.into()),
            stem: nfc(&stem.into()),
            options: options
                .into_iter()
                .enumerate()
                .map(|(i, text)| OptionEntry {
                    text,
                    is_correct: i == key,
                })
                .collect(),
            key,
            metadata: BTreeMap::new(),
        };
        mcq.validate()?;
        Ok(mcq)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("id is empty".into());
        }
        let n = self.options.len();
        if !(MIN_OPTIONS..=MAX_OPTIONS).contains(&n) {
            return Err(format!(
                "options out of range ({n} options, expected {MIN_OPTIONS}-{MAX_OPTIONS})"
            ));
        }
        if self.key >= n {
            return Err(format!("key out of range (key {} with {n} options)", self.key));
        }
        if self.stem.trim().is_empty() {
            return Err("stem is empty".into());
        }
        if let Some(i) = self.options.iter().position(|o| o.text.trim().is_empty()) {
            return Err(format!("option {i} is empty"));
        }
        if self.options.iter().filter(|o| o.is_correct).count() != 1
            || !self.options[self.key].is_correct
        {
            return Err("exactly one option must be marked correct".into());
        }
        Ok(())
    }

    pub fn correct(&self) -> &str {
        &self.options[self.key].text
    }

    pub fn option_texts(&self) -> impl Iterator<Item = &str> {
        self.options.iter().map(|o| o.text.as_str())
    }

    /// Indices of the incorrect options.
    pub fn distractors(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.options.len()).filter(move |i| *i != self.key)
    }

    /// Reorders options; `order[i]` is the old index placed at position `i`.
    pub fn permuted(&self, order: &[usize]) -> Mcq {
        let mut out = self.clone();
        out.options = order.iter().map(|&i| self.options[i].clone()).collect();
        out.key = order.iter().position(|&i| i == self.key).expect("permutation");
        out
    }
}

/// Human-assigned flags for one question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldLabels {
    pub question_id: String,
    pub flags: FlagSet,
}

impl GoldLabels {
    pub fn flaw_count(&self) -> usize {
        self.flags.count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub questions: Vec<Mcq>,
    /// Gold labels in question order; `None` for lint-only datasets.
    pub gold: Option<Vec<GoldLabels>>,
}

impl Dataset {
    pub fn new(questions: Vec<Mcq>) -> Self {
        Dataset {
            questions,
            gold: None,
        }
    }

    pub fn gold_for(&self, id: &str) -> Option<&GoldLabels> {
        self.gold.as_ref()?.iter().find(|g| g.question_id == id)
    }

    /// Gold labels keyed by question id.
    pub fn gold_index(&self) -> HashMap<&str, &GoldLabels> {
        self.gold
            .iter()
            .flatten()
            .map(|g| (g.question_id.as_str(), g))
            .collect()
    }
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

#[derive(Deserialize)]
struct RawQuestion {
    id: String,
    domain: String,
    stem: String,
    options: Vec<String>,
    #[serde(default)]
    key: Option<i64>,
    #[serde(default)]
    answer: Option<String>,
    #[serde(default)]
    metadata: Option<BTreeMap<String, String>>,
}

#[derive(Serialize)]
struct RawQuestionOut<'a> {
    id: &'a str,
    domain: &'a str,
    stem: &'a str,
    options: Vec<&'a str>,
    key: usize,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    metadata: &'a BTreeMap<String, String>,
}

fn answer_letter(letter: &str) -> Option<usize> {
    let l = letter.trim();
    let mut chars = l.chars();
    let c = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    match c.to_ascii_uppercase() {
        c @ 'A'..='E' => Some(c as usize - 'A' as usize),
        _ => None,
    }
}

pub fn parse_jsonl(path: &Path) -> Result<Dataset> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_jsonl_str(path, &text)
}

/// Parses question JSONL. `origin` is only used in diagnostics.
pub fn parse_jsonl_str(origin: &Path, text: &str) -> Result<Dataset> {
    let mut questions = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawQuestion = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno,
            message: e.to_string(),
        })?;
        let invalid = |id: &str, message: String| Error::Validation {
            path: origin.to_path_buf(),
            line: lineno,
            id: id.to_string(),
            message,
        };
        let id = nfc(&raw.id);
        let key = match (raw.key, raw.answer.as_deref()) {
            (Some(k), answer) => {
                if k < 0 {
                    return Err(invalid(&id, format!("key out of range (key {k})")));
                }
                if let Some(a) = answer {
                    if answer_letter(a) != Some(k as usize) {
                        return Err(invalid(&id, format!("key {k} disagrees with answer `{a}`")));
                    }
                }
                k as usize
            }
            (None, Some(a)) => answer_letter(a)
                .ok_or_else(|| invalid(&id, format!("answer `{a}` is not a letter A-E")))?,
            (None, None) => return Err(invalid(&id, "missing `key` or `answer`".into())),
        };
        let mcq = Mcq {
            id: id.clone(),
            domain: nfc(&raw.domain),
            stem: nfc(&raw.stem),
            options: raw
                .options
                .iter()
                .enumerate()
                .map(|(i, t)| OptionEntry {
                    text: nfc(t),
                    is_correct: i == key,
                })
                .collect(),
            key,
            metadata: raw
                .metadata
                .unwrap_or_default()
                .into_iter()
                .map(|(k, v)| (nfc(&k), nfc(&v)))
                .collect(),
        };
        mcq.validate().map_err(|m| invalid(&id, m))?;
        if let Some(first) = seen.get(&mcq.id) {
            return Err(invalid(&id, format!("duplicate id (first seen on line {first})")));
        }
        seen.insert(mcq.id.clone(), lineno);
        questions.push(mcq);
    }
    Ok(Dataset::new(questions))
}

/// Serializes questions back to JSONL (always with a numeric `key`).
pub fn to_jsonl(dataset: &Dataset) -> String {
    let mut out = String::new();
    for q in &dataset.questions {
        let raw = RawQuestionOut {
            id: &q.id,
            domain: &q.domain,
            stem: &q.stem,
            options: q.option_texts().collect(),
            key: q.key,
            metadata: &q.metadata,
        };
        out.push_str(&serde_json::to_string(&raw).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn gold_header() -> Vec<&'static str> {
    std::iter::once("question_id")
        .chain(CriterionId::ALL.iter().map(|c| c.key()))
        .collect()
}

pub fn parse_gold_csv(path: &Path) -> Result<Vec<GoldLabels>> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_gold_csv_str(path, &text)
}

pub fn parse_gold_csv_str(origin: &Path, text: &str) -> Result<Vec<GoldLabels>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let expected = gold_header();
    if header != expected {
        let missing: Vec<&str> = expected
            .iter()
            .copied()
            .filter(|c| !header.iter().any(|h| h == c))
            .collect();
        let message = if !missing.is_empty() {
            format!("missing column(s): {}", missing.join(", "))
        } else {
            let extra: Vec<&str> = header
                .iter()
                .map(String::as_str)
                .filter(|h| !expected.contains(h))
                .collect();
            if extra.is_empty() {
                "columns out of canonical order".to_string()
            } else {
                format!("unexpected column(s): {}", extra.join(", "))
            }
        };
        return Err(Error::Schema {
            path: origin.to_path_buf(),
            message,
        });
    }

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // header is row 1
        let row = i + 2;
        let value_err = |column: &str, message: String| Error::Value {
            path: origin.to_path_buf(),
            row,
            column: column.to_string(),
            message,
        };
        let question_id = nfc(record.get(0).unwrap_or_default());
        if question_id.is_empty() {
            return Err(value_err("question_id", "empty question id".into()));
        }
        if !seen.insert(question_id.clone()) {
            return Err(value_err("question_id", format!("duplicate id `{question_id}`")));
        }
        let mut flags = FlagSet::default();
        for c in CriterionId::ALL {
            let cell = record.get(c.index() + 1).unwrap_or_default();
            let value = match cell {
                "0" => false,
                "1" => true,
                other => {
                    return Err(value_err(c.key(), format!("expected 0 or 1, found `{other}`")))
                }
            };
            flags.set(c, value);
        }
        out.push(GoldLabels { question_id, flags });
    }
    Ok(out)
}

/// Writes labels in the gold CSV schema (also used for prediction output).
pub fn write_gold_csv(labels: &[GoldLabels]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(gold_header()).expect("in-memory write");
    for g in labels {
        let mut row = vec![g.question_id.clone()];
        row.extend(
            CriterionId::ALL
                .iter()
                .map(|c| if g.flags.get(*c) { "1" } else { "0" }.to_string()),
        );
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8")
}

/// Attaches gold labels to a dataset. Gold rows naming unknown questions are
/// an error; questions without gold rows are allowed.
pub fn join(dataset: Dataset, gold: Vec<GoldLabels>) -> Result<Dataset> {
    let ids: HashSet<&str> = dataset.questions.iter().map(|q| q.id.as_str()).collect();
    let orphans: Vec<String> = gold
        .iter()
        .filter(|g| !ids.contains(g.question_id.as_str()))
        .map(|g| g.question_id.clone())
        .collect();
    if !orphans.is_empty() {
        return Err(Error::Join(orphans));
    }
    let mut by_id: HashMap<String, GoldLabels> =
        gold.into_iter().map(|g| (g.question_id.clone(), g)).collect();
    let ordered = dataset
        .questions
        .iter()
        .filter_map(|q| by_id.remove(&q.id))
        .collect();
    Ok(Dataset {
        questions: dataset.questions,
        gold: Some(ordered),
    })
}

/// Reads a question file and, optionally, a gold file, and joins them.
pub fn load(questions: &Path, gold: Option<&Path>) -> Result<Dataset> {
    let dataset = parse_jsonl(questions)?;
    match gold {
        Some(g) => join(dataset, parse_gold_csv(g)?),
        None => Ok(dataset),
    }
}

#[cfg(test)]
pub(crate) fn origin(name: &str) -> PathBuf {
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PROTON: &str = r#"{"id":"q1","domain":"chemistry","stem":"What is protons?","options":["positively charged particles","sum the number of protons and neutrons","negatively charged subatomic particles","he discovered the charge of electron"],"key":0}"#;

    fn parse(text: &str) -> Result<Dataset> {
        parse_jsonl_str(&origin("test.jsonl"), text)
    }

    #[test]
    fn parses_proton_question_line() {
        let d = parse(PROTON).unwrap();
        let q = &d.questions[0];
        assert_eq!(q.options.len(), 4);
        assert_eq!(q.key, 0);
        assert!(q.options[0].is_correct);
        assert_eq!(q.options.iter().filter(|o| o.is_correct).count(), 1);
    }

    #[test]
    fn rejects_single_option() {
        let err = parse(r#"{"id":"q","domain":"d","stem":"s?","options":["a"],"key":0}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("options out of range"), "{err}");
        assert!(err.contains("test.jsonl:1"), "{err}");
    }

    #[test]
    fn rejects_key_past_end() {
        let err = parse(r#"{"id":"q","domain":"d","stem":"s?","options":["a","b","c","d"],"key":4}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("key out of range"), "{err}");
        assert!(err.contains("`q`"), "{err}");
    }

    #[test]
    fn accepts_answer_letter() {
        let d = parse(r#"{"id":"q","domain":"d","stem":"s?","options":["a","b","c"],"answer":"C"}"#)
            .unwrap();
        assert_eq!(d.questions[0].key, 2);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{PROTON}\n\n{{not json\n");
        match parse(&text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_are_errors() {
        let text = format!("{PROTON}\n{PROTON}\n");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("duplicate id"), "{err}");
    }

    #[test]
    fn blank_stem_or_option_rejected() {
        assert!(parse(r#"{"id":"q","domain":"d","stem":"  ","options":["a","b"],"key":0}"#).is_err());
        assert!(parse(r#"{"id":"q","domain":"d","stem":"s","options":["a"," "],"key":0}"#).is_err());
    }

    #[test]
    fn text_is_nfc_normalized() {
        // "e" + combining acute
        let d = parse("{\"id\":\"q\",\"domain\":\"d\",\"stem\":\"caf\u{0065}\u{0301}?\",\"options\":[\"a\",\"b\"],\"key\":0}").unwrap();
        assert_eq!(d.questions[0].stem, "caf\u{00e9}?");
    }

    fn gold_row(id: &str, ones: &[CriterionId]) -> String {
        let cells: Vec<&str> = CriterionId::ALL
            .iter()
            .map(|c| if ones.contains(c) { "1" } else { "0" })
            .collect();
        format!("{id},{}", cells.join(","))
    }

    fn gold_text(rows: &[String]) -> String {
        format!("{}\n{}\n", gold_header().join(","), rows.join("\n"))
    }

    #[test]
    fn gold_row_with_three_flags() {
        use CriterionId::*;
        let text = gold_text(&[gold_row(
            "q1",
            &[ImplausibleDistractors, LogicalCues, GrammaticalCues],
        )]);
        let gold = parse_gold_csv_str(&origin("g.csv"), &text).unwrap();
        assert_eq!(gold[0].flaw_count(), 3);
        assert!(gold[0].flags.get(LogicalCues));
    }

    #[test]
    fn all_zero_gold_row() {
        let gold = parse_gold_csv_str(&origin("g.csv"), &gold_text(&[gold_row("q1", &[])])).unwrap();
        assert_eq!(gold[0].flaw_count(), 0);
    }

    #[test]
    fn non_binary_cell_is_value_error() {
        let row = gold_row("q1", &[]).replacen(",0", ",2", 1);
        match parse_gold_csv_str(&origin("g.csv"), &gold_text(&[row])).unwrap_err() {
            Error::Value { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "longest_option_correct");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_schema_error() {
        let header: Vec<&str> = gold_header().into_iter().filter(|h| *h != "vague_terms").collect();
        let text = format!("{}\n", header.join(","));
        let err = parse_gold_csv_str(&origin("g.csv"), &text).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
        assert!(err.to_string().contains("vague_terms"));
    }

    fn three_questions() -> Dataset {
        let lines: Vec<String> = (1..=3)
            .map(|i| {
                format!(r#"{{"id":"q{i}","domain":"d","stem":"Stem {i}?","options":["a","b"],"key":0}}"#)
            })
            .collect();
        parse(&lines.join("\n")).unwrap()
    }

    fn labels(id: &str) -> GoldLabels {
        GoldLabels {
            question_id: id.into(),
            flags: FlagSet::default(),
        }
    }

    #[test]
    fn join_matching_gold() {
        let d = join(three_questions(), vec![labels("q3"), labels("q1"), labels("q2")]).unwrap();
        let gold = d.gold.as_ref().unwrap();
        assert_eq!(gold.len(), 3);
        assert_eq!(gold[0].question_id, "q1");
    }

    #[test]
    fn join_reports_orphans() {
        let err = join(three_questions(), vec![labels("qX")]).unwrap_err();
        assert!(err.to_string().contains("qX"));
    }

    #[test]
    fn join_with_empty_gold() {
        let d = join(three_questions(), vec![]).unwrap();
        assert_eq!(d.gold.as_deref(), Some(&[][..]));
    }

    #[test]
    fn permuted_tracks_key() {
        let q = &parse(PROTON).unwrap().questions[0];
        let p = q.permuted(&[3, 2, 1, 0]);
        assert_eq!(p.key, 3);
        assert_eq!(p.correct(), q.correct());
    }

    fn arb_text() -> impl Strategy<Value = String> {
        "[a-zA-Z0-9 ?.,'\u{e9}]{0,20}[a-z]".prop_map(|s| s)
    }

    fn arb_question(i: usize) -> impl Strategy<Value = Mcq> {
        (arb_text(), prop::collection::vec(arb_text(), 2..=5), any::<prop::sample::Index>())
            .prop_map(move |(stem, options, key)| {
                let k = key.index(options.len());
                Mcq::new(format!("q{i}"), "domain", stem, options, k).unwrap()
            })
    }

    proptest! {
        #[test]
        fn jsonl_round_trip(qs in (0..6usize).prop_flat_map(|n| {
            (0..n).map(arb_question).collect::<Vec<_>>()
        })) {
            let d = Dataset::new(qs);
            let back = parse(&to_jsonl(&d)).unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn gold_csv_round_trip(bits in prop::collection::vec(any::<[bool; 19]>(), 0..8)) {
            let labels: Vec<GoldLabels> = bits
                .into_iter()
                .enumerate()
                .map(|(i, b)| GoldLabels { question_id: format!("q{i}"), flags: FlagSet(b) })
                .collect();
            let back = parse_gold_csv_str(&origin("g.csv"), &write_gold_csv(&labels)).unwrap();
            prop_assert_eq!(back, labels);
        }
    }
}
