//! Word lists and the morphological lexicon.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::Pos;
use crate::error::{Error, Result};

pub(crate) const ABSOLUTE_TERMS: &str = include_str!("../../data/absolute_terms.txt");
pub(crate) const VAGUE_TERMS: &str = include_str!("../../data/vague_terms.txt");
pub(crate) const NEGATION_MARKERS: &str = include_str!("../../data/negation_markers.txt");
pub(crate) const STOPWORDS: &str = include_str!("../../data/stopwords.txt");
pub(crate) const NOA_PHRASES: &str = include_str!("../../data/noa_phrases.txt");
pub(crate) const AOTA_PHRASES: &str = include_str!("../../data/aota_phrases.txt");
pub(crate) const BLOOM_VERBS: &str = include_str!("../../data/bloom_verbs.csv");
pub(crate) const LEXICON: &str = include_str!("../../data/lexicon.tsv");
pub(crate) const IRREGULAR: &str = include_str!("../../data/irregular.tsv");
pub(crate) const DICTIONARY: &str = include_str!("../../data/dictionary.txt");

/// The named word lists detectors and metrics consult.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconSet {
    pub absolute_terms: Vec<String>,
    pub vague_terms: Vec<String>,
    pub negation_markers: Vec<String>,
    pub bloom_verbs: BTreeMap<String, u8>,
    pub stopwords: HashSet<String>,
    pub noa_phrases: Vec<String>,
    pub aota_phrases: Vec<String>,
}

fn word_list(name: &str, text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let w = line.trim();
        if w.is_empty() || w.starts_with('#') {
            continue;
        }
        if w != w.to_lowercase() {
            return Err(Error::Config(format!("{name}: entry `{w}` is not lowercase")));
        }
        out.push(w.to_string());
    }
    if out.is_empty() {
        return Err(Error::Config(format!("{name}: list is empty")));
    }
    Ok(out)
}

fn bloom_table(text: &str) -> Result<BTreeMap<String, u8>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let bad = |m: &str| Error::Config(format!("bloom_verbs row {}: {m}", i + 2));
        let verb = rec.get(0).ok_or_else(|| bad("missing verb"))?;
        let level: u8 = rec
            .get(1)
            .and_then(|l| l.parse().ok())
            .ok_or_else(|| bad("level is not an integer"))?;
        if level > 5 {
            return Err(bad("level outside 0-5"));
        }
        if verb.is_empty() || verb != verb.to_lowercase() {
            return Err(bad("verb must be non-empty and lowercase"));
        }
        out.insert(verb.to_string(), level);
    }
    if out.is_empty() {
        return Err(Error::Config("bloom_verbs: list is empty".into()));
    }
    Ok(out)
}

impl LexiconSet {
    pub fn bundled() -> Self {
        Self::from_sources(&Sources::default()).expect("bundled lexicons are valid")
    }

    /// Loads lists from `dir`, falling back to the bundled copy for any
    /// file that is not present there.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str, fallback: &'static str| -> Result<String> {
            let p = dir.join(name);
            if p.exists() {
                fs::read_to_string(&p).map_err(|e| Error::io(format!("reading {}", p.display()), e))
            } else {
                Ok(fallback.to_string())
            }
        };
        let owned = [
            read("absolute_terms.txt", ABSOLUTE_TERMS)?,
            read("vague_terms.txt", VAGUE_TERMS)?,
            read("negation_markers.txt", NEGATION_MARKERS)?,
            read("bloom_verbs.csv", BLOOM_VERBS)?,
            read("stopwords.txt", STOPWORDS)?,
            read("noa_phrases.txt", NOA_PHRASES)?,
            read("aota_phrases.txt", AOTA_PHRASES)?,
        ];
        Self::from_sources(&Sources {
            absolute_terms: &owned[0],
            vague_terms: &owned[1],
            negation_markers: &owned[2],
            bloom_verbs: &owned[3],
            stopwords: &owned[4],
            noa_phrases: &owned[5],
            aota_phrases: &owned[6],
        })
    }

    fn from_sources(s: &Sources<'_>) -> Result<Self> {
        Ok(LexiconSet {
            absolute_terms: word_list("absolute_terms", s.absolute_terms)?,
            vague_terms: word_list("vague_terms", s.vague_terms)?,
            negation_markers: word_list("negation_markers", s.negation_markers)?,
            bloom_verbs: bloom_table(s.bloom_verbs)?,
            stopwords: word_list("stopwords", s.stopwords)?.into_iter().collect(),
            noa_phrases: word_list("noa_phrases", s.noa_phrases)?,
            aota_phrases: word_list("aota_phrases", s.aota_phrases)?,
        })
    }

    pub fn is_stopword(&self, w: &str) -> bool {
        self.stopwords.contains(w)
    }
}

struct Sources<'a> {
    absolute_terms: &'a str,
    vague_terms: &'a str,
    negation_markers: &'a str,
    bloom_verbs: &'a str,
    stopwords: &'a str,
    noa_phrases: &'a str,
    aota_phrases: &'a str,
}

impl Default for Sources<'static> {
    fn default() -> Self {
        Sources {
            absolute_terms: ABSOLUTE_TERMS,
            vague_terms: VAGUE_TERMS,
            negation_markers: NEGATION_MARKERS,
            bloom_verbs: BLOOM_VERBS,
            stopwords: STOPWORDS,
            noa_phrases: NOA_PHRASES,
            aota_phrases: AOTA_PHRASES,
        }
    }
}

/// Form → (POS, lemma) readings, plus irregular forms and the spelling
/// dictionary.
#[derive(Debug, Clone, Default)]
pub struct Morphology {
    readings: HashMap<String, Vec<(Pos, String)>>,
    irregular: HashMap<String, Vec<(Pos, String)>>,
    base_forms: HashSet<(Pos, String)>,
    dictionary: HashSet<String>,
}

fn parse_pos(s: &str) -> Option<Pos> {
    match s.to_ascii_lowercase().as_str() {
        "noun" => Some(Pos::Noun),
        "verb" => Some(Pos::Verb),
        "adj" => Some(Pos::Adj),
        "adv" => Some(Pos::Adv),
        _ => None,
    }
}

impl Morphology {
    pub fn bundled() -> Self {
        Self::parse(LEXICON, IRREGULAR, DICTIONARY)
    }

    pub fn parse(lexicon: &str, irregular: &str, dictionary: &str) -> Self {
        let mut m = Morphology::default();
        for line in lexicon.lines() {
            let Some((form, rest)) = line.split_once('\t') else {
                continue;
            };
            let entries: Vec<(Pos, String)> = rest
                .split(',')
                .filter_map(|e| {
                    let (p, l) = e.split_once(':')?;
                    Some((parse_pos(p)?, l.to_string()))
                })
                .collect();
            for (p, l) in &entries {
                m.base_forms.insert((*p, l.clone()));
            }
            m.readings.insert(form.to_string(), entries);
        }
        for line in irregular.lines() {
            if line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if let [form, lemma, pos] = cols[..] {
                if let Some(p) = parse_pos(pos) {
                    m.irregular
                        .entry(form.to_string())
                        .or_default()
                        .push((p, lemma.to_string()));
                    m.base_forms.insert((p, lemma.to_string()));
                }
            }
        }
        m.dictionary = dictionary
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(str::to_string)
            .collect();
        m.dictionary.extend(m.readings.keys().cloned());
        m.dictionary.extend(m.irregular.keys().cloned());
        m
    }

    /// Open-class POS readings for a lowercase form.
    pub fn pos_set(&self, form: &str) -> Vec<Pos> {
        let mut out: Vec<Pos> = Vec::new();
        for (p, _) in self
            .irregular
            .get(form)
            .into_iter()
            .flatten()
            .chain(self.readings.get(form).into_iter().flatten())
        {
            if !out.contains(p) {
                out.push(*p);
            }
        }
        out
    }

    pub fn is_base(&self, pos: Pos, form: &str) -> bool {
        self.base_forms.contains(&(pos, form.to_string()))
    }

    pub fn irregular_lemma(&self, form: &str, pos: Pos) -> Option<&str> {
        self.irregular
            .get(form)?
            .iter()
            .find(|(p, _)| *p == pos)
            .map(|(_, l)| l.as_str())
    }

    pub fn lexicon_lemma(&self, form: &str, pos: Pos) -> Option<&str> {
        self.readings
            .get(form)?
            .iter()
            .find(|(p, _)| *p == pos)
            .map(|(_, l)| l.as_str())
    }

    pub fn knows(&self, word: &str) -> bool {
        self.dictionary.contains(word)
    }

    pub fn add_words<I: IntoIterator<Item = String>>(&mut self, words: I) {
        self.dictionary.extend(words);
    }

    /// Lemma pairs `(pos, lemma)` that are base forms, for property tests.
    pub fn base_forms(&self) -> impl Iterator<Item = &(Pos, String)> {
        self.base_forms.iter()
    }
}
