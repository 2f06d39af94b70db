//! Lightweight NLP services: tokens, tags, lemmas, word lists, static
//! embeddings and a well-formedness score.
//!
//! Everything here is deterministic and read-only once built; a single
//! [`TextKit`] is shared by all detector workers.

mod embedding;
mod lexicon;
mod tagger;
mod tokenize;
mod wellformed;

use std::fmt;
use std::path::PathBuf;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

pub use embedding::{cosine, EmbeddingTable};
pub use lexicon::{LexiconSet, Morphology};
pub use tokenize::{segment, sentences, words, RawKind, RawToken};
pub use wellformed::{Frame, HeuristicScorer, WellformednessScorer};

use crate::error::Result;

/// Whether a word is pronounced with an initial vowel sound (for a/an).
pub fn vowel_sound(word: &str) -> bool {
    let w = word.to_lowercase();
    const SILENT_H: &[&str] = &["hour", "honest", "honor", "honour", "heir"];
    const YOU_SOUND: &[&str] = &["uni", "use", "usu", "eu", "ewe", "one", "once", "uti", "ura", "uro"];
    if SILENT_H.iter().any(|p| w.starts_with(p)) {
        return true;
    }
    if YOU_SOUND.iter().any(|p| w.starts_with(p)) {
        return false;
    }
    w.starts_with(['a', 'e', 'i', 'o', 'u'])
}

/// Coarse part-of-speech tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Num,
    Pron,
    Det,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Lowercase, never empty.
    pub lemma: String,
    pub pos: Pos,
    /// Byte offsets into the source text.
    pub span: (usize, usize),
}

/// Optional overrides for the bundled resources.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcePaths {
    /// Directory holding any of the word-list files; missing files fall
    /// back to the bundled copies.
    pub lexicon_dir: Option<PathBuf>,
    /// Vector file in `W D` header format.
    pub embeddings: Option<PathBuf>,
}

pub struct TextKit {
    pub lexicons: LexiconSet,
    pub morphology: Morphology,
    pub embeddings: EmbeddingTable,
    scorer: Box<dyn WellformednessScorer>,
}

impl fmt::Debug for TextKit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TextKit")
            .field("embeddings", &self.embeddings.len())
            .finish_non_exhaustive()
    }
}

static BUNDLED: Lazy<TextKit> = Lazy::new(|| {
    TextKit::from_parts(LexiconSet::bundled(), Morphology::bundled(), EmbeddingTable::bundled())
});

impl TextKit {
    /// The shared kit built from bundled data.
    pub fn bundled() -> &'static TextKit {
        &BUNDLED
    }

    pub fn load(paths: &ResourcePaths) -> Result<TextKit> {
        let lexicons = match &paths.lexicon_dir {
            Some(d) => LexiconSet::load_dir(d)?,
            None => LexiconSet::bundled(),
        };
        let embeddings = match &paths.embeddings {
            Some(p) => EmbeddingTable::load(p)?,
            None => EmbeddingTable::bundled(),
        };
        Ok(TextKit::from_parts(lexicons, Morphology::bundled(), embeddings))
    }

    pub fn from_parts(lexicons: LexiconSet, mut morphology: Morphology, embeddings: EmbeddingTable) -> Self {
        morphology.add_words(embeddings.words().map(str::to_string));
        TextKit {
            lexicons,
            morphology,
            embeddings,
            scorer: Box::new(HeuristicScorer::default()),
        }
    }

    /// Replaces the well-formedness scorer.
    pub fn with_scorer(mut self, scorer: Box<dyn WellformednessScorer>) -> Self {
        self.scorer = scorer;
        self
    }

    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        tagger::tokenize(&self.morphology, text)
    }

    pub fn lemmatize(&self, surface: &str, pos: Pos) -> String {
        tagger::lemmatize(&self.morphology, surface, pos)
    }

    fn is_content(&self, t: &Token) -> bool {
        matches!(t.pos, Pos::Noun | Pos::Verb | Pos::Adj | Pos::Adv | Pos::Num)
            && !self.lexicons.is_stopword(&t.lemma)
            && !self.lexicons.is_stopword(&t.surface.to_lowercase())
            && t.surface.chars().any(char::is_alphanumeric)
    }

    /// Tokens carrying content: nouns, verbs, adjectives, adverbs and
    /// numbers that are not stopwords.
    pub fn content_tokens(&self, text: &str) -> Vec<Token> {
        self.tokenize(text)
            .into_iter()
            .filter(|t| self.is_content(t))
            .collect()
    }

    /// Content lemmas in order of appearance (a multiset).
    pub fn content_lemmas(&self, text: &str) -> Vec<String> {
        self.content_tokens(text).into_iter().map(|t| t.lemma).collect()
    }

    /// Cosine of the mean content-lemma vectors; 0 when either side has no
    /// in-vocabulary content word.
    pub fn text_similarity(&self, a: &str, b: &str) -> f64 {
        let la = self.content_lemmas(a);
        let lb = self.content_lemmas(b);
        self.lemma_set_similarity(&la, &lb)
    }

    pub fn lemma_set_similarity(&self, a: &[String], b: &[String]) -> f64 {
        let ma = self.embeddings.mean(a.iter().map(String::as_str));
        let mb = self.embeddings.mean(b.iter().map(String::as_str));
        match (ma, mb) {
            (Some(x), Some(y)) => cosine(&x, &y),
            _ => 0.0,
        }
    }

    pub fn wellformedness(&self, stem: &str) -> f64 {
        self.scorer.score(self, stem).clamp(0.0, 1.0)
    }

    pub fn frame(&self, stem: &str) -> Option<Frame> {
        wellformed::frame_of(&self.tokenize(stem))
    }

    /// Span of a pronoun with no preceding noun in `text`.
    pub fn dangling_pronoun(&self, text: &str) -> Option<(usize, usize)> {
        wellformed::dangling_in(&self.tokenize(text))
    }

    pub fn has_finite_verb(&self, text: &str) -> bool {
        wellformed::has_finite_verb(&self.tokenize(text))
    }
}
