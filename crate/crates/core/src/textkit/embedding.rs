//! Static word vectors in the plain-text `W D` header format.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) const BUNDLED_VECTORS: &str = include_str!("../../data/vectors.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_VECTORS).expect("bundled vectors are valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Config("empty embedding file".into()))?;
        let mut head = header.split_whitespace();
        let parse_usize = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok());
        let (Some(count), Some(dimension)) = (parse_usize(head.next()), parse_usize(head.next()))
        else {
            return Err(Error::Config(format!("bad embedding header `{header}`")));
        };
        if dimension == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut vectors = HashMap::with_capacity(count);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default().to_lowercase();
            let v: Vec<f64> = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("embedding line {}: {e}", i + 1)))?;
            if v.len() != dimension {
                return Err(Error::Config(format!(
                    "embedding line {}: expected {dimension} values, found {}",
                    i + 1,
                    v.len()
                )));
            }
            vectors.insert(word, v);
        }
        if vectors.len() != count {
            log::warn!("embedding header says {count} words, file has {}", vectors.len());
        }
        Ok(EmbeddingTable { dimension, vectors })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        match self.vectors.get(word) {
            Some(v) => Some(v),
            None => self.vectors.get(&word.to_lowercase()).map(Vec::as_slice),
        }
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    /// Cosine between two words, `None` if either is out of vocabulary.
    pub fn word_similarity(&self, a: &str, b: &str) -> Option<f64> {
        Some(cosine(self.get(a)?, self.get(b)?))
    }

    /// Mean vector of the in-vocabulary words, `None` if there are none.
    pub fn mean<'a, I: IntoIterator<Item = &'a str>>(&self, words: I) -> Option<Vec<f64>> {
        let mut sum = vec![0.0; self.dimension];
        let mut n = 0usize;
        for w in words {
            if let Some(v) = self.get(w) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                n += 1;
            }
        }
        if n == 0 {
            return None;
        }
        for s in &mut sum {
            *s /= n as f64;
        }
        Some(sum)
    }
}

/// Cosine similarity clamped to [-1, 1]; 0 when either vector is zero.
/// Bitwise-equal inputs give exactly 1.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    if a == b {
        return 1.0;
    }
    (dot / (na * nb).sqrt()).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_header_and_rows() {
        let t = EmbeddingTable::parse("2 3\nfoo 1 0 0\nBar 0 1 0\n").unwrap();
        assert_eq!(t.dimension(), 3);
        assert_eq!(t.get("BAR"), Some(&[0.0, 1.0, 0.0][..]));
        assert_eq!(t.word_similarity("foo", "bar"), Some(0.0));
        assert_eq!(t.word_similarity("foo", "baz"), None);
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(EmbeddingTable::parse("1 3\nfoo 1 0\n").is_err());
        assert!(EmbeddingTable::parse("nonsense\n").is_err());
    }

    #[test]
    fn bundled_table_loads() {
        let t = EmbeddingTable::bundled();
        assert_eq!(t.dimension(), 100);
        assert!(t.get("proton").is_some());
    }
}
