use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tokenize::is_punctuation;
use super::NlpError;
use crate::kb::KnowledgeBase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Particle,
}

impl FromStr for Pos {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "noun" => Ok(Pos::Noun),
            "verb" => Ok(Pos::Verb),
            "adjective" => Ok(Pos::Adjective),
            "particle" => Ok(Pos::Particle),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adjective => "adjective",
            Pos::Particle => "particle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LexEntry {
    pub surface: String,
    pub pos: Pos,
    pub concept: String,
}

/// One lexical item found in the input: a (possibly multi-word) surface with
/// every entry it could stand for.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexeme {
    pub surface: String,
    pub entries: Vec<LexEntry>,
    /// Token range in the original token list.
    pub tokens: (usize, usize),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicalized {
    pub items: Vec<Lexeme>,
    /// Unknown word tokens that were dropped.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexEntry>,
    by_surface: HashMap<String, Vec<usize>>,
    max_words: usize,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self, NlpError> {
        let mut entries = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| NlpError::Syntax {
                file: "lexicon",
                line: n + 1,
                message: msg.to_string(),
            };
            let cols: Vec<&str> = line.split('|').map(str::trim).collect();
            let [surface, pos, concept] = cols[..] else {
                return Err(bad("expected `surface | pos | concept`"));
            };
            if surface.is_empty() || concept.is_empty() {
                return Err(bad("empty surface or concept"));
            }
            let pos = pos.parse().map_err(|_| bad("unknown part of speech"))?;
            let surface = surface.split_whitespace().collect::<Vec<_>>().join(" ");
            entries.push(LexEntry {
                surface: surface.to_lowercase(),
                pos,
                concept: concept.to_string(),
            });
        }
        let mut by_surface: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_surface.entry(e.surface.clone()).or_default().push(i);
        }
        let max_words = entries
            .iter()
            .map(|e| e.surface.split(' ').count())
            .max()
            .unwrap_or(1);
        Ok(Lexicon {
            entries,
            by_surface,
            max_words,
        })
    }

    /// Every entry must name a concept the knowledge base knows.
    pub fn check_against(&self, kb: &KnowledgeBase) -> Result<(), NlpError> {
        match self.entries.iter().find(|e| kb.concept(&e.concept).is_none()) {
            Some(e) => Err(NlpError::UnknownConcept {
                what: format!("lexicon entry `{}`", e.surface),
                concept: e.concept.clone(),
            }),
            None => Ok(()),
        }
    }

    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn lookup(&self, surface: &str) -> Vec<&LexEntry> {
        self.by_surface
            .get(surface)
            .map(|ix| ix.iter().map(|&i| &self.entries[i]).collect())
            .unwrap_or_default()
    }

    pub fn count(&self, pos: Pos) -> usize {
        self.entries.iter().filter(|e| e.pos == pos).count()
    }

    /// Group tokens into lexemes, longest multi-word match first. Punctuation
    /// is dropped silently, unknown words are dropped and reported.
    pub fn lexicalize(&self, tokens: &[String]) -> Lexicalized {
        let mut out = Lexicalized::default();
        let mut i = 0;
        while i < tokens.len() {
            if is_punctuation(&tokens[i]) {
                i += 1;
                continue;
            }
            let mut matched = false;
            for len in (1..=self.max_words).rev() {
                let end = i + len;
                if end > tokens.len() || tokens[i..end].iter().any(|t| is_punctuation(t)) {
                    continue;
                }
                let surface = tokens[i..end].join(" ");
                if let Some(ix) = self.by_surface.get(&surface) {
                    out.items.push(Lexeme {
                        surface,
                        entries: ix.iter().map(|&k| self.entries[k].clone()).collect(),
                        tokens: (i, end),
                    });
                    i = end;
                    matched = true;
                    break;
                }
            }
            if !matched {
                out.skipped.push(tokens[i].clone());
                i += 1;
            }
        }
        out
    }
}
