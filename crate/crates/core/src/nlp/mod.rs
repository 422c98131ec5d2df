//! Utterance understanding: tokenizer, lexicon, loose chart parser, semantic
//! analysis into frames, and preference-based disambiguation.

mod grammar;
mod lexicon;
mod parser;
mod pcs;
mod recognition;
mod semantics;
mod tokenize;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use grammar::{Action, Constant, Grammar, GrammarRule, Symbol};
pub use lexicon::{LexEntry, Lexeme, Lexicalized, Lexicon, Pos};
pub use parser::{Leaf, ParseResult, ParseTree, Parser};
pub use pcs::{disambiguate, ConstraintKind, PcsContext, PreferenceConstraint, PreferenceConstraints};
pub use recognition::{classify_input, Hypothesis, NBestInput, RecognitionKind, RecognitionOutcome};
pub use semantics::analyze;
pub use tokenize::{is_punctuation, tokenize};

/// Default top-2 score gap below which N-best hypotheses count as close.
pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum NlpError {
    #[error("{file} line {line}: {message}")]
    Syntax {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("grammar: {0}")]
    Grammar(String),
    #[error("{what} names unknown concept `{concept}`")]
    UnknownConcept { what: String, concept: String },
    #[error("N-best scores must lie in [0, 1] and be non-increasing")]
    BadScores,
    #[error("no parse trees to analyze")]
    NoTrees,
    #[error("every parse violates a selectional restriction: {}", .0.join("; "))]
    AllRejected(Vec<String>),
}

/// Content of one frame slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Filler {
    Concept(String),
    Literal(String),
    UnresolvedPronoun,
    UnresolvedEllipsis,
    Unfilled,
}

impl Filler {
    pub fn concept(&self) -> Option<&str> {
        match self {
            Filler::Concept(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_filled(&self) -> bool {
        !matches!(self, Filler::Unfilled)
    }

    pub fn is_unresolved(&self) -> bool {
        matches!(self, Filler::UnresolvedPronoun | Filler::UnresolvedEllipsis)
    }
}

impl fmt::Display for Filler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Filler::Concept(c) => f.write_str(c),
            Filler::Literal(l) => write!(f, "{l:?}"),
            Filler::UnresolvedPronoun => f.write_str("UNRESOLVED-PRONOUN"),
            Filler::UnresolvedEllipsis => f.write_str("UNRESOLVED-ELLIPSIS"),
            Filler::Unfilled => f.write_str("UNFILLED"),
        }
    }
}

/// Frame-and-slot meaning of one utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticFrame {
    pub name: String,
    pub slots: BTreeMap<String, Filler>,
    /// Source utterance id.
    #[serde(default)]
    pub utterance: u32,
}

impl SemanticFrame {
    pub fn new(name: impl Into<String>) -> Self {
        SemanticFrame {
            name: name.into(),
            slots: BTreeMap::new(),
            utterance: 0,
        }
    }

    pub fn with(mut self, slot: &str, filler: Filler) -> Self {
        self.slots.insert(slot.to_string(), filler);
        self
    }

    pub fn slot(&self, name: &str) -> &Filler {
        self.slots.get(name).unwrap_or(&Filler::Unfilled)
    }

    pub fn concept(&self, name: &str) -> Option<&str> {
        self.slot(name).concept()
    }

    /// Order by frame name, then slot fillers; the utterance id is ignored.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        (&self.name, &self.slots).cmp(&(&other.name, &other.slots))
    }
}

impl fmt::Display for SemanticFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{", self.name)?;
        for (i, (k, v)) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpretationCandidate {
    pub frame: SemanticFrame,
    pub tree: ParseTree,
    /// Unknown words skipped on the way to this reading.
    pub skipped: usize,
    pub pcs_score: f64,
}
