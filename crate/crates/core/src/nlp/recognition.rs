use serde::{Deserialize, Serialize};

use super::parser::Parser;
use super::tokenize::tokenize;
use super::NlpError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub text: String,
    pub score: f64,
}

/// Simulated recognizer output, best first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Hypothesis>", into = "Vec<Hypothesis>")]
pub struct NBestInput {
    hypotheses: Vec<Hypothesis>,
}

impl NBestInput {
    pub fn new(hypotheses: Vec<Hypothesis>) -> Result<Self, NlpError> {
        let in_range = hypotheses.iter().all(|h| (0.0..=1.0).contains(&h.score));
        let ordered = hypotheses.windows(2).all(|w| w[0].score >= w[1].score);
        if in_range && ordered {
            Ok(NBestInput { hypotheses })
        } else {
            Err(NlpError::BadScores)
        }
    }

    /// A plain typed utterance: one hypothesis with full confidence.
    pub fn single(text: impl Into<String>) -> Self {
        NBestInput {
            hypotheses: vec![Hypothesis {
                text: text.into(),
                score: 1.0,
            }],
        }
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

impl TryFrom<Vec<Hypothesis>> for NBestInput {
    type Error = NlpError;
    fn try_from(hypotheses: Vec<Hypothesis>) -> Result<Self, NlpError> {
        NBestInput::new(hypotheses)
    }
}

impl From<NBestInput> for Vec<Hypothesis> {
    fn from(n: NBestInput) -> Self {
        n.hypotheses
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RecognitionKind {
    Failure,
    CloseScores,
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionOutcome {
    pub kind: RecognitionKind,
    /// Best parseable hypothesis.
    pub best: Option<String>,
    /// Parseable hypotheses within `delta` of the best, best first.
    pub contenders: Vec<String>,
}

/// Decide whether recognition failed, produced close competitors, or gave one
/// clear reading. Only hypotheses the grammar can parse take part.
pub fn classify_input(nbest: &NBestInput, delta: f64, parser: &Parser<'_>) -> RecognitionOutcome {
    debug_assert!(delta > 0.0, "delta must be positive");
    let parseable: Vec<&Hypothesis> = nbest
        .hypotheses
        .iter()
        .filter(|h| !parser.parse(&tokenize(&h.text)).trees.is_empty())
        .collect();
    let Some(best) = parseable.first() else {
        return RecognitionOutcome {
            kind: RecognitionKind::Failure,
            best: None,
            contenders: Vec::new(),
        };
    };
    let contenders: Vec<String> = parseable
        .iter()
        .take_while(|h| best.score - h.score < delta)
        .map(|h| h.text.clone())
        .collect();
    let kind = if contenders.len() >= 2 {
        RecognitionKind::CloseScores
    } else {
        RecognitionKind::Single
    };
    RecognitionOutcome {
        kind,
        best: Some(best.text.clone()),
        contenders,
    }
}
