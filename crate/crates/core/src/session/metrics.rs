use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::display::{FacialDisplay, Situation};
use crate::plan::Intention;

pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_SMOOTH_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub text: String,
    pub situations: Vec<Situation>,
    pub displays: Vec<FacialDisplay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TurnRecord {
    pub at_s: f64,
    pub user: String,
    pub outcome: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intention: Option<Intention>,
    pub segments: Vec<SegmentRecord>,
    /// (product, attribute) this turn answered, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<(String, String)>,
}

/// One line of a session log file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "camelCase")]
pub enum LogRecord {
    Turn(TurnRecord),
    /// The face went neutral after the user fell silent.
    #[serde(rename_all = "camelCase")]
    Idle { at_s: f64 },
    #[serde(rename_all = "camelCase")]
    End { elapsed_s: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionLog {
    pub turns: Vec<TurnRecord>,
    /// Times the face went neutral for lack of input.
    pub idle_at: Vec<f64>,
    pub elapsed_s: f64,
}

#[derive(Debug, thiserror::Error)]
#[error("log line {line}: {source}")]
pub struct LogError {
    pub line: usize,
    pub source: serde_json::Error,
}

impl SessionLog {
    pub fn records(&self) -> Vec<LogRecord> {
        let mut out: Vec<LogRecord> = self.turns.iter().cloned().map(LogRecord::Turn).collect();
        out.extend(self.idle_at.iter().map(|&at_s| LogRecord::Idle { at_s }));
        out.sort_by(|a, b| at(a).total_cmp(&at(b)));
        out.push(LogRecord::End {
            elapsed_s: self.elapsed_s,
        });
        out
    }

    pub fn push(&mut self, record: LogRecord) {
        match record {
            LogRecord::Turn(t) => {
                self.elapsed_s = self.elapsed_s.max(t.at_s);
                self.turns.push(t);
            }
            LogRecord::Idle { at_s } => {
                self.idle_at.push(at_s);
                self.elapsed_s = self.elapsed_s.max(at_s);
            }
            LogRecord::End { elapsed_s } => self.elapsed_s = self.elapsed_s.max(elapsed_s),
        }
    }

    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        let mut log = SessionLog::default();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: LogRecord = serde_json::from_str(line).map_err(|source| LogError { line: n + 1, source })?;
            log.push(rec);
        }
        Ok(log)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in self.records() {
            out.push_str(&serde_json::to_string(&r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// Activations per display name.
    pub fn histogram(&self) -> BTreeMap<String, u64> {
        let mut h = BTreeMap::new();
        for d in self.turns.iter().flat_map(|t| &t.segments).flat_map(|s| &s.displays) {
            *h.entry(d.name()).or_insert(0) += 1;
        }
        if !self.idle_at.is_empty() {
            *h.entry(FacialDisplay::Neutral.name()).or_insert(0) += self.idle_at.len() as u64;
        }
        h
    }

    /// Distinct (product, attribute) pairs answered.
    pub fn topics_visited(&self) -> BTreeSet<(String, String)> {
        self.turns.iter().filter_map(|t| t.topic.clone()).collect()
    }
}

fn at(r: &LogRecord) -> f64 {
    match r {
        LogRecord::Turn(t) => t.at_s,
        LogRecord::Idle { at_s } => *at_s,
        LogRecord::End { elapsed_s } => *elapsed_s,
    }
}

/// Topics covered, less `lambda` per minute spent.
pub fn score_session(log: &SessionLog, lambda: f64) -> f64 {
    log.topics_visited().len() as f64 - lambda * log.elapsed_s / 60.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Classification {
    Smooth,
    Dull,
}

/// Smooth when the score clears `threshold` and the engaged displays outnumber
/// the blank and puzzled ones.
pub fn classify(histogram: &BTreeMap<String, u64>, score: f64, threshold: f64) -> Classification {
    let count = |d: FacialDisplay| histogram.get(&d.name()).copied().unwrap_or(0);
    use FacialDisplay::*;
    let engaged = count(ModConfident) + count(BOSStory) + count(Attend);
    let flat = count(Neutral) + count(NotConfident);
    if score >= threshold && engaged > flat {
        Classification::Smooth
    } else {
        Classification::Dull
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(topics: usize, minutes: f64) -> SessionLog {
        SessionLog {
            turns: (0..topics)
                .map(|i| TurnRecord {
                    at_s: 0.0,
                    user: String::new(),
                    outcome: "committed".into(),
                    intention: None,
                    segments: Vec::new(),
                    topic: Some(("news".into(), format!("a{i}"))),
                })
                .collect(),
            idle_at: Vec::new(),
            elapsed_s: minutes * 60.0,
        }
    }

    fn hist(pairs: &[(FacialDisplay, u64)]) -> BTreeMap<String, u64> {
        pairs.iter().map(|(d, n)| (d.name(), *n)).collect()
    }

    #[test]
    fn score_examples() {
        assert_eq!(score_session(&log(0, 0.0), 0.5), 0.0);
        assert_eq!(score_session(&log(4, 10.0), 0.5), -1.0);
        assert_eq!(score_session(&log(4, 2.0), 0.5), 3.0);
        assert!(score_session(&log(5, 3.0), 0.5) > score_session(&log(4, 3.0), 0.5));
    }

    #[test]
    fn classify_examples() {
        use FacialDisplay::*;
        let dull = hist(&[(Neutral, 9), (NotConfident, 5), (BOSStory, 2)]);
        assert_eq!(classify(&dull, -2.0, 1.0), Classification::Dull);
        let smooth = hist(&[(ModConfident, 3), (BOSStory, 8), (Attend, 2), (Neutral, 1)]);
        assert_eq!(classify(&smooth, 3.0, 1.0), Classification::Smooth);
        let tie = hist(&[(BOSStory, 2), (Neutral, 2)]);
        assert_eq!(classify(&tie, 3.0, 1.0), Classification::Dull);
        assert_eq!(classify(&smooth, 0.5, 1.0), Classification::Dull);
    }

    #[test]
    fn jsonl_round_trip() {
        let mut l = log(2, 1.0);
        l.idle_at.push(30.0);
        let back = SessionLog::from_jsonl(&l.to_jsonl()).unwrap();
        assert_eq!(back.histogram(), l.histogram());
        assert_eq!(back.topics_visited(), l.topics_visited());
        assert_eq!(back.elapsed_s, 60.0);
        assert!(SessionLog::from_jsonl("{}\n").is_err());
    }
}
