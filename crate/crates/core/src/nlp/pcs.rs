use std::cmp::Ordering;

use super::{Filler, InterpretationCandidate, NlpError};

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    Filled(String),
    Empty(String),
    Topic,
    Skips,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceConstraint {
    pub name: String,
    pub kind: ConstraintKind,
    pub weight: f64,
    pub penalty: f64,
}

/// What the constraints may look at besides the candidate itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct PcsContext<'a> {
    /// Current topic concept, e.g. a product category.
    pub topic: Option<&'a str>,
    /// Salient entity under the topic.
    pub entity: Option<&'a str>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreferenceConstraints(pub Vec<PreferenceConstraint>);

impl PreferenceConstraints {
    pub fn parse(text: &str) -> Result<Self, NlpError> {
        let mut out = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| NlpError::Syntax {
                file: "constraints",
                line: n + 1,
                message: msg.to_string(),
            };
            let cols: Vec<&str> = line.split('|').map(str::trim).collect();
            let [name, kind, arg, weight, penalty] = cols[..] else {
                return Err(bad("expected `name | kind | argument | weight | penalty`"));
            };
            let kind = match (kind, arg) {
                ("filled", slot) if slot != "-" => ConstraintKind::Filled(slot.into()),
                ("empty", slot) if slot != "-" => ConstraintKind::Empty(slot.into()),
                ("topic", _) => ConstraintKind::Topic,
                ("skips", _) => ConstraintKind::Skips,
                _ => return Err(bad("unknown constraint kind")),
            };
            let weight: f64 = weight.parse().map_err(|_| bad("bad weight"))?;
            let penalty: f64 = penalty.parse().map_err(|_| bad("bad penalty"))?;
            if weight < 0.0 || penalty < 0.0 {
                return Err(bad("weights and penalties are non-negative"));
            }
            out.push(PreferenceConstraint {
                name: name.to_string(),
                kind,
                weight,
                penalty,
            });
        }
        Ok(PreferenceConstraints(out))
    }

    /// Sum of weights of satisfied constraints minus penalties of violated ones.
    pub fn score(&self, candidate: &InterpretationCandidate, ctx: PcsContext<'_>) -> f64 {
        self.0
            .iter()
            .map(|c| match verdict(c, candidate, ctx) {
                Verdict::Satisfied => c.weight,
                Verdict::Violated(times) => -c.penalty * times as f64,
                Verdict::NotApplicable => 0.0,
            })
            .sum()
    }
}

enum Verdict {
    Satisfied,
    Violated(usize),
    NotApplicable,
}

fn verdict(c: &PreferenceConstraint, cand: &InterpretationCandidate, ctx: PcsContext<'_>) -> Verdict {
    let frame = &cand.frame;
    match &c.kind {
        ConstraintKind::Filled(slot) | ConstraintKind::Empty(slot) => {
            let Some(filler) = frame.slots.get(slot) else {
                return Verdict::NotApplicable;
            };
            let want_filled = matches!(c.kind, ConstraintKind::Filled(_));
            if filler.is_filled() == want_filled {
                Verdict::Satisfied
            } else {
                Verdict::Violated(1)
            }
        }
        ConstraintKind::Topic => {
            if ctx.topic.is_none() && ctx.entity.is_none() {
                return Verdict::NotApplicable;
            }
            let mentions = frame.slots.values().any(|f| match f {
                Filler::Concept(x) => Some(x.as_str()) == ctx.topic || Some(x.as_str()) == ctx.entity,
                _ => false,
            });
            if mentions {
                Verdict::Satisfied
            } else {
                Verdict::Violated(1)
            }
        }
        ConstraintKind::Skips => match cand.skipped {
            0 => Verdict::NotApplicable,
            n => Verdict::Violated(n),
        },
    }
}

/// Score every candidate and return the best one. Ties go to the canonically
/// smallest frame (then tree), so the answer does not depend on input order.
pub fn disambiguate(
    mut candidates: Vec<InterpretationCandidate>,
    constraints: &PreferenceConstraints,
    ctx: PcsContext<'_>,
) -> Option<InterpretationCandidate> {
    for c in &mut candidates {
        c.pcs_score = constraints.score(c, ctx);
    }
    candidates.into_iter().reduce(|best, c| {
        let order = c
            .pcs_score
            .total_cmp(&best.pcs_score)
            .then_with(|| best.frame.canonical_cmp(&c.frame))
            .then_with(|| best.tree.to_string().cmp(&c.tree.to_string()))
            .then_with(|| best.skipped.cmp(&c.skipped));
        if order == Ordering::Greater {
            c
        } else {
            best
        }
    })
}
