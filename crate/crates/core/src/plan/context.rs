use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Act, Intention, PlanConfig};
use crate::kb::KnowledgeBase;
use crate::nlp::SemanticFrame;

/// Maker bound by contexts that stand for products outside the knowledge base.
pub const OTHER_MAKER: &str = "other-maker";

pub type Bindings = BTreeMap<String, String>;

/// One candidate user goal with the bindings it commits to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefContext {
    pub id: u32,
    pub goal: Intention,
    /// Slot values of the goal: `product`, `category`, `maker`.
    pub bindings: Bindings,
    /// Frames this context has absorbed.
    pub facts: Vec<SemanticFrame>,
    /// Values taken on without being said.
    pub assumptions: Bindings,
    pub preference: f64,
}

impl BeliefContext {
    /// Stands for a product the system knows nothing about.
    pub fn is_foreign(&self) -> bool {
        self.goal.act == Act::OutOfDomain
    }

    /// Two contexts exclude each other when they bind a slot differently.
    pub fn excludes(&self, other: &BeliefContext) -> bool {
        self.bindings
            .iter()
            .any(|(k, v)| other.bindings.get(k).is_some_and(|w| w != v))
    }
}

/// What one interpreted utterance says about the user's goal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub positive: Bindings,
    /// Values the user rejected as a whole.
    pub denied: Option<Bindings>,
    /// Values carried over from the last committed goal.
    pub assumed: Bindings,
}

impl Evidence {
    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.denied.is_none()
    }

    /// Support and conflict counts of a binding set against this evidence.
    pub fn score(&self, bindings: &Bindings) -> (u32, u32) {
        let (mut support, mut conflict) = (0, 0);
        for (k, v) in self.positive.iter().chain(&self.assumed) {
            match bindings.get(k) {
                Some(w) if w == v => support += 1,
                Some(_) => conflict += 1,
                None => {}
            }
        }
        if let Some(denied) = &self.denied {
            if denied.iter().all(|(k, v)| bindings.get(k) == Some(v)) {
                conflict += 1;
            } else if denied
                .iter()
                .any(|(k, v)| bindings.get(k).is_some_and(|w| w != v))
            {
                support += 1;
            }
        }
        (support, conflict)
    }
}

/// Goal hypotheses the knowledge base can support: one per product, and one
/// per product category made by somebody else.
pub fn seed_hypotheses(kb: &KnowledgeBase) -> Vec<(Act, Bindings)> {
    let mut out = Vec::new();
    for p in kb.products() {
        let b = Bindings::from([
            ("product".into(), p.name.clone()),
            ("category".into(), p.category.clone()),
            ("maker".into(), p.maker.clone()),
        ]);
        out.push((Act::GetInfo, b));
    }
    for cat in kb.product_categories() {
        let b = Bindings::from([
            ("category".into(), cat.to_string()),
            ("maker".into(), OTHER_MAKER.to_string()),
        ]);
        out.push((Act::OutOfDomain, b));
    }
    out
}

pub fn seed_contexts(kb: &KnowledgeBase) -> Vec<BeliefContext> {
    seed_hypotheses(kb)
        .into_iter()
        .enumerate()
        .map(|(i, (act, bindings))| BeliefContext {
            id: i as u32 + 1,
            goal: goal_for(act, &bindings),
            bindings,
            facts: Vec::new(),
            assumptions: Bindings::new(),
            preference: 0.0,
        })
        .collect()
}

fn goal_for(act: Act, bindings: &Bindings) -> Intention {
    Intention::new(act, bindings.get("product").cloned())
}

/// Rescore every context against new evidence, spawn hypotheses the evidence
/// supports that are not live, and drop contexts under the floor.
pub fn update_contexts(
    contexts: &mut Vec<BeliefContext>,
    next_id: &mut u32,
    evidence: &Evidence,
    template: &Intention,
    frame: &SemanticFrame,
    kb: &KnowledgeBase,
    cfg: &PlanConfig,
) {
    if evidence.is_empty() {
        return;
    }
    let max_prior = contexts
        .iter()
        .map(|c| c.preference)
        .fold(0.0_f64, f64::max);
    for ctx in contexts.iter_mut() {
        let (s, c) = evidence.score(&ctx.bindings);
        let recency = if max_prior > 0.0 {
            ctx.preference.max(0.0) / max_prior
        } else {
            0.0
        };
        ctx.preference =
            cfg.w_support * s as f64 - cfg.w_conflict * c as f64 + cfg.w_recency * recency;
        absorb(ctx, evidence, template, frame);
    }
    if !evidence.positive.is_empty() {
        for (act, bindings) in seed_hypotheses(kb) {
            if contexts.iter().any(|c| c.bindings == bindings) {
                continue;
            }
            let (s, c) = evidence.score(&bindings);
            if c > 0 || s == 0 {
                continue;
            }
            let mut ctx = BeliefContext {
                id: *next_id,
                goal: goal_for(act, &bindings),
                bindings,
                facts: Vec::new(),
                assumptions: Bindings::new(),
                preference: cfg.w_support * s as f64,
            };
            *next_id += 1;
            absorb(&mut ctx, evidence, template, frame);
            contexts.push(ctx);
        }
    }
    contexts.retain(|c| c.preference >= cfg.floor);
}

fn absorb(ctx: &mut BeliefContext, evidence: &Evidence, template: &Intention, frame: &SemanticFrame) {
    for (k, v) in &evidence.assumed {
        if ctx.bindings.get(k) == Some(v) {
            ctx.assumptions.insert(k.clone(), v.clone());
        }
    }
    ctx.facts.push(frame.clone());
    if !ctx.is_foreign() {
        let object = ctx.goal.object.clone();
        ctx.goal = Intention {
            object,
            ..template.clone()
        };
    }
}

/// Live contexts in commit order: preference, in-domain before foreign, age.
pub fn ranked(contexts: &[BeliefContext]) -> Vec<&BeliefContext> {
    let mut out: Vec<&BeliefContext> = contexts.iter().collect();
    out.sort_by(|a, b| {
        b.preference
            .total_cmp(&a.preference)
            .then_with(|| a.is_foreign().cmp(&b.is_foreign()))
            .then_with(|| a.id.cmp(&b.id))
    });
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Commit<'a> {
    Committed(&'a BeliefContext),
    /// The best context and its exclusive competitors within epsilon.
    Critical(&'a BeliefContext, Vec<&'a BeliefContext>),
    NoContext,
}

pub fn commit(contexts: &[BeliefContext], epsilon: f64) -> Commit<'_> {
    let order = ranked(contexts);
    let Some(&top) = order.first() else {
        return Commit::NoContext;
    };
    let rivals: Vec<&BeliefContext> = order[1..]
        .iter()
        .copied()
        .filter(|c| top.excludes(c) && top.preference - c.preference < epsilon)
        .collect();
    if rivals.is_empty() {
        Commit::Committed(top)
    } else {
        Commit::Critical(top, rivals)
    }
}

/// Bindings of `top` worth asking about: those the user mentioned and those a
/// rival disagrees on.
pub fn clarification_proposal(top: &BeliefContext, rivals: &[&BeliefContext], evidence: &Evidence) -> Bindings {
    top.bindings
        .iter()
        .filter(|(k, v)| {
            evidence.positive.contains_key(*k)
                || rivals
                    .iter()
                    .any(|r| r.bindings.get(*k).is_some_and(|w| w != *v))
        })
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}
