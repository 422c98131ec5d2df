//! Plan recognition: belief contexts over the user's goal, topic tracking and
//! reference resolution.

mod context;
mod topic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use context::{
    clarification_proposal, commit, ranked, seed_contexts, seed_hypotheses, update_contexts, BeliefContext,
    Bindings, Commit, Evidence, OTHER_MAKER,
};
pub use topic::{note_topic, resolve_references, TopicEntry, TopicEvent, TopicState, CLOSING_TOPIC};

use crate::kb::KnowledgeBase;
use crate::nlp::{Filler, PcsContext, SemanticFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Act {
    GetInfo,
    QueryAttribute,
    Confirm,
    Deny,
    Greet,
    Thank,
    OutOfDomain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intention {
    pub act: Act,
    pub object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    /// Adjective or software the question is about.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    /// The user stated the value instead of asking about it.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub claim: bool,
}

impl Intention {
    pub fn new(act: Act, object: Option<String>) -> Self {
        Intention {
            act,
            object,
            attribute: None,
            value: None,
            claim: false,
        }
    }

    pub fn query(object: Option<String>, attribute: impl Into<String>, value: Option<String>) -> Self {
        Intention {
            attribute: Some(attribute.into()),
            value,
            ..Intention::new(Act::QueryAttribute, object)
        }
    }

    pub fn is_valid(&self) -> bool {
        self.act != Act::QueryAttribute || self.attribute.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub w_support: f64,
    pub w_conflict: f64,
    pub w_recency: f64,
    pub floor: f64,
    pub epsilon: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            w_support: 1.0,
            w_conflict: 1.0,
            w_recency: 0.5,
            floor: 0.0,
            epsilon: 0.1,
        }
    }
}

/// A question put to the user, waiting for yes or no.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clarification {
    pub proposal: Bindings,
    /// What the user will be taken to want once the proposal is settled.
    pub pending: Intention,
}

/// Everything the recognizer remembers between turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueState {
    pub contexts: Vec<BeliefContext>,
    pub next_id: u32,
    pub topic: TopicState,
    pub pending: Option<Clarification>,
    /// Bindings of the last in-domain goal committed to.
    pub last_committed: Option<Bindings>,
}

impl DialogueState {
    pub fn new(kb: &KnowledgeBase) -> Self {
        let contexts = seed_contexts(kb);
        DialogueState {
            next_id: contexts.len() as u32 + 1,
            contexts,
            topic: TopicState::default(),
            pending: None,
            last_committed: None,
        }
    }

    pub fn pcs_context(&self) -> PcsContext<'_> {
        let top = self.topic.current();
        PcsContext {
            topic: top.map(|t| t.topic.as_str()),
            entity: top.and_then(|t| t.entity.as_deref()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("dialogue state serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    /// Greeting or thanks; no goal involved.
    Social(Intention, Option<TopicEvent>),
    Committed {
        intention: Intention,
        topic: Option<TopicEvent>,
    },
    Clarify(Clarification),
    /// No context survives: the user wants something the system does not have.
    NoContext,
    /// The utterance says nothing about any goal.
    NoEvidence,
}

/// Interpret one disambiguated frame against the dialogue so far.
pub fn interpret(
    state: &mut DialogueState,
    frame: &SemanticFrame,
    kb: &KnowledgeBase,
    cfg: &PlanConfig,
) -> PlanOutcome {
    match frame.name.as_str() {
        "greet" => return PlanOutcome::Social(Intention::new(Act::Greet, None), None),
        "thank" => {
            let thanks = Intention::new(Act::Thank, None);
            let event = note_topic(&mut state.topic, &thanks, kb).map(|(_, e)| e);
            state.pending = None;
            return PlanOutcome::Social(thanks, event);
        }
        _ => {}
    }
    let frame = resolve_references(frame, &state.topic, kb);
    let Some((evidence, template)) = evidence_for(&frame, state, kb) else {
        return PlanOutcome::NoEvidence;
    };
    if evidence.is_empty() {
        return PlanOutcome::NoEvidence;
    }
    update_contexts(
        &mut state.contexts,
        &mut state.next_id,
        &evidence,
        &template,
        &frame,
        kb,
        cfg,
    );
    let (intention, bindings, foreign) = match commit(&state.contexts, cfg.epsilon) {
        Commit::NoContext => {
            state.pending = None;
            return PlanOutcome::NoContext;
        }
        Commit::Critical(top, rivals) => {
            let clarification = Clarification {
                proposal: clarification_proposal(top, &rivals, &evidence),
                pending: template,
            };
            state.pending = Some(clarification.clone());
            return PlanOutcome::Clarify(clarification);
        }
        Commit::Committed(top) => (top.goal.clone(), top.bindings.clone(), top.is_foreign()),
    };
    state.pending = None;
    if foreign {
        return PlanOutcome::Committed { intention, topic: None };
    }
    state.last_committed = Some(bindings);
    let topic = note_topic(&mut state.topic, &intention, kb).map(|(_, e)| e);
    PlanOutcome::Committed { intention, topic }
}

/// Bindings the frame supplies and the intention it expresses. `None` when
/// the frame cannot be read as a goal at all.
fn evidence_for(frame: &SemanticFrame, state: &DialogueState, kb: &KnowledgeBase) -> Option<(Evidence, Intention)> {
    if frame.name == "answer" {
        let pending = state.pending.as_ref()?;
        let mut ev = Evidence::default();
        match frame.concept("polarity")? {
            "yes" => ev.positive = pending.proposal.clone(),
            _ => ev.denied = Some(pending.proposal.clone()),
        }
        return Some((ev, pending.pending.clone()));
    }
    let object = frame.concept("object").filter(|o| kb.product(o).is_some());
    let adjective = frame.concept("adjective");
    let template = match frame.name.as_str() {
        "request-info" => Intention::new(Act::GetInfo, object.map(str::to_string)),
        "query-attribute" | "assert" => {
            let attribute = match frame.concept("attribute") {
                Some(a) => a.to_string(),
                None => kb.scale(adjective?)?.attribute.clone(),
            };
            let mut q = Intention::query(object.map(str::to_string), attribute, adjective.map(str::to_string));
            q.claim = frame.name == "assert";
            q
        }
        "query-capability" => {
            let value = frame
                .concept("software")
                .or_else(|| frame.concept("companion").filter(|c| kb.class_of(c) == Some("software")));
            Intention::query(object.map(str::to_string), "software", value.map(str::to_string))
        }
        _ => return None,
    };

    let mut ev = Evidence::default();
    for slot in ["category", "maker"] {
        if let Some(c) = frame.concept(slot) {
            ev.positive.insert(slot.into(), c.into());
        }
    }
    if let Some(p) = object.and_then(|o| kb.product(o)) {
        ev.positive.insert("product".into(), p.name.clone());
        ev.positive.entry("category".into()).or_insert_with(|| p.category.clone());
        ev.positive.entry("maker".into()).or_insert_with(|| p.maker.clone());
    }
    if !ev.positive.is_empty() && !ev.positive.contains_key("maker") {
        if let Some(maker) = state.last_committed.as_ref().and_then(|b| b.get("maker")) {
            ev.assumed.insert("maker".into(), maker.clone());
        }
    }
    Some((ev, template))
}

/// "Do you want to know about a Sony personal computer?"
pub fn clarification_text(c: &Clarification, kb: &KnowledgeBase) -> String {
    let mut words: Vec<&str> = Vec::new();
    if let Some(m) = c.proposal.get("maker") {
        words.push(kb.label(m));
    }
    if let Some(p) = c.proposal.get("product") {
        words.push(kb.label(p));
    } else if let Some(cat) = c.proposal.get("category") {
        words.push(kb.label(cat));
    }
    format!("Do you want to know about a {}?", words.join(" "))
}

/// Slot values of a frame after resolution, for logging.
pub fn frame_summary(frame: &SemanticFrame) -> BTreeMap<String, String> {
    frame
        .slots
        .iter()
        .filter(|(_, f)| !matches!(f, Filler::Unfilled))
        .map(|(k, f)| (k.clone(), f.to_string()))
        .collect()
}
