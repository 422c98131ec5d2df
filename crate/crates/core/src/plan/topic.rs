use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Act, Intention};
use crate::kb::KnowledgeBase;
use crate::nlp::{Filler, SemanticFrame};

/// Topic pushed when the user closes the conversation.
pub const CLOSING_TOPIC: &str = "closing";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicEntry {
    pub topic: String,
    pub entity: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TopicEvent {
    /// First topic of the dialogue.
    Introduced,
    Shifted,
    Continued,
    /// The user closed the conversation; not a shift between subjects.
    Closed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopicState {
    /// Top of stack is the current topic.
    pub stack: Vec<TopicEntry>,
    /// Most recently mentioned entity per concept class.
    pub last_mentioned: BTreeMap<String, String>,
    /// Every note, in order, with what it did to the stack.
    pub history: Vec<(String, TopicEvent)>,
}

impl TopicState {
    pub fn current(&self) -> Option<&TopicEntry> {
        self.stack.last()
    }

    /// True if `entity` has ever been pushed as a salient entity.
    pub fn knows(&self, entity: &str) -> bool {
        self.stack.iter().any(|e| e.entity.as_deref() == Some(entity))
    }

    /// Topic concepts visited, in order, one per push.
    pub fn sequence(&self) -> Vec<&str> {
        self.stack.iter().map(|e| e.topic.as_str()).collect()
    }
}

/// Record the topic of a committed intention. Returns whether this shifted
/// away from a previous topic, and the event recorded.
pub fn note_topic(
    topic: &mut TopicState,
    intention: &Intention,
    kb: &KnowledgeBase,
) -> Option<(bool, TopicEvent)> {
    let (concept, entity) = match intention.act {
        Act::Thank => (CLOSING_TOPIC.to_string(), None),
        _ => {
            let product = kb.product(intention.object.as_deref()?)?;
            (product.category.clone(), Some(product.name.clone()))
        }
    };
    let event = match topic.stack.last_mut() {
        _ if intention.act == Act::Thank => TopicEvent::Closed,
        None => TopicEvent::Introduced,
        Some(top) if top.topic == concept => {
            if entity.is_some() && top.entity != entity {
                top.entity = entity.clone();
            }
            TopicEvent::Continued
        }
        Some(_) => TopicEvent::Shifted,
    };
    if event != TopicEvent::Continued {
        topic.stack.push(TopicEntry {
            topic: concept.clone(),
            entity: entity.clone(),
        });
    }
    if let Some(e) = entity {
        if let Some(class) = kb.class_of(&e) {
            topic.last_mentioned.insert(class.to_string(), e);
        }
    }
    topic.history.push((concept, event));
    Some((event == TopicEvent::Shifted, event))
}

/// Replace pronoun and ellipsis markers with salient entities from the topic
/// state. A bare definite category ("the personal computer") in a question is
/// read as the most recent entity of that category. Markers without an
/// antecedent are left in place.
pub fn resolve_references(frame: &SemanticFrame, topic: &TopicState, kb: &KnowledgeBase) -> SemanticFrame {
    let mut out = frame.clone();
    for (slot, filler) in out.slots.iter_mut() {
        let resolved = match filler {
            Filler::UnresolvedPronoun => topic.last_mentioned.get("product").cloned(),
            Filler::UnresolvedEllipsis => topic.stack.iter().rev().find_map(|e| e.entity.clone()),
            _ => None,
        };
        if slot == "companion" {
            continue;
        }
        if let Some(entity) = resolved {
            *filler = Filler::Concept(entity);
        }
    }
    let asks_about_known = matches!(
        frame.name.as_str(),
        "query-attribute" | "query-capability" | "assert"
    );
    if asks_about_known && *out.slot("object") == Filler::Unfilled {
        if let Some(category) = out.concept("category") {
            let hit = topic.stack.iter().rev().find_map(|e| {
                let entity = e.entity.as_deref()?;
                (kb.product(entity)?.category == category).then(|| entity.to_string())
            });
            if let Some(entity) = hit {
                out.slots.insert("object".into(), Filler::Concept(entity));
            }
        }
    }
    out
}
