use std::collections::BTreeMap;

use super::grammar::{Action, Constant, Grammar};
use super::parser::ParseTree;
use super::{Filler, InterpretationCandidate, NlpError, SemanticFrame};
use crate::kb::KnowledgeBase;

type Slots = BTreeMap<String, Filler>;

enum Sem {
    Slots(Slots),
    Frame(SemanticFrame),
}

/// Slots tried, in order, when a phrase is folded into another by `attach`.
const HEAD_SLOTS: [&str; 4] = ["object", "category", "software", "maker"];

/// Map parse trees to frame readings, dropping trees that break a hard
/// selectional restriction of the knowledge base. Scores start at zero.
pub fn analyze(
    trees: &[ParseTree],
    grammar: &Grammar,
    kb: &KnowledgeBase,
    skipped: usize,
) -> Result<Vec<InterpretationCandidate>, NlpError> {
    if trees.is_empty() {
        return Err(NlpError::NoTrees);
    }
    let mut out = Vec::new();
    let mut reasons = Vec::new();
    for tree in trees {
        let frame = eval(tree, grammar, kb).and_then(|sem| match sem {
            Sem::Frame(f) => Ok(f),
            Sem::Slots(slots) => match grammar.fragment_frame() {
                Some(name) => build_frame(name, slots, kb),
                None => Err(format!("`{}` is not a sentence", tree.category)),
            },
        });
        match frame {
            Ok(frame) => out.push(InterpretationCandidate {
                frame,
                tree: tree.clone(),
                skipped,
                pcs_score: 0.0,
            }),
            Err(reason) => reasons.push(reason),
        }
    }
    if out.is_empty() {
        Err(NlpError::AllRejected(reasons))
    } else {
        Ok(out)
    }
}

fn eval(tree: &ParseTree, grammar: &Grammar, kb: &KnowledgeBase) -> Result<Sem, String> {
    if let Some(leaf) = &tree.leaf {
        let mut slots = Slots::new();
        if leaf.literal {
            return Ok(Sem::Slots(slots));
        }
        let class = kb
            .class_of(&leaf.entry.concept)
            .and_then(|c| kb.class(c))
            .ok_or_else(|| format!("unknown concept `{}`", leaf.entry.concept))?;
        if let Some(slot) = &class.slot {
            let filler = match class.marker.as_deref() {
                Some("pronoun") => Filler::UnresolvedPronoun,
                _ => Filler::Concept(leaf.entry.concept.clone()),
            };
            slots.insert(slot.clone(), filler);
        }
        return Ok(Sem::Slots(slots));
    }
    let rule = &grammar.rules()[tree.rule.expect("interior nodes carry a rule")];
    let mut parts = Vec::with_capacity(tree.children.len());
    for child in &tree.children {
        match eval(child, grammar, kb)? {
            Sem::Slots(s) => parts.push(s),
            Sem::Frame(f) => return Err(format!("embedded sentence `{}`", f.name)),
        }
    }
    match &rule.action {
        Action::Merge => merge(parts).map(Sem::Slots),
        Action::Attach(slot) => {
            let mut parts = parts.into_iter();
            let mut base = parts.next().unwrap_or_default();
            let attached = merge(parts.collect())?;
            let head = HEAD_SLOTS
                .iter()
                .find_map(|s| attached.get(*s))
                .ok_or_else(|| format!("nothing to attach as `{slot}`"))?;
            if base.insert(slot.clone(), head.clone()).is_some() {
                return Err(format!("`{slot}` attached twice"));
            }
            Ok(Sem::Slots(base))
        }
        Action::Frame { name, constants } => {
            let mut slots = merge(parts)?;
            for (slot, value) in constants {
                let filler = match value {
                    Constant::Concept(c) => Filler::Concept(c.clone()),
                    Constant::Pronoun => Filler::UnresolvedPronoun,
                    Constant::Ellipsis => Filler::UnresolvedEllipsis,
                };
                if let Some(prev) = slots.insert(slot.clone(), filler.clone()) {
                    if prev != filler {
                        return Err(format!("`{slot}` given twice"));
                    }
                }
            }
            build_frame(name, slots, kb).map(Sem::Frame)
        }
    }
}

fn merge(parts: Vec<Slots>) -> Result<Slots, String> {
    let mut out = Slots::new();
    for part in parts {
        for (k, v) in part {
            match out.get(&k) {
                Some(prev) if *prev != v => {
                    return Err(format!("conflicting `{k}`: {prev} and {v}"));
                }
                _ => {
                    out.insert(k, v);
                }
            }
        }
    }
    Ok(out)
}

/// Check slots against the frame definition and fill the rest with `Unfilled`.
fn build_frame(name: &str, slots: Slots, kb: &KnowledgeBase) -> Result<SemanticFrame, String> {
    let def = kb
        .frame(name)
        .ok_or_else(|| format!("unknown frame `{name}`"))?;
    for (slot, filler) in &slots {
        let allowed = def
            .slots
            .get(slot)
            .ok_or_else(|| format!("{name} has no `{slot}` slot"))?;
        let class = match filler {
            Filler::Concept(c) => kb.class_of(c),
            Filler::UnresolvedPronoun => Some("pronoun"),
            _ => None,
        };
        if let Some(class) = class {
            if !allowed.iter().any(|a| a == class) {
                return Err(format!("{name}.{slot} cannot hold a {class}"));
            }
        }
    }
    if !def.requires_any.is_empty()
        && !def
            .requires_any
            .iter()
            .any(|s| slots.get(s).is_some_and(Filler::is_filled))
    {
        return Err(format!("{name} needs one of {:?}", def.requires_any));
    }
    let mut frame = SemanticFrame::new(name);
    for slot in def.slots.keys() {
        frame
            .slots
            .insert(slot.clone(), slots.get(slot).cloned().unwrap_or(Filler::Unfilled));
    }
    Ok(frame)
}
