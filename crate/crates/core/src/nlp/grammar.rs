use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::lexicon::Pos;
use super::NlpError;
use crate::kb::KnowledgeBase;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Nonterminal(String),
    /// A literal surface form. Literal words are syntactic glue and add no meaning.
    Word(String),
    /// Any lexical entry whose concept belongs to the named class.
    Class(String),
    Pos(Pos),
}

impl Symbol {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, Symbol::Nonterminal(_))
    }

    fn parse(token: &str) -> Option<Symbol> {
        if let Some(w) = token.strip_prefix('\'').and_then(|t| t.strip_suffix('\'')) {
            return (!w.is_empty()).then(|| Symbol::Word(w.to_lowercase()));
        }
        if let Some(c) = token.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            if c.is_empty() {
                return None;
            }
            return Some(match c.parse::<Pos>() {
                Ok(pos) => Symbol::Pos(pos),
                Err(()) => Symbol::Class(c.to_string()),
            });
        }
        let ident = token
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        (ident && !token.is_empty()).then(|| Symbol::Nonterminal(token.to_string()))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Nonterminal(n) => f.write_str(n),
            Symbol::Word(w) => write!(f, "'{w}'"),
            Symbol::Class(c) => write!(f, "<{c}>"),
            Symbol::Pos(p) => write!(f, "<{p}>"),
        }
    }
}

/// Value written into a frame slot by a rule action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constant {
    Concept(String),
    Pronoun,
    Ellipsis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// Union of the children's slots.
    Merge,
    /// Keep the first child's slots and put the head of the second under the slot.
    Attach(String),
    Frame {
        name: String,
        constants: BTreeMap<String, Constant>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarRule {
    pub lhs: String,
    pub rhs: Vec<Symbol>,
    pub action: Action,
}

impl GrammarRule {
    pub fn is_unary_nonterminal(&self) -> bool {
        self.rhs.len() == 1 && !self.rhs[0].is_terminal()
    }
}

#[derive(Debug, Clone)]
pub struct Grammar {
    start: String,
    fragment: Option<String>,
    rules: Vec<GrammarRule>,
    /// Nonterminals ordered so that for every unary rule `A -> B`, `B` precedes `A`.
    unary_order: Vec<String>,
}

impl Grammar {
    pub fn parse(text: &str) -> Result<Self, NlpError> {
        let mut start = None;
        let mut fragment = None;
        let mut rules = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| NlpError::Syntax {
                file: "grammar",
                line: n + 1,
                message: msg,
            };
            if let Some(rest) = line.strip_prefix('%') {
                let mut words = rest.split_whitespace();
                match (words.next(), words.next(), words.next()) {
                    (Some("start"), Some(s), None) => start = Some(s.to_string()),
                    (Some("fragment"), Some(s), None) => fragment = Some(s.to_string()),
                    _ => return Err(bad(format!("unknown directive `{line}`"))),
                }
                continue;
            }
            let (production, action) = match line.split_once(';') {
                Some((p, a)) => (p, Some(a.trim())),
                None => (line, None),
            };
            let (lhs, rhs) = production
                .split_once("->")
                .ok_or_else(|| bad("expected `LHS -> RHS`".into()))?;
            let lhs = match Symbol::parse(lhs.trim()) {
                Some(Symbol::Nonterminal(l)) => l,
                _ => return Err(bad(format!("bad left-hand side `{}`", lhs.trim()))),
            };
            let rhs = rhs
                .split_whitespace()
                .map(|t| Symbol::parse(t).ok_or_else(|| bad(format!("bad symbol `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if rhs.is_empty() {
                return Err(bad("empty right-hand side".into()));
            }
            let action = match action {
                None | Some("") | Some("merge") => Action::Merge,
                Some(a) => parse_action(a).map_err(bad)?,
            };
            rules.push(GrammarRule { lhs, rhs, action });
        }
        let start = start
            .or_else(|| rules.first().map(|r| r.lhs.clone()))
            .ok_or(NlpError::Grammar("grammar has no rules".into()))?;
        let mut grammar = Grammar {
            start,
            fragment,
            rules,
            unary_order: Vec::new(),
        };
        grammar.unary_order = grammar.validate()?;
        Ok(grammar)
    }

    /// Checks well-formedness and returns the unary dependency order.
    fn validate(&self) -> Result<Vec<String>, NlpError> {
        let defined: BTreeSet<&str> = self.rules.iter().map(|r| r.lhs.as_str()).collect();
        if !defined.contains(self.start.as_str()) {
            return Err(NlpError::Grammar(format!(
                "start category `{}` has no rules",
                self.start
            )));
        }
        for r in &self.rules {
            for s in &r.rhs {
                if let Symbol::Nonterminal(n) = s {
                    if !defined.contains(n.as_str()) {
                        return Err(NlpError::Grammar(format!(
                            "`{n}` is used by `{}` but never defined",
                            r.lhs
                        )));
                    }
                }
            }
        }
        let mut reached = BTreeSet::from([self.start.as_str()]);
        let mut frontier = vec![self.start.as_str()];
        while let Some(cat) = frontier.pop() {
            for r in self.rules.iter().filter(|r| r.lhs == cat) {
                for s in &r.rhs {
                    if let Symbol::Nonterminal(n) = s {
                        if reached.insert(n) {
                            frontier.push(n);
                        }
                    }
                }
            }
        }
        if let Some(orphan) = defined.iter().find(|d| !reached.contains(*d)) {
            return Err(NlpError::Grammar(format!(
                "`{orphan}` is unreachable from `{}`",
                self.start
            )));
        }
        // Topological order over unary edges; a leftover node means a cycle.
        let mut order = Vec::new();
        let mut pending: Vec<&str> = self.nonterminals();
        while !pending.is_empty() {
            let ready: Vec<&str> = pending
                .iter()
                .copied()
                .filter(|a| {
                    self.rules
                        .iter()
                        .filter(|r| r.lhs == *a && r.is_unary_nonterminal())
                        .all(|r| match &r.rhs[0] {
                            Symbol::Nonterminal(b) => order.contains(b),
                            _ => true,
                        })
                })
                .collect();
            if ready.is_empty() {
                return Err(NlpError::Grammar(format!(
                    "unary cycle among {pending:?}"
                )));
            }
            pending.retain(|p| !ready.contains(p));
            order.extend(ready.into_iter().map(String::from));
        }
        Ok(order)
    }

    /// Every class, frame and constant named by the grammar must exist in the KB.
    pub fn check_against(&self, kb: &KnowledgeBase) -> Result<(), NlpError> {
        let missing = |what: String, concept: &str| NlpError::UnknownConcept {
            what,
            concept: concept.to_string(),
        };
        for r in &self.rules {
            for s in &r.rhs {
                if let Symbol::Class(c) = s {
                    if kb.class(c).is_none() {
                        return Err(missing(format!("class in rule for `{}`", r.lhs), c));
                    }
                }
            }
            if let Action::Frame { name, constants } = &r.action {
                if kb.frame(name).is_none() {
                    return Err(missing(format!("frame in rule for `{}`", r.lhs), name));
                }
                for c in constants.values() {
                    if let Constant::Concept(c) = c {
                        if kb.concept(c).is_none() {
                            return Err(missing(format!("constant in rule for `{}`", r.lhs), c));
                        }
                    }
                }
            }
        }
        if let Some(f) = &self.fragment {
            if kb.frame(f).is_none() {
                return Err(missing("fragment frame".into(), f));
            }
        }
        Ok(())
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn fragment_frame(&self) -> Option<&str> {
        self.fragment.as_deref()
    }

    pub fn rules(&self) -> &[GrammarRule] {
        &self.rules
    }

    /// Nonterminals in order of first definition.
    pub fn nonterminals(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rules {
            if !out.contains(&r.lhs.as_str()) {
                out.push(&r.lhs);
            }
        }
        out
    }

    pub(crate) fn unary_order(&self) -> &[String] {
        &self.unary_order
    }
}

fn parse_action(text: &str) -> Result<Action, String> {
    let mut words = text.split_whitespace();
    match words.next() {
        Some("attach") => match (words.next(), words.next()) {
            (Some(slot), None) => Ok(Action::Attach(slot.to_string())),
            _ => Err("`attach` takes exactly one slot".into()),
        },
        Some("frame") => {
            let name = words.next().ok_or("`frame` needs a name")?.to_string();
            let mut constants = BTreeMap::new();
            for w in words {
                let (slot, value) = w
                    .split_once('=')
                    .ok_or_else(|| format!("expected slot=value, got `{w}`"))?;
                let value = match value {
                    "PRONOUN" => Constant::Pronoun,
                    "ELLIPSIS" => Constant::Ellipsis,
                    v => Constant::Concept(v.to_string()),
                };
                constants.insert(slot.to_string(), value);
            }
            Ok(Action::Frame { name, constants })
        }
        _ => Err(format!("unknown action `{text}`")),
    }
}
