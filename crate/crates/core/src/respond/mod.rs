//! Response generation from templates and the product knowledge base, and
//! phoneme tracks for lip sync.

mod phonemes;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use phonemes::{phonemize, PhonemeTable, PhonemeTrack, PHONEME_MS, SILENCE, SILENCE_MS};

use crate::display::Situation;
use crate::kb::{KnowledgeBase, Value};
use crate::plan::{Act, Clarification, Intention};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentTemplate {
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub situations: Vec<Situation>,
    /// Opens a story about the current topic.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub topic: bool,
    /// Dropped, instead of failing the response, when a placeholder is unknown.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub optional: bool,
}

/// One spoken sentence of a response and the situations it signals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub text: String,
    pub situations: Vec<Situation>,
    pub topic: bool,
    /// Show the emphasizer along with this segment.
    pub emphasis: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("template file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("template `{0}` is missing")]
    Missing(&'static str),
    #[error("template `{0}` has an unclosed placeholder")]
    Unclosed(String),
    #[error("template `{key}` uses unknown placeholder `{name}`")]
    UnknownPlaceholder { key: String, name: String },
}

const PLACEHOLDERS: [&str; 20] = [
    "product",
    "maker",
    "category",
    "summary",
    "price",
    "width",
    "depth",
    "height",
    "weight",
    "size",
    "cpu",
    "mips",
    "speed_note",
    "memory",
    "software_summary",
    "software_examples",
    "value",
    "alt_category",
    "proposal",
    "attribute",
];

const REQUIRED: [&str; 12] = [
    "greet",
    "thank",
    "pardon",
    "clarify",
    "out-of-domain",
    "get-info",
    "scale/yes",
    "scale/no",
    "claim/contradict",
    "software/describe",
    "software/recommend",
    "software/no",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Templates(BTreeMap<String, Vec<SegmentTemplate>>);

impl Templates {
    pub fn from_json(text: &str) -> Result<Self, TemplateError> {
        let map: BTreeMap<String, Vec<SegmentTemplate>> = serde_json::from_str(text)?;
        for key in REQUIRED {
            if !map.contains_key(key) {
                return Err(TemplateError::Missing(key));
            }
        }
        for (key, segs) in &map {
            for s in segs {
                for name in placeholders(&s.text).ok_or_else(|| TemplateError::Unclosed(key.clone()))? {
                    if !PLACEHOLDERS.contains(&name) {
                        return Err(TemplateError::UnknownPlaceholder {
                            key: key.clone(),
                            name: name.to_string(),
                        });
                    }
                }
            }
        }
        Ok(Templates(map))
    }

    pub fn get(&self, key: &str) -> Option<&[SegmentTemplate]> {
        self.0.get(key).map(Vec::as_slice)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    /// Fill every segment of `key`. `None` if a required segment cannot be filled.
    pub fn render(&self, key: &str, vars: &BTreeMap<&str, String>) -> Option<Vec<Segment>> {
        let mut out = Vec::new();
        for t in self.get(key)? {
            match fill(&t.text, vars) {
                Some(text) => out.push(Segment {
                    text,
                    situations: t.situations.clone(),
                    topic: t.topic,
                    emphasis: false,
                }),
                None if t.optional => {}
                None => return None,
            }
        }
        Some(out)
    }

    fn fixed(&self, key: &'static str) -> Vec<Segment> {
        self.render(key, &BTreeMap::new())
            .unwrap_or_else(|| panic!("template `{key}` takes no placeholders"))
    }

    pub fn pardon(&self) -> Vec<Segment> {
        self.fixed("pardon")
    }

    pub fn out_of_domain(&self) -> Vec<Segment> {
        self.fixed("out-of-domain")
    }
}

fn placeholders(text: &str) -> Option<Vec<&str>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(i) = rest.find('{') {
        let j = rest[i..].find('}')? + i;
        out.push(&rest[i + 1..j]);
        rest = &rest[j + 1..];
    }
    Some(out)
}

fn fill(text: &str, vars: &BTreeMap<&str, String>) -> Option<String> {
    let mut out = String::new();
    let mut rest = text;
    while let Some(i) = rest.find('{') {
        let j = rest[i..].find('}')? + i;
        out.push_str(&rest[..i]);
        out.push_str(vars.get(&rest[i + 1..j])?);
        rest = &rest[j + 1..];
    }
    out.push_str(rest);
    Some(out)
}

/// Integral values print without decimals and with thousands separators.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        let digits = format!("{}", v.abs() as u64);
        let mut grouped = String::new();
        for (i, ch) in digits.chars().enumerate() {
            if i > 0 && (digits.len() - i) % 3 == 0 {
                grouped.push(',');
            }
            grouped.push(ch);
        }
        if v < 0.0 {
            grouped.insert(0, '-');
        }
        grouped
    } else {
        format!("{v}")
    }
}

/// "a", "a, and b", "a, b, and c".
pub fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

/// Placeholder values for one product.
fn product_vars(kb: &KnowledgeBase, product: &str) -> BTreeMap<&'static str, String> {
    let mut vars = BTreeMap::new();
    let Some(p) = kb.product(product) else {
        return vars;
    };
    vars.insert("product", kb.label(&p.name).to_string());
    vars.insert("maker", kb.label(&p.maker).to_string());
    vars.insert("category", kb.label(&p.category).to_string());
    vars.insert("summary", p.summary.clone());
    for attr in ["price", "width", "depth", "height", "weight", "size", "cpu", "mips"] {
        match kb.lookup(product, attr) {
            Some(Value::Number(n)) => {
                vars.insert(attr, format_number(n));
            }
            Some(Value::Text(t)) => {
                vars.insert(attr, t);
            }
            None => {}
        }
    }
    if let Some(note) = &p.speed_note {
        vars.insert("speed_note", note.clone());
    }
    if let Some(sw) = &p.software {
        vars.insert("software_summary", sw.summary.clone());
        if !sw.examples.is_empty() {
            vars.insert("software_examples", join_list(&sw.examples));
        }
    }
    vars
}

/// Threshold a vague adjective's attribute is judged against.
fn threshold(kb: &KnowledgeBase, category: &str, attribute: &str) -> Option<f64> {
    let t = kb.thresholds(category)?;
    match attribute {
        "size" => Some(t.large_volume_cm3),
        "weight" => Some(t.heavy_kg),
        _ => None,
    }
}

/// Whether `adjective` holds of `product`, and whether it holds or fails by
/// a wide margin.
pub fn judge(kb: &KnowledgeBase, product: &str, adjective: &str) -> Option<(bool, bool)> {
    let scale = kb.scale(adjective)?;
    let p = kb.product(product)?;
    let v = kb.lookup(product, &scale.attribute)?.as_number()?;
    let t = threshold(kb, &p.category, &scale.attribute)?;
    let holds = if scale.above { v > t } else { v < t };
    let emphatic = (v / t).min(t / v) <= kb.emphasis_ratio();
    Some((holds, emphatic))
}

/// Text and situations answering a committed intention. Requests the
/// knowledge base cannot serve get the out-of-domain reply.
pub fn generate(intention: &Intention, kb: &KnowledgeBase, templates: &Templates) -> Vec<Segment> {
    answer(intention, kb, templates).unwrap_or_else(|| templates.out_of_domain())
}

fn answer(intention: &Intention, kb: &KnowledgeBase, templates: &Templates) -> Option<Vec<Segment>> {
    match intention.act {
        Act::Greet => return templates.render("greet", &BTreeMap::new()),
        Act::Thank => return templates.render("thank", &BTreeMap::new()),
        Act::OutOfDomain | Act::Confirm | Act::Deny => return None,
        Act::GetInfo | Act::QueryAttribute => {}
    }
    let product = intention.object.as_deref()?;
    let mut vars = product_vars(kb, product);
    if vars.is_empty() {
        return None;
    }
    if intention.act == Act::GetInfo {
        return templates.render("get-info", &vars);
    }
    let attribute = intention.attribute.as_deref()?;
    if let Some(v) = &intention.value {
        vars.insert("value", kb.label(v).to_string());
    }
    vars.insert("attribute", kb.label(attribute).to_string());
    if attribute == "software" {
        return software(intention, kb, templates, vars);
    }
    let fact = templates.render(&format!("attribute/{attribute}"), &vars)?;
    let Some(adjective) = intention.value.as_deref() else {
        return Some(fact);
    };
    let (holds, emphatic) = judge(kb, product, adjective)?;
    let mut lead = match (intention.claim, holds) {
        (true, true) => templates.render("claim/agree", &vars)?,
        (true, false) => templates.render("claim/contradict", &vars)?,
        (false, true) => templates.render("scale/yes", &vars)?,
        (false, false) => templates.render("scale/no", &vars)?,
    };
    if emphatic && !intention.claim {
        for seg in &mut lead {
            if holds {
                for s in &mut seg.situations {
                    if *s == Situation::AnswerYes {
                        *s = Situation::AnswerYesEmphatic;
                    }
                }
            } else if seg.situations.contains(&Situation::AnswerNo) {
                seg.emphasis = true;
            }
        }
    }
    lead.extend(fact);
    Some(lead)
}

fn software(
    intention: &Intention,
    kb: &KnowledgeBase,
    templates: &Templates,
    mut vars: BTreeMap<&'static str, String>,
) -> Option<Vec<Segment>> {
    let product = kb.product(intention.object.as_deref()?)?;
    let Some(wanted) = intention.value.as_deref() else {
        return templates.render("software/describe", &vars);
    };
    let supports = |p: &crate::kb::ProductRecord| {
        p.software
            .as_ref()
            .is_some_and(|s| s.supports.iter().any(|x| x == wanted))
    };
    if supports(product) {
        return templates.render("software/yes", &vars);
    }
    if let Some(alt) = kb.products().iter().find(|p| p.name != product.name && supports(p)) {
        vars.insert("alt_category", kb.label(&alt.category).to_string());
        return templates.render("software/recommend", &vars);
    }
    templates.render("software/no", &vars)
}

/// The clarification question for a critical situation.
pub fn clarify(c: &Clarification, kb: &KnowledgeBase, templates: &Templates) -> Vec<Segment> {
    let mut words: Vec<&str> = Vec::new();
    if let Some(m) = c.proposal.get("maker") {
        words.push(kb.label(m));
    }
    if let Some(p) = c.proposal.get("product") {
        words.push(kb.label(p));
    } else if let Some(cat) = c.proposal.get("category") {
        words.push(kb.label(cat));
    }
    let vars = BTreeMap::from([("proposal", words.join(" "))]);
    templates
        .render("clarify", &vars)
        .expect("clarify template takes only the proposal")
}
