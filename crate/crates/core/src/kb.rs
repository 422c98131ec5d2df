//! Frame-based domain knowledge: concept frames for the analyzer and product
//! records for the responder.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate concept `{0}`")]
    DuplicateConcept(String),
    #[error("concept `{concept}` has unknown class `{class}`")]
    UnknownClass { concept: String, class: String },
    #[error("`{0}` refers to unknown concept `{1}`")]
    UnknownConcept(String, String),
    #[error("product `{product}` has non-positive {field}")]
    NonPositive { product: String, field: &'static str },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptClass {
    pub name: String,
    /// Frame slot that a word of this class fills. Classes without a slot are
    /// syntactic glue and contribute nothing to the meaning.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<String>,
    /// `pronoun` marks classes whose words stand for an unresolved reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker: Option<String>,
}

/// Which measured attribute a vague adjective talks about, and whether it
/// means "above the category threshold".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub attribute: String,
    pub above: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Scale>,
}

/// Definition of an utterance-level frame: allowed slots with the concept
/// classes each one accepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDef {
    pub name: String,
    pub slots: BTreeMap<String, Vec<String>>,
    /// At least one of these slots must be filled for the frame to be valid.
    #[serde(default)]
    pub requires_any: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryThresholds {
    pub name: String,
    pub large_volume_cm3: f64,
    pub heavy_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Software {
    pub summary: String,
    #[serde(default)]
    pub examples: Vec<String>,
    #[serde(default)]
    pub supports: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductRecord {
    pub name: String,
    pub category: String,
    pub maker: String,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_yen: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_kg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mips: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub software: Option<Software>,
}

impl ProductRecord {
    pub fn volume_cm3(&self) -> Option<f64> {
        Some(self.width_cm? * self.depth_cm? * self.height_cm?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl Value {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            Value::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KbFile {
    classes: Vec<ConceptClass>,
    concepts: Vec<Concept>,
    frames: Vec<FrameDef>,
    categories: Vec<CategoryThresholds>,
    emphasis_ratio: f64,
    products: Vec<ProductRecord>,
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    file: KbFile,
    classes: HashMap<String, usize>,
    concepts: HashMap<String, usize>,
    frames: HashMap<String, usize>,
}

impl KnowledgeBase {
    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let file: KbFile = serde_json::from_str(text)?;
        let classes = file
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.clone(), i))
            .collect::<HashMap<_, _>>();
        let mut concepts = HashMap::new();
        for (i, c) in file.concepts.iter().enumerate() {
            if !classes.contains_key(&c.class) {
                return Err(KbError::UnknownClass {
                    concept: c.name.clone(),
                    class: c.class.clone(),
                });
            }
            if concepts.insert(c.name.clone(), i).is_some() {
                return Err(KbError::DuplicateConcept(c.name.clone()));
            }
        }
        let frames = file
            .frames
            .iter()
            .enumerate()
            .map(|(i, f)| (f.name.clone(), i))
            .collect();
        let kb = KnowledgeBase {
            file,
            classes,
            concepts,
            frames,
        };
        kb.validate()?;
        Ok(kb)
    }

    fn validate(&self) -> Result<(), KbError> {
        for frame in &self.file.frames {
            for class in frame.slots.values().flatten() {
                if !self.classes.contains_key(class) {
                    return Err(KbError::UnknownClass {
                        concept: frame.name.clone(),
                        class: class.clone(),
                    });
                }
            }
        }
        for c in &self.file.concepts {
            if let Some(scale) = &c.scale {
                self.require(&c.name, &scale.attribute)?;
            }
        }
        for t in &self.file.categories {
            self.require("categories", &t.name)?;
        }
        for p in &self.file.products {
            self.require(&p.name, &p.name)?;
            self.require(&p.name, &p.category)?;
            self.require(&p.name, &p.maker)?;
            let positive = |v: Option<f64>, field| match v {
                Some(x) if x.is_nan() || x <= 0.0 => Err(KbError::NonPositive {
                    product: p.name.clone(),
                    field,
                }),
                _ => Ok(()),
            };
            positive(p.price_yen.map(|v| v as f64), "price")?;
            positive(p.width_cm, "width")?;
            positive(p.depth_cm, "depth")?;
            positive(p.height_cm, "height")?;
            positive(p.weight_kg, "weight")?;
            positive(p.mips, "mips")?;
            if let Some(sw) = &p.software {
                for s in &sw.supports {
                    self.require(&p.name, s)?;
                }
            }
        }
        Ok(())
    }

    fn require(&self, owner: &str, name: &str) -> Result<(), KbError> {
        if self.concepts.contains_key(name) {
            Ok(())
        } else {
            Err(KbError::UnknownConcept(owner.to_string(), name.to_string()))
        }
    }

    pub fn concept(&self, name: &str) -> Option<&Concept> {
        self.concepts.get(name).map(|&i| &self.file.concepts[i])
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.file.concepts
    }

    pub fn class_of(&self, concept: &str) -> Option<&str> {
        self.concept(concept).map(|c| c.class.as_str())
    }

    pub fn class(&self, name: &str) -> Option<&ConceptClass> {
        self.classes.get(name).map(|&i| &self.file.classes[i])
    }

    /// Display form of a concept, falling back to its identifier.
    pub fn label<'a>(&'a self, concept: &'a str) -> &'a str {
        self.concept(concept)
            .and_then(|c| c.label.as_deref())
            .unwrap_or(concept)
    }

    pub fn frame(&self, name: &str) -> Option<&FrameDef> {
        self.frames.get(name).map(|&i| &self.file.frames[i])
    }

    pub fn frames(&self) -> &[FrameDef] {
        &self.file.frames
    }

    pub fn products(&self) -> &[ProductRecord] {
        &self.file.products
    }

    pub fn product(&self, name: &str) -> Option<&ProductRecord> {
        self.file.products.iter().find(|p| p.name == name)
    }

    pub fn thresholds(&self, category: &str) -> Option<&CategoryThresholds> {
        self.file.categories.iter().find(|c| c.name == category)
    }

    /// Categories that have at least one product, in product order.
    pub fn product_categories(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in &self.file.products {
            if !out.contains(&p.category.as_str()) {
                out.push(&p.category);
            }
        }
        out
    }

    pub fn emphasis_ratio(&self) -> f64 {
        self.file.emphasis_ratio
    }

    pub fn scale(&self, adjective: &str) -> Option<&Scale> {
        self.concept(adjective).and_then(|c| c.scale.as_ref())
    }

    /// Fetch one attribute of a product. `size` is the bounding volume in cm³.
    pub fn lookup(&self, product: &str, attribute: &str) -> Option<Value> {
        let p = self.product(product)?;
        match attribute {
            "price" => p.price_yen.map(|v| Value::Number(v as f64)),
            "size" => p.volume_cm3().map(Value::Number),
            "width" => p.width_cm.map(Value::Number),
            "depth" => p.depth_cm.map(Value::Number),
            "height" => p.height_cm.map(Value::Number),
            "weight" => p.weight_kg.map(Value::Number),
            "cpu" => p.cpu.clone().map(Value::Text),
            "mips" => p.mips.map(Value::Number),
            "software" => p.software.as_ref().map(|s| Value::Text(s.summary.clone())),
            "category" => Some(Value::Text(self.label(&p.category).to_string())),
            "maker" => Some(Value::Text(self.label(&p.maker).to_string())),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("knowledge base serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb() -> KnowledgeBase {
        KnowledgeBase::from_json(include_str!("../data/kb.json")).unwrap()
    }

    #[test]
    fn news_facts() {
        let kb = kb();
        assert_eq!(
            kb.lookup("news", "cpu"),
            Some(Value::Text("R3081 RISC processor".into()))
        );
        assert_eq!(kb.lookup("news", "mips"), Some(Value::Number(37.0)));
        assert_eq!(kb.lookup("news", "width"), Some(Value::Number(32.4)));
        assert_eq!(kb.lookup("news", "price"), Some(Value::Number(700_000.0)));
        assert_eq!(kb.lookup("quarterl", "price"), Some(Value::Number(398_000.0)));
    }

    #[test]
    fn absent_attribute() {
        let kb = kb();
        assert_eq!(kb.lookup("quarterl", "cpu"), None);
        assert_eq!(kb.lookup("news", "memory"), None);
        assert_eq!(kb.lookup("printer", "price"), None);
    }

    #[test]
    fn rejects_negative_price_field() {
        let text = include_str!("../data/kb.json").replace("\"weight_kg\": 4.5", "\"weight_kg\": -4.5");
        assert!(matches!(
            KnowledgeBase::from_json(&text),
            Err(KbError::NonPositive { field: "weight", .. })
        ));
    }

    #[test]
    fn concept_frame_count() {
        assert_eq!(kb().concepts().len(), 61);
    }
}
