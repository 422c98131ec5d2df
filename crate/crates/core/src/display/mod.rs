//! Facial display catalog, the situation to display mapping, and composition
//! of several displays into parameter requests.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::face::{ParameterVector, MUSCLE_COUNT, PARAM_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FacialDisplay {
    ExclamationMark,
    QuestionMark,
    Emphasizer,
    Underliner,
    Punctuation,
    EndUtterance,
    BOSStory,
    StoryContinuation,
    EOStory,
    Thinking,
    FacialShrug,
    InteractiveYouKnow,
    Metacommunicative,
    SpeakerYes,
    SpeakerNo,
    SpeakerNot,
    SpeakerBut,
    #[serde(rename = "Backchannel/Attend")]
    Attend,
    LoudnessIndication,
    Confident,
    ModConfident,
    NotConfident,
    ListenerYes,
    Agreement,
    RequestMoreInfo,
    Incredulity,
    Smile,
    Neutral,
}

impl FacialDisplay {
    pub const ALL: [FacialDisplay; 28] = {
        use FacialDisplay::*;
        [
            ExclamationMark,
            QuestionMark,
            Emphasizer,
            Underliner,
            Punctuation,
            EndUtterance,
            BOSStory,
            StoryContinuation,
            EOStory,
            Thinking,
            FacialShrug,
            InteractiveYouKnow,
            Metacommunicative,
            SpeakerYes,
            SpeakerNo,
            SpeakerNot,
            SpeakerBut,
            Attend,
            LoudnessIndication,
            Confident,
            ModConfident,
            NotConfident,
            ListenerYes,
            Agreement,
            RequestMoreInfo,
            Incredulity,
            Smile,
            Neutral,
        ]
    };

    pub fn category(self) -> DisplayCategory {
        let n = Self::ALL.iter().position(|d| *d == self).expect("listed");
        match n {
            0..=8 => DisplayCategory::Syntactic,
            9..=16 => DisplayCategory::Speaker,
            17..=25 => DisplayCategory::ListenerComment,
            _ => DisplayCategory::Complementary,
        }
    }

    /// Catalog identifier, as used in files and on the wire.
    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .expect("unit variant")
    }

    /// Short form used in transcript annotations.
    pub fn label(self) -> String {
        match self {
            FacialDisplay::QuestionMark => "Question".into(),
            FacialDisplay::FacialShrug => "Shrug".into(),
            FacialDisplay::Attend => "Attend".into(),
            other => other.name(),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(name) || d.label().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for FacialDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DisplayCategory {
    Syntactic,
    Speaker,
    ListenerComment,
    Complementary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Situation {
    RecognitionFailure,
    SyntacticallyInvalid,
    CloseScores,
    BeginningOfDialogue,
    IntroductionToTopic,
    TopicShift,
    ClarificationDialogue,
    UnderlineRemark,
    AnswerYes,
    AnswerNo,
    OutOfDomain,
    AnswerYesEmphatic,
    PragmaticViolation,
    ReplyToThanks,
}

impl Situation {
    pub const ALL: [Situation; 14] = {
        use Situation::*;
        [
            RecognitionFailure,
            SyntacticallyInvalid,
            CloseScores,
            BeginningOfDialogue,
            IntroductionToTopic,
            TopicShift,
            ClarificationDialogue,
            UnderlineRemark,
            AnswerYes,
            AnswerNo,
            OutOfDomain,
            AnswerYesEmphatic,
            PragmaticViolation,
            ReplyToThanks,
        ]
    };
}

/// Displays shown in each conversational situation, in showing order.
pub fn displays_for(situation: Situation) -> Vec<FacialDisplay> {
    use FacialDisplay::*;
    match situation {
        Situation::RecognitionFailure => vec![NotConfident],
        Situation::SyntacticallyInvalid => vec![NotConfident],
        Situation::CloseScores => vec![ModConfident],
        Situation::BeginningOfDialogue => vec![Attend],
        Situation::IntroductionToTopic => vec![BOSStory],
        Situation::TopicShift => vec![EOStory, BOSStory],
        Situation::ClarificationDialogue => vec![QuestionMark],
        Situation::UnderlineRemark => vec![Underliner],
        Situation::AnswerYes => vec![SpeakerYes],
        Situation::AnswerNo => vec![SpeakerNo],
        Situation::OutOfDomain => vec![FacialShrug],
        Situation::AnswerYesEmphatic => vec![SpeakerYes, Emphasizer],
        Situation::PragmaticViolation => vec![Incredulity],
        Situation::ReplyToThanks => vec![ListenerYes, Smile],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplayDef {
    pub display: FacialDisplay,
    pub category: DisplayCategory,
    pub targets: ParameterVector,
    pub hold_ms: u64,
    pub blendable: bool,
}

/// One request to the animation side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplayRequest {
    pub displays: Vec<FacialDisplay>,
    pub params: ParameterVector,
    pub hold_ms: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum DisplayError {
    #[error("display file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}: unknown parameter `{1}`")]
    UnknownParam(FacialDisplay, String),
    #[error("{0}: category does not match the catalog")]
    WrongCategory(FacialDisplay),
    #[error("{0} defined twice")]
    Duplicate(FacialDisplay),
    #[error("{0} has no preset")]
    Missing(FacialDisplay),
    #[error("{0}: hold must be positive")]
    ZeroHold(FacialDisplay),
}

#[derive(Debug, Deserialize, Serialize)]
struct PresetRow {
    display: FacialDisplay,
    category: DisplayCategory,
    hold_ms: u64,
    #[serde(default)]
    targets: BTreeMap<String, f64>,
}

/// The shipped presets, one per display.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplayCatalog {
    defs: Vec<DisplayDef>,
}

impl DisplayCatalog {
    pub fn from_json(text: &str) -> Result<Self, DisplayError> {
        let rows: Vec<PresetRow> = serde_json::from_str(text)?;
        let mut defs: Vec<DisplayDef> = Vec::new();
        for row in rows {
            if defs.iter().any(|d| d.display == row.display) {
                return Err(DisplayError::Duplicate(row.display));
            }
            if row.category != row.display.category() {
                return Err(DisplayError::WrongCategory(row.display));
            }
            if row.hold_ms == 0 {
                return Err(DisplayError::ZeroHold(row.display));
            }
            let mut targets = ParameterVector::ZERO;
            for (name, v) in &row.targets {
                let i = ParameterVector::index_of(name)
                    .ok_or_else(|| DisplayError::UnknownParam(row.display, name.clone()))?;
                targets[i] = *v;
            }
            defs.push(DisplayDef {
                display: row.display,
                category: row.category,
                targets: targets.clamped(),
                hold_ms: row.hold_ms,
                blendable: !matches!(row.display, FacialDisplay::EOStory | FacialDisplay::BOSStory),
            });
        }
        if let Some(d) = FacialDisplay::ALL.iter().find(|d| !defs.iter().any(|x| x.display == **d)) {
            return Err(DisplayError::Missing(*d));
        }
        defs.sort_by_key(|d| d.display);
        Ok(DisplayCatalog { defs })
    }

    pub fn catalog(&self) -> &[DisplayDef] {
        &self.defs
    }

    pub fn get(&self, display: FacialDisplay) -> &DisplayDef {
        self.defs
            .iter()
            .find(|d| d.display == display)
            .expect("catalog is complete")
    }

    /// Turn a list of displays into timed requests. A story end followed by a
    /// story beginning plays as two steps; anything else shown together is
    /// blended, each parameter taking the value of largest magnitude.
    pub fn compose(&self, displays: &[FacialDisplay]) -> Vec<DisplayRequest> {
        let mut groups: Vec<Vec<FacialDisplay>> = vec![Vec::new()];
        for (i, d) in displays.iter().enumerate() {
            let boundary =
                i > 0 && displays[i - 1] == FacialDisplay::EOStory && *d == FacialDisplay::BOSStory;
            if boundary {
                groups.push(Vec::new());
            }
            groups.last_mut().expect("non-empty").push(*d);
        }
        groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|g| self.blend(g))
            .collect()
    }

    fn blend(&self, displays: Vec<FacialDisplay>) -> DisplayRequest {
        let mut params = ParameterVector::ZERO;
        let mut hold_ms = 0;
        for d in &displays {
            let def = self.get(*d);
            for i in 0..PARAM_COUNT {
                if def.targets[i].abs() > params[i].abs() {
                    params[i] = def.targets[i];
                }
            }
            hold_ms = hold_ms.max(def.hold_ms);
        }
        for v in &mut params.0[..MUSCLE_COUNT] {
            *v = v.clamp(0.0, 1.0);
        }
        DisplayRequest {
            displays,
            params,
            hold_ms,
        }
    }
}

/// "[Attend and BOSStory]" style annotation; "[Continuing]" when empty.
pub fn annotation(displays: &[FacialDisplay]) -> String {
    if displays.is_empty() {
        return "[Continuing]".into();
    }
    let labels: Vec<String> = displays.iter().map(|d| d.label()).collect();
    format!("[{}]", labels.join(" and "))
}
