use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::Classification;
use crate::display::{FacialDisplay, Situation};
use crate::face::{FaceMesh, Frame, FrameMode, ParameterVector};
use crate::nlp::NBestInput;
use crate::respond::PhonemeTrack;

/// One line on the wire: `{"seq":N,"type":"...","payload":{...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolMessage {
    pub seq: u64,
    #[serde(flatten)]
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "camelCase")]
pub enum Payload {
    #[serde(rename_all = "camelCase")]
    SessionStart {
        session: String,
        frame_mode: FrameMode,
        fps: u32,
        /// Mesh and muscles, so the client can deform parameter frames itself.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mesh: Option<Box<FaceMesh>>,
    },
    Utterance {
        text: String,
    },
    Nbest {
        hypotheses: NBestInput,
    },
    #[serde(rename_all = "camelCase")]
    Response {
        turn: u32,
        segment: u32,
        text: String,
        annotation: String,
    },
    #[serde(rename_all = "camelCase")]
    DisplayRequest {
        displays: Vec<FacialDisplay>,
        params: ParameterVector,
        hold_ms: u64,
    },
    Lipsync {
        track: PhonemeTrack,
    },
    Frame(Frame),
    Situation {
        situation: Situation,
    },
    #[serde(rename_all = "camelCase")]
    Metrics {
        topics: u32,
        elapsed_s: f64,
        score: f64,
        classification: Classification,
        histogram: BTreeMap<String, u64>,
    },
    SessionEnd {
        reason: String,
    },
    #[serde(rename_all = "camelCase")]
    Error {
        message: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offending_seq: Option<u64>,
    },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::SessionStart { .. } => "sessionStart",
            Payload::Utterance { .. } => "utterance",
            Payload::Nbest { .. } => "nbest",
            Payload::Response { .. } => "response",
            Payload::DisplayRequest { .. } => "displayRequest",
            Payload::Lipsync { .. } => "lipsync",
            Payload::Frame(_) => "frame",
            Payload::Situation { .. } => "situation",
            Payload::Metrics { .. } => "metrics",
            Payload::SessionEnd { .. } => "sessionEnd",
            Payload::Error { .. } => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("malformed message{}: {message}", .seq.map(|s| format!(" (seq {s})")).unwrap_or_default())]
pub struct DecodeError {
    /// Sequence number of the offending line, when it could be read.
    pub seq: Option<u64>,
    pub message: String,
}

impl DecodeError {
    pub fn to_payload(&self) -> Payload {
        Payload::Error {
            message: self.message.clone(),
            offending_seq: self.seq,
        }
    }
}

/// One JSON object, no trailing newline.
pub fn encode(msg: &ProtocolMessage) -> String {
    serde_json::to_string(msg).expect("messages serialize")
}

pub fn decode(line: &str) -> Result<ProtocolMessage, DecodeError> {
    serde_json::from_str(line.trim_end_matches(['\r', '\n'])).map_err(|e| DecodeError {
        seq: serde_json::from_str::<serde_json::Value>(line)
            .ok()
            .and_then(|v| v.get("seq")?.as_u64()),
        message: e.to_string(),
    })
}

/// Hands out strictly increasing sequence numbers for one direction.
#[derive(Debug, Clone, Default)]
pub struct Sequencer {
    next: u64,
}

impl Sequencer {
    pub fn wrap(&mut self, payload: Payload) -> ProtocolMessage {
        self.next += 1;
        ProtocolMessage {
            seq: self.next,
            payload,
        }
    }
}
