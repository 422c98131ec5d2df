//! Turn loop, wire protocol and session metrics.

mod clock;
mod engine;
mod metrics;
mod protocol;
mod script;
mod server;

pub use clock::{Clock, SimClock, SystemClock};
pub use engine::{replay, segment_displays, Replay, Session, SessionConfig, TurnOutput};
pub use metrics::{
    classify, score_session, Classification, LogError, LogRecord, SegmentRecord, SessionLog, TurnRecord,
    DEFAULT_LAMBDA, DEFAULT_SMOOTH_THRESHOLD,
};
pub use protocol::{decode, encode, DecodeError, Payload, ProtocolMessage, Sequencer};
pub use script::{parse_script, ScriptError, ScriptStep};
pub use server::{serve, Server};
