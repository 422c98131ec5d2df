use std::collections::VecDeque;
use std::fmt::Write as _;
use std::sync::Arc;

use super::clock::{Clock, SimClock};
use super::metrics::{
    classify, score_session, Classification, LogRecord, SegmentRecord, SessionLog, TurnRecord, DEFAULT_LAMBDA,
    DEFAULT_SMOOTH_THRESHOLD,
};
use super::protocol::{decode, Payload, ProtocolMessage, Sequencer};
use super::script::{parse_script, ScriptError, ScriptStep};
use crate::display::{annotation, displays_for, FacialDisplay, Situation};
use crate::face::{render_frame, AnimState, FrameMode, ParameterVector};
use crate::nlp::{analyze, classify_input, disambiguate, tokenize, NBestInput, RecognitionKind, DEFAULT_DELTA};
use crate::plan::{interpret, Act, DialogueState, PlanConfig, PlanOutcome, TopicEvent};
use crate::respond::{clarify, generate, phonemize, PhonemeTrack, Segment};
use crate::Resources;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub plan: PlanConfig,
    pub delta: f64,
    pub lambda: f64,
    pub smooth_threshold: f64,
    pub fps: u32,
    /// Seconds without input before the face goes neutral.
    pub idle_s: f64,
    pub frame_mode: FrameMode,
    /// Send the mesh and muscles with `sessionStart`.
    pub send_mesh: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            plan: PlanConfig::default(),
            delta: DEFAULT_DELTA,
            lambda: DEFAULT_LAMBDA,
            smooth_threshold: DEFAULT_SMOOTH_THRESHOLD,
            fps: 25,
            idle_s: 8.0,
            frame_mode: FrameMode::Params,
            send_mesh: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cue {
    Targets(ParameterVector),
    Speech(PhonemeTrack),
}

/// One dialogue with one user: the turn pipeline, the animated face and the log.
pub struct Session {
    res: Arc<Resources>,
    cfg: SessionConfig,
    clock: Arc<dyn Clock>,
    id: String,
    state: DialogueState,
    anim: AnimState,
    cues: VecDeque<(f64, Cue)>,
    out: Sequencer,
    last_in: u64,
    log: SessionLog,
    turns: u32,
    started: f64,
    quiet_since: f64,
    idle_sent: bool,
    ended: bool,
}

pub struct TurnOutput {
    pub messages: Vec<ProtocolMessage>,
    pub record: TurnRecord,
}

impl Session {
    pub fn new(res: Arc<Resources>, cfg: SessionConfig, clock: Arc<dyn Clock>, id: impl Into<String>) -> Self {
        let started = clock.now();
        Session {
            state: DialogueState::new(&res.kb),
            res,
            cfg,
            clock,
            id: id.into(),
            anim: AnimState::default(),
            cues: VecDeque::new(),
            out: Sequencer::default(),
            last_in: 0,
            log: SessionLog::default(),
            turns: 0,
            started,
            quiet_since: 0.0,
            idle_sent: false,
            ended: false,
        }
    }

    /// Seconds since the session started.
    pub fn elapsed(&self) -> f64 {
        self.clock.now() - self.started
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn state(&self) -> &DialogueState {
        &self.state
    }

    pub fn anim(&self) -> &AnimState {
        &self.anim
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn set_frame_mode(&mut self, mode: FrameMode) {
        self.cfg.frame_mode = mode;
    }

    pub fn is_ended(&self) -> bool {
        self.ended
    }

    fn wrap(&mut self, payload: Payload) -> ProtocolMessage {
        self.out.wrap(payload)
    }

    pub fn start(&mut self) -> Vec<ProtocolMessage> {
        let mesh = self.cfg.send_mesh.then(|| Box::new(self.res.mesh.clone()));
        let payload = Payload::SessionStart {
            session: self.id.clone(),
            frame_mode: self.cfg.frame_mode,
            fps: self.cfg.fps,
            mesh,
        };
        vec![self.wrap(payload)]
    }

    /// Run one user turn through recognition, analysis, plan recognition,
    /// response generation and display selection.
    pub fn run_turn(&mut self, input: &NBestInput) -> TurnOutput {
        let now = self.elapsed();
        self.quiet_since = now;
        self.idle_sent = false;
        self.turns += 1;
        // A new turn supersedes whatever the previous one still had queued.
        self.cues.retain(|(at, _)| *at <= now);
        let user = input
            .hypotheses()
            .first()
            .map(|h| h.text.clone())
            .unwrap_or_default();
        let (outcome, intention, mut segments, topic_event) = self.understand(input);
        let first_turn = self.turns == 1;
        if let Some(first) = segments.first_mut() {
            if first_turn {
                first.situations.insert(0, Situation::BeginningOfDialogue);
            }
        }
        let mut shift_pending = topic_event == Some(TopicEvent::Shifted);
        for seg in &mut segments {
            if seg.topic {
                let s = if std::mem::take(&mut shift_pending) {
                    Situation::TopicShift
                } else {
                    Situation::IntroductionToTopic
                };
                seg.situations.push(s);
            }
        }
        let out_of_domain = segments
            .iter()
            .any(|s| s.situations.contains(&Situation::OutOfDomain));
        let topic = intention.as_ref().filter(|_| !out_of_domain).and_then(|i| {
            let object = i.object.clone()?;
            self.res.kb.product(&object)?;
            let attr = match i.act {
                Act::GetInfo => "overview".to_string(),
                _ => i.attribute.clone()?,
            };
            Some((object, attr))
        });

        let mut messages = Vec::new();
        let mut records = Vec::new();
        let mut at = now;
        for (n, seg) in segments.iter().enumerate() {
            let displays = segment_displays(seg);
            for s in &seg.situations {
                messages.push(self.wrap(Payload::Situation { situation: *s }));
            }
            if !displays.is_empty() {
                let mut step_at = at;
                for req in self.res.displays.compose(&displays) {
                    self.schedule(step_at, Cue::Targets(req.params));
                    step_at += req.hold_ms as f64 / 1000.0;
                    messages.push(self.wrap(Payload::DisplayRequest {
                        displays: req.displays,
                        params: req.params,
                        hold_ms: req.hold_ms,
                    }));
                }
            }
            let note = annotation(&displays);
            messages.push(self.wrap(Payload::Response {
                turn: self.turns,
                segment: n as u32 + 1,
                text: seg.text.clone(),
                annotation: note,
            }));
            let track = phonemize(&seg.text, &self.res.phonemes);
            self.schedule(at, Cue::Speech(track.clone()));
            at += track.total_ms() as f64 / 1000.0;
            messages.push(self.wrap(Payload::Lipsync { track }));
            records.push(SegmentRecord {
                text: seg.text.clone(),
                situations: seg.situations.clone(),
                displays,
            });
        }
        // The idle clock starts once the face has finished speaking.
        self.quiet_since = at;
        let record = TurnRecord {
            at_s: now,
            user,
            outcome: outcome.to_string(),
            intention,
            segments: records,
            topic,
        };
        self.log.push(LogRecord::Turn(record.clone()));
        TurnOutput { messages, record }
    }

    #[allow(clippy::type_complexity)]
    fn understand(
        &mut self,
        input: &NBestInput,
    ) -> (&'static str, Option<crate::plan::Intention>, Vec<Segment>, Option<TopicEvent>) {
        let res = Arc::clone(&self.res);
        let parser = res.parser();
        let templates = &res.templates;
        let recognized = classify_input(input, self.cfg.delta, &parser);
        let Some(best) = recognized.best else {
            return ("recognitionFailure", None, tagged(templates.pardon(), Situation::RecognitionFailure), None);
        };
        let close = recognized.kind == RecognitionKind::CloseScores;
        let parsed = parser.parse(&tokenize(&best));
        let candidates = match analyze(&parsed.trees, &res.grammar, &res.kb, parsed.skipped.len()) {
            Ok(c) => c,
            Err(_) => {
                return ("syntacticallyInvalid", None, tagged(templates.pardon(), Situation::SyntacticallyInvalid), None)
            }
        };
        let chosen = disambiguate(candidates, &res.constraints, self.state.pcs_context())
            .expect("analysis yields at least one candidate");
        let mut frame = chosen.frame;
        frame.utterance = self.turns;
        let (kind, intention, mut segments, event) =
            match interpret(&mut self.state, &frame, &res.kb, &self.cfg.plan) {
                PlanOutcome::Social(i, event) => ("social", Some(i.clone()), generate(&i, &res.kb, templates), event),
                PlanOutcome::Committed { intention, topic } => {
                    let segs = generate(&intention, &res.kb, templates);
                    ("committed", Some(intention), segs, topic)
                }
                PlanOutcome::Clarify(c) => ("clarification", None, clarify(&c, &res.kb, templates), None),
                PlanOutcome::NoContext => ("outOfDomain", None, templates.out_of_domain(), None),
                PlanOutcome::NoEvidence => (
                    "noEvidence",
                    None,
                    tagged(templates.pardon(), Situation::SyntacticallyInvalid),
                    None,
                ),
            };
        if close {
            if let Some(first) = segments.first_mut() {
                first.situations.insert(0, Situation::CloseScores);
            }
        }
        (kind, intention, segments, event)
    }

    /// Advance the face to the current time, emitting one frame per period,
    /// and turn the face neutral after a stretch without input.
    pub fn tick(&mut self) -> Vec<ProtocolMessage> {
        let now = self.elapsed();
        let mut messages = Vec::new();
        if !self.ended && !self.idle_sent && now - self.quiet_since >= self.cfg.idle_s {
            self.idle_sent = true;
            let at = self.quiet_since + self.cfg.idle_s;
            self.log.push(LogRecord::Idle { at_s: at });
            for req in self.res.displays.compose(&[FacialDisplay::Neutral]) {
                self.schedule(at, Cue::Targets(req.params));
                messages.push(self.wrap(Payload::DisplayRequest {
                    displays: req.displays,
                    params: req.params,
                    hold_ms: req.hold_ms,
                }));
            }
        }
        let period = 1.0 / f64::from(self.cfg.fps.max(1));
        while self.anim.time + period <= now + 1e-9 {
            self.apply_cues(self.anim.time);
            self.anim.step(period, &self.res.visemes);
            let frame = render_frame(&self.anim, &self.res.mesh, self.cfg.frame_mode);
            messages.push(self.wrap(Payload::Frame(frame)));
        }
        messages
    }

    /// Queue a cue, keeping the queue in time order.
    fn schedule(&mut self, at: f64, cue: Cue) {
        let i = self.cues.partition_point(|(t, _)| *t <= at);
        self.cues.insert(i, (at, cue));
    }

    fn apply_cues(&mut self, t: f64) {
        while self.cues.front().is_some_and(|(at, _)| *at <= t + 1e-9) {
            let (at, cue) = self.cues.pop_front().expect("checked");
            match cue {
                Cue::Targets(p) => self.anim.a = p,
                Cue::Speech(track) => {
                    self.anim.start_lipsync(track);
                    if let Some(lip) = &mut self.anim.lip {
                        lip.start = at.max(0.0);
                    }
                }
            }
        }
    }

    pub fn score(&self) -> (f64, Classification) {
        let score = score_session(&self.log, self.cfg.lambda);
        (score, classify(&self.log.histogram(), score, self.cfg.smooth_threshold))
    }

    pub fn end(&mut self, reason: &str) -> Vec<ProtocolMessage> {
        if self.ended {
            return Vec::new();
        }
        self.ended = true;
        let elapsed = self.elapsed();
        self.log.push(LogRecord::End { elapsed_s: elapsed });
        let (score, classification) = self.score();
        let metrics = Payload::Metrics {
            topics: self.log.topics_visited().len() as u32,
            elapsed_s: self.log.elapsed_s,
            score,
            classification,
            histogram: self.log.histogram(),
        };
        vec![
            self.wrap(metrics),
            self.wrap(Payload::SessionEnd {
                reason: reason.to_string(),
            }),
        ]
    }

    /// Handle one inbound line. Bad input yields an error message and
    /// leaves the session running.
    pub fn handle_line(&mut self, line: &str) -> Vec<ProtocolMessage> {
        let msg = match decode(line) {
            Ok(m) => m,
            Err(e) => return vec![self.wrap(e.to_payload())],
        };
        if msg.seq <= self.last_in {
            let payload = Payload::Error {
                message: format!("sequence number {} does not follow {}", msg.seq, self.last_in),
                offending_seq: Some(msg.seq),
            };
            return vec![self.wrap(payload)];
        }
        self.last_in = msg.seq;
        match msg.payload {
            Payload::Utterance { text } => self.run_turn(&NBestInput::single(text)).messages,
            Payload::Nbest { hypotheses } => self.run_turn(&hypotheses).messages,
            Payload::SessionStart { frame_mode, .. } => {
                self.cfg.frame_mode = frame_mode;
                Vec::new()
            }
            Payload::SessionEnd { .. } => self.end("client closed"),
            other => {
                let payload = Payload::Error {
                    message: format!("clients may not send `{}`", other.kind()),
                    offending_seq: Some(msg.seq),
                };
                vec![self.wrap(payload)]
            }
        }
    }
}

fn tagged(mut segments: Vec<Segment>, situation: Situation) -> Vec<Segment> {
    if let Some(first) = segments.first_mut() {
        first.situations.insert(0, situation);
    }
    segments
}

/// Displays for a segment's situations, in order, without repeats.
pub fn segment_displays(seg: &Segment) -> Vec<FacialDisplay> {
    let mut out: Vec<FacialDisplay> = Vec::new();
    let mut extra = seg.emphasis.then_some(FacialDisplay::Emphasizer);
    for s in &seg.situations {
        for d in displays_for(*s) {
            if !out.contains(&d) {
                out.push(d);
            }
        }
    }
    if let Some(e) = extra.take() {
        if !out.contains(&e) {
            out.push(e);
        }
    }
    out
}

/// A replayed session.
pub struct Replay {
    pub log: SessionLog,
    pub messages: Vec<ProtocolMessage>,
    pub score: f64,
    pub classification: Classification,
}

impl Replay {
    /// `U1: text` for user turns and `S1: [annotation] text` per system segment.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        let mut s = 0;
        for (u, turn) in self.log.turns.iter().enumerate() {
            let _ = writeln!(out, "U{}: {}", u + 1, turn.user);
            for seg in &turn.segments {
                s += 1;
                let _ = writeln!(out, "S{s}: {} {}", annotation(&seg.displays), seg.text);
            }
        }
        out
    }

    /// Annotation of every system segment, in order.
    pub fn annotations(&self) -> Vec<String> {
        self.log
            .turns
            .iter()
            .flat_map(|t| &t.segments)
            .map(|s| annotation(&s.displays))
            .collect()
    }
}

/// Seconds a replayed user takes to speak before each turn.
const USER_TURN_S: f64 = 2.0;

/// Run a replay script on a simulated clock.
pub fn replay(res: Arc<Resources>, cfg: SessionConfig, script: &str) -> Result<Replay, ScriptError> {
    let steps = parse_script(script)?;
    let clock = SimClock::new();
    let mut session = Session::new(res, cfg, Arc::new(clock.clone()), "replay");
    let mut messages = session.start();
    for step in steps {
        match step {
            ScriptStep::Say(input) => {
                clock.advance(USER_TURN_S);
                messages.extend(session.tick());
                let out = session.run_turn(&input);
                messages.extend(out.messages);
                let speech: u64 = out
                    .record
                    .segments
                    .iter()
                    .map(|s| phonemize(&s.text, &session.res.phonemes).total_ms())
                    .sum();
                clock.advance(speech as f64 / 1000.0);
                messages.extend(session.tick());
            }
            ScriptStep::Wait(secs) => {
                clock.advance(secs);
                messages.extend(session.tick());
            }
        }
    }
    messages.extend(session.end("script finished"));
    let (score, classification) = session.score();
    Ok(Replay {
        log: session.log.clone(),
        messages,
        score,
        classification,
    })
}
