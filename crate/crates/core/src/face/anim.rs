use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::deform::deform;
use super::mesh::FaceMesh;
use super::muscle::Vec3;
use super::params::{ParamError, ParameterVector, JAW_ROTATION, MOUTH_OPEN, PARAM_COUNT};
use crate::respond::PhonemeTrack;

/// Mouth opening and jaw rotation per phoneme.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VisemeTable(BTreeMap<String, (f64, f64)>);

impl VisemeTable {
    /// One `PHONEME opening jaw` line each; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let [ph, open, jaw] = cols[..] else {
                return Err(format!("visemes line {}: expected `PHONEME opening jaw`", n + 1));
            };
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| format!("visemes line {}: bad number `{s}`", n + 1))
            };
            map.insert(ph.to_string(), (num(open)?, num(jaw)?));
        }
        Ok(VisemeTable(map))
    }

    /// Unknown phonemes and silence keep the mouth closed.
    pub fn get(&self, phoneme: &str) -> (f64, f64) {
        self.0.get(phoneme).copied().unwrap_or((0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Mouth and jaw targets `t_ms` after the track started.
pub fn lipsync_at(track: &PhonemeTrack, t_ms: f64, visemes: &VisemeTable) -> (f64, f64) {
    let mut end = 0.0;
    for (ph, dur) in &track.0 {
        end += *dur as f64;
        if t_ms < end {
            return visemes.get(ph);
        }
    }
    (0.0, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipSync {
    pub track: PhonemeTrack,
    /// Animation time the track started, in seconds.
    pub start: f64,
}

/// Current parameters, their targets, and an optional speech override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimState {
    pub f: ParameterVector,
    pub a: ParameterVector,
    pub lip: Option<LipSync>,
    /// Animation time in seconds.
    pub time: f64,
}

impl Default for AnimState {
    fn default() -> Self {
        AnimState {
            f: ParameterVector::ZERO,
            a: ParameterVector::ZERO,
            lip: None,
            time: 0.0,
        }
    }
}

impl AnimState {
    /// Replace every target at once. Current values are left alone.
    pub fn set_targets(&mut self, request: &[f64]) -> Result<(), ParamError> {
        self.a = ParameterVector::from_slice(request)?.clamped();
        Ok(())
    }

    pub fn start_lipsync(&mut self, track: PhonemeTrack) {
        self.lip = Some(LipSync {
            track,
            start: self.time,
        });
    }

    /// Targets in force now: display targets with mouth and jaw taken from
    /// the speech track while it plays.
    pub fn effective_targets(&self, visemes: &VisemeTable) -> ParameterVector {
        let mut a = self.a;
        if let Some(lip) = &self.lip {
            let t_ms = (self.time - lip.start) * 1000.0;
            if t_ms < lip.track.total_ms() as f64 {
                let (open, jaw) = lipsync_at(&lip.track, t_ms, visemes);
                a[MOUTH_OPEN] = open;
                a[JAW_ROTATION] = jaw;
            }
        }
        a
    }

    /// Advance by `dt` seconds along f' = a - f, solved exactly.
    pub fn step(&mut self, dt: f64, visemes: &VisemeTable) {
        debug_assert!(dt > 0.0);
        let a = self.effective_targets(visemes);
        self.f = integrate(&self.f, &a, dt);
        self.time += dt;
        if let Some(lip) = &self.lip {
            if (self.time - lip.start) * 1000.0 >= lip.track.total_ms() as f64 {
                self.lip = None;
            }
        }
    }
}

/// Closed-form solution of f' = a - f after `dt` seconds.
pub fn integrate(f: &ParameterVector, a: &ParameterVector, dt: f64) -> ParameterVector {
    let decay = (-dt).exp();
    let mut out = [0.0; PARAM_COUNT];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i] + (f[i] - a[i]) * decay;
    }
    ParameterVector(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FrameMode {
    #[default]
    Params,
    Vertices,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Frame {
    pub t_ms: u64,
    pub params: ParameterVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec3>>,
}

pub fn render_frame(state: &AnimState, mesh: &FaceMesh, mode: FrameMode) -> Frame {
    Frame {
        t_ms: (state.time * 1000.0).round() as u64,
        params: state.f,
        vertices: match mode {
            FrameMode::Params => None,
            FrameMode::Vertices => Some(deform(mesh, &state.f)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn visemes() -> VisemeTable {
        VisemeTable::parse("AA 0.8 0.2\nM 0 0\n").unwrap()
    }

    #[test]
    fn unit_step_response() {
        let mut one = ParameterVector::ZERO;
        one.0 = [1.0; PARAM_COUNT];
        let f = integrate(&ParameterVector::ZERO, &one, 1.0);
        assert!((f[0] - 0.6321205588285577).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_and_semigroup() {
        let mut p = ParameterVector::ZERO;
        p[3] = 0.4;
        assert_eq!(integrate(&p, &p, 3.0), p);
        let a = ParameterVector([0.7; PARAM_COUNT]);
        let once = integrate(&p, &a, 0.3);
        let twice = integrate(&integrate(&p, &a, 0.15), &a, 0.15);
        for i in 0..PARAM_COUNT {
            assert!((once[i] - twice[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn lipsync_lookup() {
        let track = PhonemeTrack(vec![("AA".into(), 80)]);
        assert_eq!(lipsync_at(&track, 40.0, &visemes()), (0.8, 0.2));
        assert_eq!(lipsync_at(&track, 80.0, &visemes()), (0.0, 0.0));
        let sil = PhonemeTrack(vec![("SIL".into(), 120)]);
        assert_eq!(lipsync_at(&sil, 60.0, &visemes()), (0.0, 0.0));
    }

    #[test]
    fn lipsync_overrides_only_mouth_and_jaw() {
        let mut st = AnimState::default();
        let mut req = [0.0; PARAM_COUNT];
        req[0] = 0.5;
        req[MOUTH_OPEN] = 0.1;
        st.set_targets(&req).unwrap();
        st.start_lipsync(PhonemeTrack(vec![("AA".into(), 80)]));
        let a = st.effective_targets(&visemes());
        assert_eq!((a[0], a[MOUTH_OPEN], a[JAW_ROTATION]), (0.5, 0.8, 0.2));
        st.step(0.1, &visemes());
        assert!(st.lip.is_none());
        assert_eq!(st.effective_targets(&visemes())[MOUTH_OPEN], 0.1);
    }

    #[test]
    fn set_targets_checks_length_and_keeps_f() {
        let mut st = AnimState::default();
        st.f[2] = 0.3;
        assert!(st.set_targets(&[0.0; 3]).is_err());
        st.set_targets(&[0.2; PARAM_COUNT]).unwrap();
        assert_eq!(st.f[2], 0.3);
        assert_eq!(st.a[0], 0.2);
    }

    #[test]
    fn neutral_frame_is_rest_mesh() {
        let mesh = FaceMesh::generate();
        let st = AnimState::default();
        let frame = render_frame(&st, &mesh, FrameMode::Vertices);
        assert_eq!(frame.vertices.as_ref(), Some(&mesh.vertices));
        assert_eq!(render_frame(&st, &mesh, FrameMode::Vertices), frame);
        assert!(render_frame(&st, &mesh, FrameMode::Params).vertices.is_none());
    }
}
