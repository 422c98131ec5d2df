use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

pub const MUSCLE_COUNT: usize = 16;
pub const PARAM_COUNT: usize = 26;

/// Parameter names in vector order: 16 muscle contractions, then pose.
pub const PARAM_NAMES: [&str; PARAM_COUNT] = [
    "inner_frontalis_l",
    "inner_frontalis_r",
    "outer_frontalis_l",
    "outer_frontalis_r",
    "corrugator_l",
    "corrugator_r",
    "levator_labii_l",
    "levator_labii_r",
    "zygomatic_major_l",
    "zygomatic_major_r",
    "depressor_anguli_l",
    "depressor_anguli_r",
    "risorius_l",
    "risorius_r",
    "mentalis",
    "orbicularis_oris",
    "mouth_open",
    "jaw_rotation",
    "eye_yaw",
    "eye_pitch",
    "eyelid_l",
    "eyelid_r",
    "head_yaw",
    "head_pitch",
    "head_roll",
    "head_approach",
];

pub const MOUTH_OPEN: usize = 16;
pub const JAW_ROTATION: usize = 17;
pub const EYE_YAW: usize = 18;
pub const EYE_PITCH: usize = 19;
pub const EYELID_L: usize = 20;
pub const EYELID_R: usize = 21;
pub const HEAD_YAW: usize = 22;
pub const HEAD_PITCH: usize = 23;
pub const HEAD_ROLL: usize = 24;
pub const HEAD_APPROACH: usize = 25;

/// Allowed range of each pose parameter, in vector order from `MOUTH_OPEN`.
/// Angles are radians, closures are fractions, approach is model units.
pub const POSE_RANGES: [(f64, f64); PARAM_COUNT - MUSCLE_COUNT] = [
    (0.0, 1.0),
    (0.0, 0.35),
    (-0.6, 0.6),
    (-0.4, 0.4),
    (0.0, 1.0),
    (0.0, 1.0),
    (-0.8, 0.8),
    (-0.6, 0.6),
    (-0.5, 0.5),
    (-10.0, 10.0),
];

/// One value per face parameter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub [f64; PARAM_COUNT]);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("expected {PARAM_COUNT} parameters, got {0}")]
    Length(usize),
    #[error("unknown parameter `{0}`")]
    UnknownName(String),
    #[error("parameter {0} is not finite")]
    NotFinite(usize),
}

impl ParameterVector {
    pub const ZERO: ParameterVector = ParameterVector([0.0; PARAM_COUNT]);

    pub fn from_slice(values: &[f64]) -> Result<Self, ParamError> {
        let arr: [f64; PARAM_COUNT] = values.try_into().map_err(|_| ParamError::Length(values.len()))?;
        if let Some(i) = arr.iter().position(|v| !v.is_finite()) {
            return Err(ParamError::NotFinite(i));
        }
        Ok(ParameterVector(arr))
    }

    pub fn index_of(name: &str) -> Option<usize> {
        PARAM_NAMES.iter().position(|n| *n == name)
    }

    /// Muscles into [0, 1], pose parameters into their ranges.
    pub fn clamped(&self) -> Self {
        let mut out = *self;
        for (i, v) in out.0.iter_mut().enumerate() {
            let (lo, hi) = Self::range(i);
            *v = v.clamp(lo, hi);
        }
        out
    }

    pub fn range(i: usize) -> (f64, f64) {
        if i < MUSCLE_COUNT {
            (0.0, 1.0)
        } else {
            POSE_RANGES[i - MUSCLE_COUNT]
        }
    }

    pub fn is_within_range(&self) -> bool {
        self.0.iter().enumerate().all(|(i, v)| {
            let (lo, hi) = Self::range(i);
            (lo..=hi).contains(v)
        })
    }

    pub fn muscles(&self) -> &[f64] {
        &self.0[..MUSCLE_COUNT]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for ParameterVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ParameterVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}
