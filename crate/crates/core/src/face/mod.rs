//! Muscle-driven face: parameter vector, mesh, deformation and the
//! first-order display dynamics.

mod anim;
mod deform;
mod mesh;
mod muscle;
mod params;

pub use anim::{integrate, lipsync_at, render_frame, AnimState, Frame, FrameMode, LipSync, VisemeTable};
#[cfg(feature = "parallel")]
pub use deform::deform_parallel;
pub use deform::{deform, deform_sequential, deform_vertex};
pub use mesh::{FaceMesh, Landmarks, MeshError, Region};
pub use muscle::{Muscle, MuscleKind, Vec3};
pub use params::*;
