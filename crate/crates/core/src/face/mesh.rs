use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::muscle::{Muscle, MuscleKind, Vec3};
use super::params::MUSCLE_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Skin,
    Brow,
    Eyelid,
    Mouth,
    Jaw,
    Eyeball,
}

/// Fixed points the pose parameters rotate about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub mouth_centre: Vec3,
    pub jaw_pivot: Vec3,
    pub head_pivot: Vec3,
    /// Left then right.
    pub eye_centres: [Vec3; 2],
    /// Distance a fully closed eyelid travels down.
    pub lid_travel: f64,
    /// Distance the lower lip drops at full mouth opening.
    pub mouth_travel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceMesh {
    pub vertices: Vec<Vec3>,
    pub polygons: Vec<Vec<usize>>,
    /// One tag per vertex.
    pub regions: Vec<Region>,
    pub muscles: Vec<Muscle>,
    pub landmarks: Landmarks,
}

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("mesh file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("polygon {0} refers to a missing vertex")]
    BadIndex(usize),
    #[error("{0} region tags for {1} vertices")]
    RegionCount(usize, usize),
    #[error("expected {MUSCLE_COUNT} muscles, got {0}")]
    MuscleCount(usize),
    #[error("muscle {0} has invalid geometry")]
    BadMuscle(usize),
}

impl FaceMesh {
    pub fn from_json(text: &str) -> Result<Self, MeshError> {
        let mesh: FaceMesh = serde_json::from_str(text)?;
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mesh serializes")
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        let n = self.vertices.len();
        if let Some(i) = self.polygons.iter().position(|p| p.len() < 3 || p.iter().any(|&v| v >= n)) {
            return Err(MeshError::BadIndex(i));
        }
        if self.regions.len() != n {
            return Err(MeshError::RegionCount(self.regions.len(), n));
        }
        if self.muscles.len() != MUSCLE_COUNT {
            return Err(MeshError::MuscleCount(self.muscles.len()));
        }
        if let Some(m) = self.muscles.iter().find(|m| !m.is_valid()) {
            return Err(MeshError::BadMuscle(m.id));
        }
        Ok(())
    }

    /// 0 for the left eye (positive x), 1 for the right.
    pub fn side(v: Vec3) -> usize {
        usize::from(v[0] < 0.0)
    }

    /// Build the stylized face: a curved 20 x 20 quad sheet with two eyeballs.
    /// Units are roughly centimetres; x to the face's left, y up, z forward.
    pub fn generate() -> FaceMesh {
        const N: usize = 20;
        let mut vertices = Vec::new();
        let mut regions = Vec::new();
        let mut polygons = Vec::new();
        for j in 0..=N {
            for i in 0..=N {
                let x = -8.0 + 16.0 * i as f64 / N as f64;
                let y = -11.0 + 22.0 * j as f64 / N as f64;
                vertices.push([x, y, surface(x, y)]);
                regions.push(region_at(x, y));
            }
        }
        for j in 0..N {
            for i in 0..N {
                let a = j * (N + 1) + i;
                polygons.push(vec![a, a + 1, a + N + 2, a + N + 1]);
            }
        }
        let eye_centres = [3.2, -3.2].map(|x| [x, 2.2, surface(x, 2.2) - 0.7]);
        for centre in eye_centres {
            add_eyeball(centre, 1.2, &mut vertices, &mut regions, &mut polygons);
        }
        FaceMesh {
            vertices,
            polygons,
            regions,
            muscles: muscles(),
            landmarks: Landmarks {
                mouth_centre: [0.0, -5.0, surface(0.0, -5.0)],
                jaw_pivot: [0.0, -1.0, -4.0],
                head_pivot: [0.0, -6.0, -6.0],
                eye_centres,
                lid_travel: 1.2,
                mouth_travel: 1.4,
            },
        }
    }
}

/// Depth of the face sheet: a half ellipsoid with a nose ridge.
fn surface(x: f64, y: f64) -> f64 {
    let shell = 6.0 * (1.0 - (x / 9.0).powi(2) - (y / 12.5).powi(2)).max(0.0).sqrt();
    let nose = 1.6 * (-(x / 0.9).powi(2) - ((y + 0.5) / 2.2).powi(2)).exp();
    shell + nose
}

fn region_at(x: f64, y: f64) -> Region {
    let ax = x.abs();
    if (3.8..=6.2).contains(&y) && (0.4..=6.0).contains(&ax) {
        Region::Brow
    } else if (2.8..=3.8).contains(&y) && (1.5..=5.0).contains(&ax) {
        Region::Eyelid
    } else if (-6.2..=-3.8).contains(&y) && ax <= 3.6 {
        Region::Mouth
    } else if y < -6.2 && ax <= 5.0 {
        Region::Jaw
    } else {
        Region::Skin
    }
}

fn add_eyeball(c: Vec3, r: f64, vertices: &mut Vec<Vec3>, regions: &mut Vec<Region>, polygons: &mut Vec<Vec<usize>>) {
    const RINGS: usize = 5;
    const SEGMENTS: usize = 8;
    let base = vertices.len();
    vertices.push([c[0], c[1] + r, c[2]]);
    for k in 1..=RINGS {
        let theta = PI * k as f64 / (RINGS + 1) as f64;
        for s in 0..SEGMENTS {
            let phi = 2.0 * PI * s as f64 / SEGMENTS as f64;
            vertices.push([
                c[0] + r * theta.sin() * phi.sin(),
                c[1] + r * theta.cos(),
                c[2] + r * theta.sin() * phi.cos(),
            ]);
        }
    }
    vertices.push([c[0], c[1] - r, c[2]]);
    let bottom = base + 1 + RINGS * SEGMENTS;
    regions.extend(std::iter::repeat_n(Region::Eyeball, bottom - base + 1));
    let ring = |k: usize, s: usize| base + 1 + k * SEGMENTS + s % SEGMENTS;
    for s in 0..SEGMENTS {
        polygons.push(vec![base, ring(0, s), ring(0, s + 1)]);
        polygons.push(vec![bottom, ring(RINGS - 1, s + 1), ring(RINGS - 1, s)]);
    }
    for k in 0..RINGS - 1 {
        for s in 0..SEGMENTS {
            polygons.push(vec![ring(k, s), ring(k + 1, s), ring(k + 1, s + 1), ring(k, s + 1)]);
        }
    }
}

type MusclePair = (&'static str, (f64, f64), (f64, f64), f64, f64, f64);

/// Seven left/right pairs, the chin raiser and the lip sphincter.
fn muscles() -> Vec<Muscle> {
    let sunk = |x: f64, y: f64| [x, y, surface(x, y) - 0.6];
    let on = |x: f64, y: f64| [x, y, surface(x, y)];
    // name, head (x, y), tail (x, y), omega, rs, rf
    // Cones and start radii are wide enough (omega * rs > pi^2 / 4) that no
    // falloff edge is steeper than one unit of displacement per unit of distance.
    let pairs: [MusclePair; 7] = [
        ("inner_frontalis", (1.5, 10.5), (1.5, 5.0), FRAC_PI_4, 4.0, 9.0),
        ("outer_frontalis", (4.5, 10.5), (5.0, 5.0), FRAC_PI_4, 4.0, 9.0),
        ("corrugator", (0.5, 3.2), (3.5, 5.0), FRAC_PI_3, 3.0, 5.5),
        ("levator_labii", (2.0, 1.2), (1.8, -3.8), FRAC_PI_4, 4.0, 7.0),
        ("zygomatic_major", (6.5, 0.5), (2.8, -5.0), FRAC_PI_4, 4.0, 8.0),
        ("depressor_anguli", (4.0, -10.0), (2.8, -5.2), FRAC_PI_4, 4.0, 7.0),
        ("risorius", (7.5, -5.5), (3.0, -5.0), FRAC_PI_4, 4.0, 7.0),
    ];
    let mut out = Vec::new();
    for (name, (hx, hy), (tx, ty), omega, rs, rf) in pairs {
        for (side, sign) in [("l", 1.0), ("r", -1.0)] {
            out.push(Muscle {
                id: out.len() + 1,
                name: format!("{name}_{side}"),
                kind: MuscleKind::Linear,
                head: sunk(sign * hx, hy),
                tail: on(sign * tx, ty),
                omega,
                rs,
                rf,
            });
        }
    }
    out.push(Muscle {
        id: 15,
        name: "mentalis".into(),
        kind: MuscleKind::Linear,
        head: sunk(0.0, -10.0),
        tail: on(0.0, -6.5),
        omega: FRAC_PI_3,
        rs: 3.0,
        rf: 5.5,
    });
    out.push(Muscle {
        id: 16,
        name: "orbicularis_oris".into(),
        kind: MuscleKind::Sphincter,
        head: on(0.0, -5.0),
        tail: on(0.0, -5.0),
        omega: FRAC_PI_2,
        rs: 1.8,
        rf: 3.5,
    });
    out
}
