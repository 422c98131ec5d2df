#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::mesh::{FaceMesh, Region};
use super::muscle::{add, sub, Vec3};
use super::params::*;

/// Deformed vertex positions for `params`. Uses all cores when the
/// `parallel` feature is on.
pub fn deform(mesh: &FaceMesh, params: &ParameterVector) -> Vec<Vec3> {
    #[cfg(feature = "parallel")]
    {
        deform_parallel(mesh, params)
    }
    #[cfg(not(feature = "parallel"))]
    {
        deform_sequential(mesh, params)
    }
}

pub fn deform_sequential(mesh: &FaceMesh, params: &ParameterVector) -> Vec<Vec3> {
    (0..mesh.vertices.len()).map(|i| deform_vertex(mesh, params, i)).collect()
}

#[cfg(feature = "parallel")]
pub fn deform_parallel(mesh: &FaceMesh, params: &ParameterVector) -> Vec<Vec3> {
    (0..mesh.vertices.len())
        .into_par_iter()
        .with_min_len(64)
        .map(|i| deform_vertex(mesh, params, i))
        .collect()
}

/// Muscles first, then jaw, mouth, eyes and lids, then the whole head.
/// Parameters at zero are skipped so the rest pose comes back bit for bit.
pub fn deform_vertex(mesh: &FaceMesh, p: &ParameterVector, i: usize) -> Vec3 {
    let rest = mesh.vertices[i];
    let region = mesh.regions[i];
    let lm = &mesh.landmarks;
    let mut v = rest;

    if region != Region::Eyeball {
        for (m, &c) in mesh.muscles.iter().zip(p.muscles()) {
            if c != 0.0 {
                v = add(v, m.displace(rest, c));
            }
        }
    }

    let below_mouth = rest[1] < lm.mouth_centre[1];
    let lower_face = region == Region::Jaw || (region == Region::Mouth && below_mouth);
    if region == Region::Mouth && p[MOUTH_OPEN] != 0.0 {
        let lift = if below_mouth { -1.0 } else { 0.25 };
        v[1] += lift * lm.mouth_travel * p[MOUTH_OPEN];
    }
    if lower_face && p[JAW_ROTATION] != 0.0 {
        v = rotate_x(v, lm.jaw_pivot, p[JAW_ROTATION]);
    }

    if region == Region::Eyeball {
        let centre = lm.eye_centres[FaceMesh::side(rest)];
        if p[EYE_PITCH] != 0.0 {
            v = rotate_x(v, centre, -p[EYE_PITCH]);
        }
        if p[EYE_YAW] != 0.0 {
            v = rotate_y(v, centre, p[EYE_YAW]);
        }
    }
    if region == Region::Eyelid {
        let lid = if FaceMesh::side(rest) == 0 { EYELID_L } else { EYELID_R };
        if p[lid] != 0.0 {
            v[1] -= lm.lid_travel * p[lid];
        }
    }

    let pivot = lm.head_pivot;
    if p[HEAD_ROLL] != 0.0 {
        v = rotate_z(v, pivot, p[HEAD_ROLL]);
    }
    if p[HEAD_PITCH] != 0.0 {
        v = rotate_x(v, pivot, p[HEAD_PITCH]);
    }
    if p[HEAD_YAW] != 0.0 {
        v = rotate_y(v, pivot, p[HEAD_YAW]);
    }
    if p[HEAD_APPROACH] != 0.0 {
        v[2] += p[HEAD_APPROACH];
    }
    v
}

/// Positive angle tips the front of the face down.
fn rotate_x(v: Vec3, pivot: Vec3, angle: f64) -> Vec3 {
    let [x, y, z] = sub(v, pivot);
    let (s, c) = angle.sin_cos();
    add([x, y * c - z * s, y * s + z * c], pivot)
}

/// Positive angle turns the face toward its left.
fn rotate_y(v: Vec3, pivot: Vec3, angle: f64) -> Vec3 {
    let [x, y, z] = sub(v, pivot);
    let (s, c) = angle.sin_cos();
    add([x * c + z * s, y, -x * s + z * c], pivot)
}

fn rotate_z(v: Vec3, pivot: Vec3, angle: f64) -> Vec3 {
    let [x, y, z] = sub(v, pivot);
    let (s, c) = angle.sin_cos();
    add([x * c - y * s, x * s + y * c, z], pivot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::face::muscle::norm;

    #[test]
    fn zero_is_identity() {
        let mesh = FaceMesh::generate();
        assert_eq!(deform(&mesh, &ParameterVector::ZERO), mesh.vertices);
    }

    #[test]
    fn head_yaw_is_rigid() {
        let mesh = FaceMesh::generate();
        let mut p = ParameterVector::ZERO;
        p[HEAD_YAW] = 0.4;
        let out = deform(&mesh, &p);
        for (a, b) in [(0, 200), (17, 440), (300, 460)] {
            let before = norm(sub(mesh.vertices[a], mesh.vertices[b]));
            let after = norm(sub(out[a], out[b]));
            assert!((before - after).abs() < 1e-9);
        }
    }

    #[test]
    fn eyelid_closes_downward_on_its_side_only() {
        let mesh = FaceMesh::generate();
        let mut p = ParameterVector::ZERO;
        p[EYELID_L] = 1.0;
        let out = deform(&mesh, &p);
        for (i, r) in mesh.regions.iter().enumerate() {
            let moved = out[i] != mesh.vertices[i];
            let expect = *r == Region::Eyelid && mesh.vertices[i][0] > 0.0;
            assert_eq!(moved, expect, "vertex {i}");
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let mesh = FaceMesh::generate();
        let mut p = ParameterVector::ZERO;
        for (i, v) in p.0.iter_mut().enumerate() {
            *v = ParameterVector::range(i).1 * 0.5;
        }
        let seq = deform_sequential(&mesh, &p);
        assert_eq!(deform(&mesh, &p), seq);
    }

    #[test]
    fn smile_raises_mouth_corners() {
        let mesh = FaceMesh::generate();
        let mut p = ParameterVector::ZERO;
        p[8] = 1.0;
        p[9] = 1.0;
        let out = deform(&mesh, &p);
        let corner = mesh
            .vertices
            .iter()
            .position(|v| (v[0] - 2.4).abs() < 1e-9 && (v[1] + 5.5).abs() < 1e-9)
            .unwrap();
        assert!(out[corner][1] > mesh.vertices[corner][1]);
    }
}
