use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuscleKind {
    Linear,
    Sphincter,
}

/// A muscle pulling skin toward its attachment.
///
/// Linear muscles act inside a cone of half-angle `omega` around the line from
/// `head` (bone attachment) to `tail` (skin insertion). Radial falloff rises
/// from zero at the head to full strength at `rs` and fades to zero at `rf`.
///
/// A sphincter contracts toward `head` inside an ellipse in the face plane
/// with horizontal semi-axis `rf` and vertical semi-axis `rs`. Its pull peaks
/// halfway out and fades to zero, with zero slope, at the centre and the rim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Muscle {
    pub id: usize,
    pub name: String,
    pub kind: MuscleKind,
    pub head: Vec3,
    pub tail: Vec3,
    pub omega: f64,
    pub rs: f64,
    pub rf: f64,
}

impl Muscle {
    pub fn is_valid(&self) -> bool {
        0.0 < self.rs && self.rs < self.rf && 0.0 < self.omega && self.omega <= FRAC_PI_2
    }

    /// Displacement of `vertex` at contraction `c`.
    pub fn displace(&self, vertex: Vec3, c: f64) -> Vec3 {
        if c == 0.0 {
            return [0.0; 3];
        }
        match self.kind {
            MuscleKind::Linear => self.linear(vertex, c),
            MuscleKind::Sphincter => self.sphincter(vertex, c),
        }
    }

    fn linear(&self, vertex: Vec3, c: f64) -> Vec3 {
        let to_vertex = sub(vertex, self.head);
        let d = norm(to_vertex);
        if d == 0.0 || d > self.rf {
            return [0.0; 3];
        }
        let axis = sub(self.tail, self.head);
        let cos_mu = (dot(to_vertex, axis) / (d * norm(axis))).clamp(-1.0, 1.0);
        let mu = cos_mu.acos();
        if mu > self.omega {
            return [0.0; 3];
        }
        let angular = (mu * FRAC_PI_2 / self.omega).cos();
        let radial = if d < self.rs {
            ((1.0 - d / self.rs) * FRAC_PI_2).cos()
        } else {
            (((d - self.rs) / (self.rf - self.rs)) * FRAC_PI_2).cos()
        };
        scale(to_vertex, -c * angular * radial / d)
    }

    fn sphincter(&self, vertex: Vec3, c: f64) -> Vec3 {
        let dx = vertex[0] - self.head[0];
        let dy = vertex[1] - self.head[1];
        let rho = ((dx / self.rf).powi(2) + (dy / self.rs).powi(2)).sqrt();
        let planar = (dx * dx + dy * dy).sqrt();
        if rho >= 1.0 || planar == 0.0 {
            return [0.0; 3];
        }
        let k = -c * (PI * rho).sin().powi(2) / planar;
        [dx * k, dy * k, 0.0]
    }
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn toy() -> Muscle {
        Muscle {
            id: 1,
            name: "toy".into(),
            kind: MuscleKind::Linear,
            head: [0.0, 0.0, 0.0],
            tail: [0.0, 1.0, 0.0],
            omega: FRAC_PI_4,
            rs: 0.3,
            rf: 1.0,
        }
    }

    #[test]
    fn on_axis_example() {
        let d = toy().displace([0.0, 0.5, 0.0], 0.5);
        // 0.5 * cos((0.2 / 0.7) * pi / 2), evaluated separately.
        let expected = 0.4504844339512096;
        assert!((norm(d) - expected).abs() < 1e-12);
        assert!(d[1] < 0.0 && d[0] == 0.0 && d[2] == 0.0);
    }

    #[test]
    fn zero_outside_cone_and_radius() {
        let m = toy();
        assert_eq!(m.displace([1.0, 0.5, 0.0], 1.0), [0.0; 3]);
        assert_eq!(m.displace([0.0, 1.2, 0.0], 1.0), [0.0; 3]);
        assert_eq!(m.displace([0.0, 0.5, 0.0], 0.0), [0.0; 3]);
        assert_eq!(m.displace([0.0, 0.0, 0.0], 1.0), [0.0; 3]);
    }

    #[test]
    fn bounded_by_contraction() {
        let m = toy();
        for i in 0..=100 {
            let p = [0.003 * i as f64, 0.01 * i as f64, 0.0];
            assert!(norm(m.displace(p, 0.7)) <= 0.7 + 1e-12);
        }
    }

    #[test]
    fn sphincter_pulls_inward() {
        let m = Muscle {
            kind: MuscleKind::Sphincter,
            omega: FRAC_PI_2,
            rs: 1.0,
            rf: 2.0,
            ..toy()
        };
        let d = m.displace([1.0, 0.0, 0.3], 1.0);
        assert!(d[0] < 0.0 && d[1] == 0.0 && d[2] == 0.0);
        assert!((d[0] + 1.0).abs() < 1e-12, "full pull at half radius");
        assert_eq!(m.displace([0.0, 1.5, 0.0], 1.0), [0.0; 3]);
        assert_eq!(m.displace(m.head, 1.0), [0.0; 3]);
    }
}
