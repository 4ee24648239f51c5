//! Small linear-algebra layer shared by every module.
//!
//! Poses in this crate are built almost exclusively from quarter-turn
//! rotations and grid translations, so the helpers here construct those
//! matrices from exact integer entries instead of going through `sin`/`cos`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// One of the three principal axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> Vec3 {
        let mut v = Vec3::zeros();
        v[self.index()] = 1.0;
        v
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "X" | "x" => Some(Axis::X),
            "Y" | "y" => Some(Axis::Y),
            "Z" | "z" => Some(Axis::Z),
            _ => None,
        }
    }
}

/// World "up" in LDraw coordinates.
pub fn up() -> Vec3 {
    Vec3::new(0.0, -1.0, 0.0)
}

/// `(cos, sin)` of `quarter_turns * 90°`, exact.
fn quarter_cos_sin(quarter_turns: i32) -> (f64, f64) {
    match quarter_turns.rem_euclid(4) {
        0 => (1.0, 0.0),
        1 => (0.0, 1.0),
        2 => (-1.0, 0.0),
        _ => (0.0, -1.0),
    }
}

/// Right-handed rotation about a principal axis by a multiple of 90°.
pub fn axis_rotation(axis: Axis, quarter_turns: i32) -> Mat3 {
    let (c, s) = quarter_cos_sin(quarter_turns);
    match axis {
        Axis::X => Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        Axis::Y => Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        Axis::Z => Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
    }
}

/// Rotation about an arbitrary unit axis by a multiple of 90°.
///
/// Exact whenever the axis is a signed principal axis.
pub fn quarter_rotation_about(axis: &Vec3, quarter_turns: i32) -> Mat3 {
    let (c, s) = quarter_cos_sin(quarter_turns);
    rodrigues(axis, c, s)
}

/// Rotation about a unit axis by an arbitrary angle in radians.
pub fn rotation_about(axis: &Vec3, radians: f64) -> Mat3 {
    rodrigues(axis, radians.cos(), radians.sin())
}

fn rodrigues(axis: &Vec3, c: f64, s: f64) -> Mat3 {
    let k = axis;
    let cross = Mat3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    let outer = k * k.transpose();
    Mat3::identity() * c + cross * s + outer * (1.0 - c)
}

/// The 24 proper rotations of the cube (signed permutation matrices with
/// determinant +1), in a fixed enumeration order starting with the identity.
pub fn cube_rotations() -> &'static [Mat3] {
    static TABLE: OnceLock<Vec<Mat3>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out = Vec::with_capacity(24);
        for perm in perms {
            for signs in 0..8u32 {
                let mut m = Mat3::zeros();
                for (row, &col) in perm.iter().enumerate() {
                    m[(row, col)] = if signs & (1 << row) != 0 { -1.0 } else { 1.0 };
                }
                if m.determinant() > 0.0 {
                    out.push(m);
                }
            }
        }
        out
    })
}

/// Replace entries within `1e-9` of `0` or `±1` by the exact value.
pub fn snap_entries(m: &Mat3) -> Mat3 {
    m.map(|v| {
        for exact in [0.0, 1.0, -1.0] {
            if (v - exact).abs() < 1e-9 {
                return exact;
            }
        }
        v
    })
}

/// Frobenius norm of `RᵀR - I`.
pub fn orthonormality_error(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).norm()
}

pub fn is_rotation(m: &Mat3, tol: f64) -> bool {
    orthonormality_error(m) <= tol && (m.determinant() - 1.0).abs() <= tol
}

/// Nearest orthogonal matrix (polar factor `U Vᵀ` of the SVD).
pub fn polar_project(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    u * v_t
}

/// Smallest rotation taking unit vector `from` onto unit vector `to`.
///
/// For antiparallel inputs the half turn is taken about the first principal
/// axis that is perpendicular enough to `from`.
pub fn shortest_arc(from: &Vec3, to: &Vec3) -> Mat3 {
    let cos = from.dot(to).clamp(-1.0, 1.0);
    if cos > 1.0 - 1e-12 {
        return Mat3::identity();
    }
    if cos < -1.0 + 1e-12 {
        let helper = Axis::ALL
            .iter()
            .map(|a| a.unit())
            .min_by(|a, b| from.dot(a).abs().total_cmp(&from.dot(b).abs()))
            .unwrap();
        let axis = from.cross(&helper).normalize();
        return snap_entries(&quarter_rotation_about(&axis, 2));
    }
    let axis = from.cross(to).normalize();
    rotation_about(&axis, cos.acos())
}

/// Bit pattern of a float with `-0.0` folded into `+0.0`, for hashing.
pub fn canonical_bits(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_group_has_24_distinct_rotations() {
        let rots = cube_rotations();
        assert_eq!(rots.len(), 24);
        assert_eq!(rots[0], Mat3::identity());
        for (i, a) in rots.iter().enumerate() {
            assert!(is_rotation(a, 0.0));
            for b in &rots[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn quarter_turns_are_exact_and_compose() {
        for axis in Axis::ALL {
            let q = axis_rotation(axis, 1);
            assert_eq!(q * q * q * q, Mat3::identity());
            assert_eq!(q * q, axis_rotation(axis, 2));
            assert_eq!(quarter_rotation_about(&axis.unit(), 3), axis_rotation(axis, 3));
        }
    }

    #[test]
    fn y_quarter_turn_maps_x_to_minus_z() {
        let r = axis_rotation(Axis::Y, 1);
        assert_eq!(r * Vec3::x(), -Vec3::z());
    }

    #[test]
    fn shortest_arc_handles_antiparallel() {
        let r = shortest_arc(&Vec3::y(), &-Vec3::y());
        assert!(is_rotation(&r, 1e-12));
        assert!((r * Vec3::y() + Vec3::y()).norm() < 1e-12);
        let r = shortest_arc(&Vec3::x(), &Vec3::y());
        assert!((r * Vec3::x() - Vec3::y()).norm() < 1e-12);
    }

    #[test]
    fn polar_projection_fixes_small_skew() {
        let m = axis_rotation(Axis::Z, 1) + Mat3::from_element(1e-4);
        let p = polar_project(&m);
        assert!(is_rotation(&p, 1e-9));
        assert!((p - axis_rotation(Axis::Z, 1)).norm() < 1e-3);
    }
}
