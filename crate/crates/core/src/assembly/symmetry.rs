//! Rotational self-symmetries of shapes, detected by comparing orthographic
//! depth maps of the shape before and after each candidate rotation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brickfile::library::LibraryError;
use crate::brickfile::shape::BrickShape;
use crate::math::{axis_rotation, Axis, Mat3, Vec3};
use crate::raster::camera::{Projection, ViewTransform};
use crate::raster::pipeline::render_mesh_depth;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymmetryOp {
    pub axis: Axis,
    /// Degrees: 90, 180 or 270.
    pub angle: u32,
}

impl SymmetryOp {
    /// All nine candidates in (axis, angle) order.
    pub fn candidates() -> Vec<SymmetryOp> {
        Axis::ALL
            .iter()
            .flat_map(|&axis| [90, 180, 270].map(|angle| SymmetryOp { axis, angle }))
            .collect()
    }

    pub fn vertical_all() -> Vec<SymmetryOp> {
        [90, 180, 270].map(|angle| SymmetryOp { axis: Axis::Y, angle }).to_vec()
    }

    pub fn matrix(&self) -> Mat3 {
        axis_rotation(self.axis, (self.angle / 90) as i32)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("shape {0} has an empty mesh")]
    EmptyMesh(u32),
}

/// Symmetry sets per shape id. Shapes without an entry only have the identity.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymmetryTable {
    entries: BTreeMap<u32, Vec<SymmetryOp>>,
    matrices: BTreeMap<u32, Vec<Mat3>>,
}

impl SymmetryTable {
    pub fn insert(&mut self, shape_id: u32, mut ops: Vec<SymmetryOp>) {
        ops.sort();
        ops.dedup();
        let mut mats = vec![Mat3::identity()];
        mats.extend(ops.iter().map(SymmetryOp::matrix));
        self.matrices.insert(shape_id, mats);
        self.entries.insert(shape_id, ops);
    }

    pub fn get(&self, shape_id: u32) -> &[SymmetryOp] {
        self.entries.get(&shape_id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Identity followed by the listed symmetries.
    pub fn rotations(&self, shape_id: u32) -> &[Mat3] {
        static IDENTITY: std::sync::OnceLock<[Mat3; 1]> = std::sync::OnceLock::new();
        match self.matrices.get(&shape_id) {
            Some(m) => m,
            None => IDENTITY.get_or_init(|| [Mat3::identity()]),
        }
    }

    pub fn shape_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `sym <shape_id> <axis> <angle>` lines; a shape with no symmetry is
    /// written as `sym <shape_id> none`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, ops) in &self.entries {
            if ops.is_empty() {
                let _ = writeln!(out, "sym {id} none");
            }
            for op in ops {
                let _ = writeln!(out, "sym {id} {} {}", op.axis.name(), op.angle);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<SymmetryTable, LibraryError> {
        let mut entries: BTreeMap<u32, Vec<SymmetryOp>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let bad = |m: &str| LibraryError::SymmetryTable { line: i + 1, message: m.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[..] {
                [] => {}
                [t, ..] if t.starts_with('#') => {}
                ["sym", id, "none"] => {
                    entries.entry(id.parse().map_err(|_| bad("bad shape id"))?).or_default();
                }
                ["sym", id, axis, angle] => {
                    let id: u32 = id.parse().map_err(|_| bad("bad shape id"))?;
                    let axis = Axis::parse(axis).ok_or_else(|| bad("axis must be X, Y or Z"))?;
                    let angle: u32 = angle.parse().map_err(|_| bad("bad angle"))?;
                    if ![90, 180, 270].contains(&angle) {
                        return Err(bad("angle must be 90, 180 or 270"));
                    }
                    entries.entry(id).or_default().push(SymmetryOp { axis, angle });
                }
                _ => return Err(bad("expected: sym <shape_id> <axis> <angle>")),
            }
        }
        let mut table = SymmetryTable::default();
        for (id, ops) in entries {
            table.insert(id, ops);
        }
        Ok(table)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryConfig {
    pub resolution: usize,
    /// Per-pixel depth agreement, LDU.
    pub depth_tolerance: f64,
    /// Fraction of pixels covered in both maps that must agree.
    pub match_fraction: f64,
    /// Largest fraction of all pixels whose coverage may differ.
    pub mask_fraction: f64,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        SymmetryConfig { resolution: 64, depth_tolerance: 1.0, match_fraction: 0.995, mask_fraction: 0.005 }
    }
}

fn views(radius: f64) -> Vec<(ViewTransform, Projection)> {
    let proj = Projection::Orthographic { half_height: radius * 1.1 };
    Axis::ALL
        .iter()
        .flat_map(|a| [a.unit(), -a.unit()])
        .map(|dir: Vec3| {
            let hint = if dir.y.abs() > 0.5 { Vec3::new(0.0, 0.0, 1.0) } else { Vec3::new(0.0, -1.0, 0.0) };
            (ViewTransform::look_along(-dir * (radius * 4.0), dir, hint), proj)
        })
        .collect()
}

fn maps_match(a: &[f32], b: &[f32], cfg: &SymmetryConfig) -> bool {
    let (mut both, mut agree, mut xor) = (0usize, 0usize, 0usize);
    for (x, y) in a.iter().zip(b) {
        match (x.is_finite(), y.is_finite()) {
            (true, true) => {
                both += 1;
                if f64::from((x - y).abs()) <= cfg.depth_tolerance {
                    agree += 1;
                }
            }
            (false, false) => {}
            _ => xor += 1,
        }
    }
    let total = a.len() as f64;
    (both == 0 || agree as f64 >= cfg.match_fraction * both as f64) && xor as f64 <= cfg.mask_fraction * total
}

/// Candidate rotations (about the shape's local origin) under which all six
/// orthographic depth maps are unchanged.
pub fn compute_symmetries(shape: &BrickShape, cfg: &SymmetryConfig) -> Result<Vec<SymmetryOp>, SymmetryError> {
    if shape.mesh.is_empty() {
        return Err(SymmetryError::EmptyMesh(shape.shape_id));
    }
    let radius = shape.mesh.iter().flat_map(|t| t.v.iter()).map(|v| v.norm()).fold(0.0, f64::max).max(1e-6);
    let n = cfg.resolution;
    let views = views(radius);
    let reference: Vec<Vec<f32>> = views
        .iter()
        .map(|(v, p)| render_mesh_depth(&shape.mesh, &Mat3::identity(), v, p, n, n))
        .collect();
    let mut out = Vec::new();
    for op in SymmetryOp::candidates() {
        let r = op.matrix();
        let all = views
            .iter()
            .zip(&reference)
            .all(|((v, p), base)| maps_match(base, &render_mesh_depth(&shape.mesh, &r, v, p, n, n), cfg));
        if all {
            out.push(op);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut t = SymmetryTable::default();
        t.insert(3001, vec![SymmetryOp { axis: Axis::Y, angle: 180 }]);
        t.insert(3005, SymmetryOp::vertical_all());
        t.insert(77, vec![]);
        let text = t.to_text();
        assert_eq!(SymmetryTable::parse(&text).unwrap(), t);
        assert!(SymmetryTable::parse("sym 1 Q 90").is_err());
        assert!(SymmetryTable::parse("sym 1 Y 45").is_err());
    }

    #[test]
    fn rotations_start_with_identity() {
        let t = SymmetryTable::default();
        assert_eq!(t.rotations(5), &[Mat3::identity()]);
    }

    #[test]
    fn core_shapes_have_the_analytic_symmetries() {
        let lib = crate::brickfile::load_shape_library(&Default::default()).unwrap();
        let half = vec![SymmetryOp { axis: Axis::Y, angle: 180 }];
        for shape in lib.shapes() {
            let got = compute_symmetries(shape, &SymmetryConfig::default()).unwrap();
            let want = match shape.shape_id {
                3001 | 3004 | 3020 => half.clone(),
                _ => SymmetryOp::vertical_all(),
            };
            assert_eq!(got, want, "shape {}", shape.shape_id);
        }
    }
}
