use crate::assembly::symmetry::SymmetryTable;
use crate::assembly::BrickInstance;
use crate::math::Mat3;

/// Angle of the relative rotation `R1ᵀ·R2`, in `[0, π]`.
pub fn geodesic_distance(r1: &Mat3, r2: &Mat3) -> f64 {
    let c = (((r1.transpose() * r2).trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    c.acos()
}

/// Smallest geodesic distance between `r_i·S` and `r_j` over the shape's
/// symmetries `S` (identity included).
pub fn min_symmetric_distance(shape_id: u32, r_i: &Mat3, r_j: &Mat3, sym: &SymmetryTable) -> f64 {
    sym.rotations(shape_id)
        .iter()
        .map(|s| geodesic_distance(&(r_i * s), r_j))
        .fold(f64::INFINITY, f64::min)
}

/// Orientation agreement up to shape symmetry.
pub fn oriented_aligned(i: &BrickInstance, j: &BrickInstance, sym: &SymmetryTable, theta: f64) -> bool {
    min_symmetric_distance(i.shape_id, &i.rotation, &j.rotation, sym) < theta
}
