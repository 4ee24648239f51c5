//! Pose of a hand brick mated onto a table connection point.

use crate::assembly::BrickInstance;
use crate::brickfile::shape::ConnectionPoint;
use crate::math::{cube_rotations, quarter_rotation_about, shortest_arc, snap_entries, Mat3, Vec3};
use crate::raster::{camera_pose, CameraState, ViewTransform};

/// The hand brick's orientation as it appears on screen, carried over into
/// the table view: `V_tableᵀ · V_hand · R_hand`.
pub fn observed_orientation(table_view: &ViewTransform, hand_view: &ViewTransform, hand_rotation: &Mat3) -> Mat3 {
    table_view.rows.transpose() * hand_view.rows * hand_rotation
}

/// Rotation taking the local point axis onto `target_axis`, with the free
/// spin about that axis chosen closest to `observed`.
///
/// Among the 24 grid rotations that satisfy the axis constraint the one with
/// the largest `trace(Cᵀ · observed)` wins (lowest enumeration index on ties).
/// Off-grid axes fall back to the shortest arc from the observed axis.
pub fn mating_rotation(local_axis: &Vec3, target_axis: &Vec3, observed: &Mat3) -> Mat3 {
    let mut best: Option<(f64, Mat3)> = None;
    for c in cube_rotations() {
        if (c * local_axis - target_axis).norm() > 1e-6 {
            continue;
        }
        let score = (c.transpose() * observed).trace();
        if best.is_none_or(|(b, _)| score > b + 1e-9) {
            best = Some((score, *c));
        }
    }
    match best {
        Some((_, c)) => c,
        None => shortest_arc(&(observed * local_axis), target_axis) * observed,
    }
}

/// Pose putting the hand point at the table point with anti-parallel axes.
pub fn mating_pose(
    hand_point: &Vec3,
    hand_axis: &Vec3,
    table_point: &Vec3,
    table_axis: &Vec3,
    observed: &Mat3,
) -> (Mat3, Vec3) {
    let r = mating_rotation(hand_axis, &-table_axis, observed);
    (r, table_point - r * hand_point)
}

/// Where Assemble puts the hand brick: `hand` point `hp` onto `table` point
/// `tp`, free spin taken from the two cameras. The returned instance has id 0.
pub fn assemble_pose(
    hand: &BrickInstance,
    hp: &ConnectionPoint,
    table: &BrickInstance,
    tp: &ConnectionPoint,
    table_camera: &CameraState,
    hand_camera: &CameraState,
) -> BrickInstance {
    let r_obs = observed_orientation(&camera_pose(table_camera), &camera_pose(hand_camera), &hand.rotation);
    let (rot, trans) = mating_pose(
        &hp.local_position,
        &hp.local_axis,
        &table.to_world(&tp.local_position),
        &table.axis_to_world(&tp.local_axis),
        &r_obs,
    );
    BrickInstance::new(0, hand.shape_id, hand.color_id, rot, trans)
}

/// `inst` turned by `angle` degrees (a multiple of 90) about the world axis
/// of its point `p`, pivoting on that point.
pub fn rotated_about_point(inst: &BrickInstance, p: &ConnectionPoint, angle: u32) -> BrickInstance {
    let pivot = inst.to_world(&p.local_position);
    let axis = inst.axis_to_world(&p.local_axis);
    let q = snap_entries(&quarter_rotation_about(&axis, (angle / 90) as i32));
    inst.with_pose(snap_entries(&(q * inst.rotation)), q * (inst.translation - pivot) + pivot)
}
