use crate::assembly::{Assembly, AssemblyError, BrickInstance};
use crate::brickfile::shape::Aabb;
use crate::brickfile::ShapeLibrary;
use crate::math::Vec3;

/// Overlap below this on any axis counts as touching.
pub const TOUCH_TOLERANCE: f64 = 0.5;
pub const SWEEP_STEP: f64 = 4.0;

/// Collision boxes of an instance in world coordinates.
pub fn world_boxes(inst: &BrickInstance, library: &ShapeLibrary) -> Vec<Aabb> {
    library
        .shape(inst.shape_id)
        .map(|s| s.collision_boxes.iter().map(|b| b.transformed(&inst.rotation, &inst.translation)).collect())
        .unwrap_or_default()
}

fn boxes_collide(a: &Aabb, b: &Aabb) -> bool {
    let o = a.overlap(b);
    o.x >= TOUCH_TOLERANCE && o.y >= TOUCH_TOLERANCE && o.z >= TOUCH_TOLERANCE
}

fn any_collide(xs: &[Aabb], ys: &[Aabb]) -> bool {
    xs.iter().any(|x| ys.iter().any(|y| boxes_collide(x, y)))
}

/// Whether `candidate` overlaps any instance not listed in `ignore`.
pub fn collides(assembly: &Assembly, candidate: &BrickInstance, library: &ShapeLibrary, ignore: &[u32]) -> bool {
    let mine = world_boxes(candidate, library);
    assembly
        .instances()
        .filter(|i| !ignore.contains(&i.instance_id))
        .any(|i| any_collide(&mine, &world_boxes(i, library)))
}

/// World-space direction an instance leaves along when pulled off via
/// `point`: the point's outward axis, so studs pull up and bottom
/// receptacles pull down.
pub fn sweep_direction(inst: &BrickInstance, point: u32, library: &ShapeLibrary) -> Result<Vec3, AssemblyError> {
    let shape = library.shape(inst.shape_id).ok_or(AssemblyError::UnknownShape(inst.shape_id))?;
    let p = shape
        .point(point)
        .ok_or(AssemblyError::UnknownPoint { instance: inst.instance_id, point })?;
    Ok(inst.axis_to_world(&p.local_axis))
}

/// Whether the instance can be pulled out along the selected point's axis
/// without hitting the rest of the assembly.
pub fn removable(assembly: &Assembly, instance_id: u32, point: u32, library: &ShapeLibrary) -> Result<bool, AssemblyError> {
    let inst = assembly.get(instance_id).ok_or(AssemblyError::UnknownInstance(instance_id))?;
    let dir = sweep_direction(inst, point, library)?;
    let others: Vec<Aabb> = assembly
        .instances()
        .filter(|i| i.instance_id != instance_id)
        .flat_map(|i| world_boxes(i, library))
        .collect();
    if others.is_empty() {
        return Ok(true);
    }
    let diag = assembly.world_bounds(library).size().norm();
    let steps = ((2.0 * diag) / SWEEP_STEP).ceil() as usize;
    let mine = world_boxes(inst, library);
    for k in 0..=steps {
        let offset = dir * (k as f64 * SWEEP_STEP);
        let moved: Vec<Aabb> = mine.iter().map(|b| Aabb::new(b.min + offset, b.max + offset)).collect();
        if any_collide(&moved, &others) {
            return Ok(false);
        }
    }
    Ok(true)
}
