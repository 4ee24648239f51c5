//! Deterministic software rendering of workspaces: colour, depth,
//! instance-id and connection-point snap buffers.

pub mod camera;
pub mod frame;
pub mod pipeline;
pub mod snaps;

pub use camera::{camera_pose, frame_scene, CameraState, Projection, ViewTransform};
pub use frame::Frame;
pub use pipeline::{Buffers, Rasterizer};
pub use snaps::{render_snaps, DepthMap, SnapGrid};

use crate::assembly::Assembly;
use crate::brickfile::color::resolve_color;
use crate::brickfile::shape::Polarity;
use crate::brickfile::ShapeLibrary;

pub const BACKGROUND: [u8; 3] = [102, 102, 102];
pub const TABLE_SIZE: usize = 256;
pub const HAND_SIZE: usize = 96;

/// Colour, depth and id buffers only.
pub fn render_buffers(
    assembly: &Assembly,
    library: &ShapeLibrary,
    view: &ViewTransform,
    projection: &Projection,
    width: usize,
    height: usize,
) -> Buffers {
    let mut buffers = Buffers::new(width, height, BACKGROUND);
    let mut r = Rasterizer::new(&mut buffers, *view, *projection);
    for inst in assembly.instances() {
        let Some(shape) = library.shape(inst.shape_id) else { continue };
        let rgb = resolve_color(&library.colors, inst.color_id).rgb;
        for t in &shape.mesh {
            let v = t.v.map(|p| inst.to_world(&p));
            r.draw(&v, &inst.axis_to_world(&t.normal), rgb, inst.instance_id);
        }
    }
    buffers
}

/// Full frame from an orbit camera with the standard perspective projection.
pub fn render(assembly: &Assembly, library: &ShapeLibrary, camera: &CameraState, width: usize, height: usize) -> Frame {
    assert!(width.is_multiple_of(4) && height.is_multiple_of(4), "frame size must be a multiple of 4");
    let view = camera_pose(camera);
    let proj = Projection::standard();
    let b = render_buffers(assembly, library, &view, &proj, width, height);
    let depth = DepthMap { depth: &b.depth, width, height };
    let snap = |pol| render_snaps(assembly, library, &view, &proj, depth, pol);
    let snap_pos = snap(Polarity::Positive);
    let snap_neg = snap(Polarity::Negative);
    Frame { width, height, color: b.color, depth: b.depth, instance_id: b.ids, snap_pos, snap_neg }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::BrickInstance;
    use crate::brickfile::{load_shape_library, LibraryConfig};
    use crate::math::{Mat3, Vec3};

    #[test]
    fn empty_scene_is_background() {
        let lib = load_shape_library(&LibraryConfig::default()).unwrap();
        let f = render(&Assembly::new(), &lib, &CameraState::default(), 64, 64);
        assert!(f.color.iter().all(|c| *c == BACKGROUND));
        assert!(f.instance_id.iter().all(|i| *i == 0));
        assert_eq!(f.snap_pos.occupied() + f.snap_neg.occupied(), 0);
    }

    #[test]
    fn ids_exactly_where_depth_is_finite() {
        let lib = load_shape_library(&LibraryConfig::default()).unwrap();
        let mut a = Assembly::new();
        a.insert(BrickInstance::new(0, 3001, 4, Mat3::identity(), Vec3::zeros()));
        let f = render(&a, &lib, &CameraState::default(), 256, 256);
        let n = f.instance_id.iter().filter(|i| **i != 0).count();
        assert!(n > 0);
        assert_eq!(n, f.depth.iter().filter(|d| d.is_finite()).count());
        // all eight studs are visible from above
        let refs: std::collections::BTreeSet<_> = f.snap_pos.cells.iter().flatten().collect();
        assert_eq!(refs.len(), 8);
        assert_eq!(f.snap_neg.occupied(), 0);
    }
}
